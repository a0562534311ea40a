//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any fails. Tolerances and time budgets are fixed here.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use pseudoexp::conjugate::{
    posterior_theta1, posterior_theta3_sub1, posterior_theta3_sub2, predictive_x, predictive_y,
    summarize, PriorSpec,
};
use pseudoexp::distributions::{
    gamma_cdf, gamma_ln_pdf, gamma_pdf, joint_pdf, lomax_cdf, lomax_pdf, sample_bivariate,
    sample_exponential, sample_gamma, BivariateSample, GammaParams, LomaxParams, ModelVariant,
    PseudoExpParams,
};
use pseudoexp::fit::ChainSettings;
use pseudoexp::harm::{run_chain, summarize_chain, ChainConfig, FnTarget};
use pseudoexp::likelihood::{conditional_gradient, conditional_log_likelihood, mle_submodel1, mle_submodel2};
use pseudoexp::posterior::{FitPrior, PosteriorTarget};
use pseudoexp::pseudo_gamma::{marginal_theta1, marginal_theta3, PseudoGammaPrior};
use pseudoexp::quadrature::{integrate_semi_infinite, QuadConfig};
use pseudoexp::rng::seeded;
use pseudoexp::study::{run_study, StudyConfig, StudyRow};
use pseudoexp::summary::ParameterId;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// One-sample Kolmogorov-Smirnov distance.
fn ks_distance(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn random_sample<R: Rng>(rng: &mut R, variant: ModelVariant) -> BivariateSample {
    let t1 = rng.random_range(0.2..5.0);
    let t3 = rng.random_range(0.2..5.0);
    let p = match variant {
        ModelVariant::SubModelI => PseudoExpParams::sub_model_one(t1, t3),
        _ => PseudoExpParams::sub_model_two(t1, t3),
    }
    .unwrap();
    let n = rng.random_range(1..200);
    sample_bivariate(&p, variant, n, rng).unwrap()
}

const SUB_MODELS: [ModelVariant; 2] = [ModelVariant::SubModelI, ModelVariant::SubModelII];

fn conjugacy_exactness() -> Outcome {
    let mut rng = seeded(101);
    let mut mismatches = 0;
    for variant in SUB_MODELS {
        for _ in 0..1000 {
            let a1 = rng.random_range(0.1..10.0);
            let b1 = rng.random_range(0.1..10.0);
            let a3 = rng.random_range(0.1..10.0);
            let b3 = rng.random_range(0.1..10.0);
            let spec = PriorSpec::IndependentGamma {
                theta1: GammaParams::new(a1, b1).unwrap(),
                theta2: None,
                theta3: GammaParams::new(a3, b3).unwrap(),
            };
            let s = random_sample(&mut rng, variant);
            let pairs = s.pairs();
            let n = pairs.len() as f64;
            let sx: f64 = pairs.iter().map(|p| p.0).sum();
            let sy: f64 = pairs.iter().map(|p| p.1).sum();
            let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
            let stat3 = match variant {
                ModelVariant::SubModelI => sy + sxy,
                _ => sxy,
            };
            let p1 = posterior_theta1(&spec, &s.stats()).unwrap();
            let p3 = match variant {
                ModelVariant::SubModelI => posterior_theta3_sub1(&spec, &s.stats()),
                _ => posterior_theta3_sub2(&spec, &s.stats()),
            }
            .unwrap();
            let expected = [a1 + n, b1 + sx, a3 + n, b3 + stat3];
            let got = [p1.shape, p1.rate, p3.shape, p3.rate];
            if expected.iter().zip(&got).any(|(e, g)| e.to_bits() != g.to_bits()) {
                mismatches += 1;
            }
        }
    }
    check(mismatches == 0, format!("{mismatches} of 2000 instances differ in any bit"))
}

fn improper_matches_mle() -> Outcome {
    let mut rng = seeded(202);
    let mut mismatches = 0;
    for variant in SUB_MODELS {
        for _ in 0..1000 {
            let s = random_sample(&mut rng, variant);
            let m = match variant {
                ModelVariant::SubModelI => mle_submodel1(&s),
                _ => mle_submodel2(&s),
            };
            let spec = PriorSpec::Improper;
            let p1 = posterior_theta1(&spec, &s.stats()).unwrap();
            let p3 = match variant {
                ModelVariant::SubModelI => posterior_theta3_sub1(&spec, &s.stats()),
                _ => posterior_theta3_sub2(&spec, &s.stats()),
            }
            .unwrap();
            let b1 = summarize(&p1, 0.95).unwrap().mean;
            let b3 = summarize(&p3, 0.95).unwrap().mean;
            if b1 != m.params.theta1 || b3 != m.params.theta3 {
                mismatches += 1;
            }
        }
    }
    check(mismatches == 0, format!("{mismatches} of 2000 instances differ"))
}

fn sampler_correctness() -> Outcome {
    let g1 = GammaParams::new(22.0, 12.0).unwrap();
    let g2 = GammaParams::new(6.0, 6.5).unwrap();
    let target = FnTarget::new(2, move |p: &[f64]| {
        if p[0] <= 0.0 || p[1] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        gamma_ln_pdf(&g1, p[0]) + gamma_ln_pdf(&g2, p[1])
    });
    let mut config = ChainConfig::new(vec![1.0, 1.0], 303);
    config.thinning = 10;
    let config = config.with_kept_draws(10_000);
    let result = run_chain(&target, &config).unwrap();
    let means = summarize_chain(&result, 0.95).unwrap();
    let se = result.mc_standard_errors();
    let truth = [11.0 / 6.0, 12.0 / 13.0];
    let z: Vec<f64> = (0..2).map(|j| (means[j].mean - truth[j]).abs() / se[j]).collect();
    let ks = [
        ks_distance(result.coordinate(0), |v| gamma_cdf(&g1, v)),
        ks_distance(result.coordinate(1), |v| gamma_cdf(&g2, v)),
    ];
    check(
        z.iter().all(|&v| v < 3.0) && ks.iter().all(|&v| v < 0.02),
        format!(
            "|mean - truth| / MC SE = {:.2}, {:.2} (< 3); KS = {:.4}, {:.4} (< 0.02); acceptance {:.3}",
            z[0], z[1], ks[0], ks[1], result.acceptance_rate
        ),
    )
}

fn quadrature_vs_harm() -> Outcome {
    let truth = PseudoExpParams::sub_model_one(2.0, 5.0).unwrap();
    let s = sample_bivariate(&truth, ModelVariant::SubModelI, 30, &mut seeded(404)).unwrap();
    let prior = PseudoGammaPrior::new(2.0, 4.0, 2.0, 0.0, 3.0).unwrap();
    let cfg = QuadConfig::default();
    let q = [
        marginal_theta1(&prior, &s, ModelVariant::SubModelI, &cfg).unwrap().mean(),
        marginal_theta3(&prior, &s, ModelVariant::SubModelI, &cfg).unwrap().mean(),
    ];
    let target = PosteriorTarget::new(
        &s,
        ModelVariant::SubModelI,
        FitPrior::Pseudo {
            prior,
            theta2: None,
        },
    )
    .unwrap();
    let config = ChainConfig::new(target.initial_point(), 405);
    let result = run_chain(&target, &config).unwrap();
    let h = summarize_chain(&result, 0.95).unwrap();
    let se = result.mc_standard_errors();
    let z: Vec<f64> = (0..2).map(|j| (h[j].mean - q[j]).abs() / se[j]).collect();
    check(
        z.iter().all(|&v| v < 3.0),
        format!(
            "theta1 quadrature {:.5} vs HARM {:.5} ({:.2} SE); theta3 {:.5} vs {:.5} ({:.2} SE)",
            q[0], h[0].mean, z[0], q[1], h[1].mean, z[1]
        ),
    )
}

fn predictive_law() -> Outcome {
    let spec = PriorSpec::IndependentGamma {
        theta1: GammaParams::new(2.0, 2.0).unwrap(),
        theta2: None,
        theta3: GammaParams::new(4.0, 5.0).unwrap(),
    };
    let mut rng = seeded(505);
    let mut details = Vec::new();
    let mut pass = true;
    for variant in SUB_MODELS {
        let truth = match variant {
            ModelVariant::SubModelI => PseudoExpParams::sub_model_one(2.0, 3.0),
            _ => PseudoExpParams::sub_model_two(2.0, 3.0),
        }
        .unwrap();
        let s = sample_bivariate(&truth, variant, 30, &mut rng).unwrap();
        let p1 = posterior_theta1(&spec, &s.stats()).unwrap();
        let p3 = match variant {
            ModelVariant::SubModelI => posterior_theta3_sub1(&spec, &s.stats()),
            _ => posterior_theta3_sub2(&spec, &s.stats()),
        }
        .unwrap();
        let laws = [
            ("x", p1.gamma(), predictive_x(&p1).unwrap()),
            ("y", p3.gamma(), predictive_y(&p3, variant).unwrap()),
        ];
        for (name, g, lomax) in laws {
            let draws: Vec<f64> = (0..100_000)
                .map(|_| {
                    let theta = sample_gamma(&g, &mut rng);
                    sample_exponential(theta, &mut rng)
                })
                .collect();
            let d = ks_distance(draws, |t| lomax_cdf(&lomax, t));
            pass &= d < 0.01;
            details.push(format!("{variant} {name}: KS {d:.4}"));
        }
    }
    check(pass, format!("{} (< 0.01)", details.join(", ")))
}

fn fast_study(seed: u64) -> Vec<StudyRow> {
    let mut config = StudyConfig::new(ModelVariant::SubModelI, seed);
    config.chain = ChainSettings {
        kept_draws: 1_000,
        ..ChainSettings::default()
    };
    run_study(&config).unwrap()
}

fn cell(rows: &[StudyRow], n: usize, parameter: ParameterId, prior: &str) -> f64 {
    rows.iter()
        .find(|r| r.n == n && r.parameter == parameter && r.prior == prior)
        .map(|r| r.mean)
        .unwrap_or(f64::NAN)
}

fn study_band() -> Outcome {
    let rows = fast_study(606);
    let m1 = cell(&rows, 500, ParameterId::Theta1, "IGP");
    let m3 = cell(&rows, 500, ParameterId::Theta3, "IGP");
    check(
        (m1 - 1.912).abs() <= 0.3 && (m3 - 3.026).abs() <= 0.3,
        format!("n=500 IGP means theta1 {m1:.4} (1.912 +/- 0.3), theta3 {m3:.4} (3.026 +/- 0.3)"),
    )
}

fn consistency_trend() -> Outcome {
    let truth = [(ParameterId::Theta1, 2.0), (ParameterId::Theta3, 3.0)];
    let (mut improved, mut total) = (0, 0);
    for seed in 1..=10 {
        let rows = fast_study(700 + seed);
        for prior in ["IGP", "ImP", "PGP1", "PGP2", "PGP3"] {
            for (p, t) in truth {
                let e20 = (cell(&rows, 20, p, prior) - t).abs();
                let e500 = (cell(&rows, 500, p, prior) - t).abs();
                total += 1;
                if e500 < e20 {
                    improved += 1;
                }
            }
        }
    }
    let frac = improved as f64 / total as f64;
    check(
        frac >= 0.9,
        format!("{improved} of {total} (study, parameter, prior) cells improve from n=20 to n=500 ({:.0}%, need >= 90%)", 100.0 * frac),
    )
}

fn normalization_and_gradient() -> Outcome {
    let cfg = QuadConfig::default();
    let mut worst: f64 = 0.0;
    let mut record = |total: f64| worst = worst.max((total - 1.0).abs());
    let models = [
        (ModelVariant::Full, PseudoExpParams::new(2.0, 1.0, 3.0).unwrap()),
        (ModelVariant::SubModelI, PseudoExpParams::sub_model_one(0.7, 2.5).unwrap()),
        (ModelVariant::SubModelII, PseudoExpParams::sub_model_two(1.5, 0.4).unwrap()),
    ];
    for (variant, p) in models {
        let inner = |x: f64| {
            integrate_semi_infinite(|y| joint_pdf(&p, variant, x, y).unwrap(), 0.0, &cfg)
                .unwrap()
                .value
        };
        record(integrate_semi_infinite(inner, 0.0, &cfg).unwrap().value);
    }
    for (a, b) in [(22.0, 12.0), (0.7, 2.0), (6.0, 6.5)] {
        let g = GammaParams::new(a, b).unwrap();
        record(integrate_semi_infinite(|t| gamma_pdf(&g, t), 0.0, &cfg).unwrap().value);
    }
    for (a, l) in [(4.0, 5.0), (1.5, 0.3), (32.0, 18.0)] {
        let law = LomaxParams::new(a, l).unwrap();
        record(integrate_semi_infinite(|t| lomax_pdf(&law, t), 0.0, &cfg).unwrap().value);
    }
    for variant in SUB_MODELS {
        let truth = match variant {
            ModelVariant::SubModelI => PseudoExpParams::sub_model_one(2.0, 5.0),
            _ => PseudoExpParams::sub_model_two(2.0, 5.0),
        }
        .unwrap();
        let s = sample_bivariate(&truth, variant, 30, &mut seeded(808)).unwrap();
        let prior = PseudoGammaPrior::new(2.0, 4.0, 2.0, 0.0, 3.0).unwrap();
        for m in [
            marginal_theta1(&prior, &s, variant, &cfg).unwrap(),
            marginal_theta3(&prior, &s, variant, &cfg).unwrap(),
        ] {
            record(integrate_semi_infinite(|t| m.pdf(t), 0.0, &cfg).unwrap().value);
        }
    }
    let full = PseudoExpParams::new(2.0, 1.0, 3.0).unwrap();
    let mut rng = seeded(809);
    let s = sample_bivariate(&full, ModelVariant::Full, 100, &mut rng).unwrap();
    let mut worst_grad: f64 = 0.0;
    for _ in 0..200 {
        let a: f64 = rng.random_range(0.05..5.0);
        let b: f64 = rng.random_range(0.05..5.0);
        let g = conditional_gradient(&s, a, b);
        let (ha, hb) = (1e-6 * a, 1e-6 * b);
        let fd = [
            (conditional_log_likelihood(&s, a + ha, b) - conditional_log_likelihood(&s, a - ha, b)) / (2.0 * ha),
            (conditional_log_likelihood(&s, a, b + hb) - conditional_log_likelihood(&s, a, b - hb)) / (2.0 * hb),
        ];
        for k in 0..2 {
            worst_grad = worst_grad.max((g[k] - fd[k]).abs() / g[k].abs().max(1.0));
        }
    }
    check(
        worst < 1e-6 && worst_grad < 1e-4,
        format!("worst |integral - 1| = {worst:.2e} (< 1e-6); worst gradient relative error = {worst_grad:.2e} (< 1e-4)"),
    )
}

fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_pseudoexp");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).current_dir(dir).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let sim = run(&["simulate", "--model", "sub1", "--theta1", "2", "--theta3", "3", "--n", "60", "--seed", "99", "--out", "data.csv"]);
    run(&["fit", "--data", "data.csv", "--model", "sub1", "--prior", "independent", "--out", "analytic.json"]);
    run(&["fit", "--data", "data.csv", "--model", "sub1", "--prior", "independent", "--method", "harm", "--fast", "--seed", "99", "--out", "harm.json"]);
    let q = run(&["predict", "--fit", "harm.json", "--quantiles", "0.05,0.5,0.95", "--grid", "0:5:51", "--out", "grid.csv"]);
    let mut files: Vec<(String, Vec<u8>)> = ["data.csv", "analytic.json", "harm.json", "grid.csv"]
        .iter()
        .map(|f| (f.to_string(), fs::read(dir.join(f)).unwrap()))
        .collect();
    files.push(("simulate stdout".into(), sim));
    files.push(("predict stdout".into(), q));
    files
}

fn end_to_end_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (fa, fb) = (pipeline(a.path()), pipeline(b.path()));
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} outputs byte-identical across two runs", fa.len())
        } else {
            format!("differing outputs: {}", differing.join(", "))
        },
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("conjugacy exactness", Duration::from_secs(1), conjugacy_exactness),
        ("improper-prior means equal MLEs", Duration::from_secs(1), improper_matches_mle),
        ("HARM on a product-gamma target", Duration::from_secs(30), sampler_correctness),
        ("quadrature vs HARM marginal means", Duration::from_secs(60), quadrature_vs_harm),
        ("Lomax predictive vs compound draws", Duration::from_secs(30), predictive_law),
        ("study band at n=500", Duration::from_secs(300), study_band),
        ("consistency trend over 10 studies", Duration::from_secs(900), consistency_trend),
        ("normalization and gradient", Duration::from_secs(60), normalization_and_gradient),
        ("end-to-end determinism", Duration::from_secs(120), end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "acceptance {} [{}] {}: {} ({:.2}s of {}s budget{})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
