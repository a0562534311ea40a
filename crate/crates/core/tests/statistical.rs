//! Monte Carlo and cross-method checks. Every test is seeded, so outcomes are
//! fixed; tolerances are several standard errors wide.

use pseudoexp::conjugate::PriorSpec;
use pseudoexp::distributions::{sample_bivariate, GammaParams, ModelVariant, PseudoExpParams};
use pseudoexp::fit::{fit, ChainSettings, FitOptions, Method};
use pseudoexp::likelihood::{mle, MleOptions};
use pseudoexp::posterior::FitPrior;
use pseudoexp::pseudo_gamma::PseudoGammaPrior;
use pseudoexp::rng::seeded;
use pseudoexp::study::{run_study, LabeledPrior, StudyConfig};
use pseudoexp::summary::ParameterId;

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn independent(full: bool) -> FitPrior {
    FitPrior::Conjugate {
        spec: PriorSpec::IndependentGamma {
            theta1: GammaParams::new(2.0, 2.0).unwrap(),
            theta2: full.then(|| GammaParams::new(3.0, 1.0).unwrap()),
            theta3: GammaParams::new(4.0, 5.0).unwrap(),
        },
    }
}

#[test]
fn simulated_marginal_and_conditional_laws() {
    let p = PseudoExpParams::new(2.0, 0.5, 3.0).unwrap();
    let n = 100_000;
    let s = sample_bivariate(&p, ModelVariant::Full, n, &mut seeded(1)).unwrap();
    let mean_x = s.sum_x() / n as f64;
    // sd of the mean of Exp(2) draws is 0.5 / sqrt(n)
    assert!((mean_x - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{mean_x}");
    // y scaled by its conditional rate is Exp(1) whatever x is.
    let scaled: Vec<f64> = s.pairs().iter().map(|&(x, y)| y * p.conditional_rate(x)).collect();
    let mean = scaled.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    let mut sorted = scaled;
    sorted.sort_by(f64::total_cmp);
    let ks = sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = 1.0 - (-t).exp();
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn sub_model_one_matches_full_model_on_its_constraint() {
    let n = 20_000;
    let a = sample_bivariate(&PseudoExpParams::sub_model_one(1.5, 2.0).unwrap(), ModelVariant::SubModelI, n, &mut seeded(2)).unwrap();
    let b = sample_bivariate(&PseudoExpParams::new(1.5, 2.0, 2.0).unwrap(), ModelVariant::Full, n, &mut seeded(3)).unwrap();
    let ys = |s: &pseudoexp::distributions::BivariateSample| s.pairs().iter().map(|p| p.1).collect::<Vec<_>>();
    let d = ks_two_sample(ys(&a), ys(&b));
    assert!(d < 0.02, "{d}");
}

#[test]
fn mle_is_consistent_at_large_n() {
    let truths = [
        (ModelVariant::Full, PseudoExpParams::new(2.0, 1.0, 3.0).unwrap()),
        (ModelVariant::SubModelI, PseudoExpParams::sub_model_one(0.5, 4.0).unwrap()),
        (ModelVariant::SubModelII, PseudoExpParams::sub_model_two(3.0, 0.7).unwrap()),
    ];
    for (variant, p) in truths {
        let s = sample_bivariate(&p, variant, 100_000, &mut seeded(4)).unwrap();
        let m = mle(&s, variant, &MleOptions::default());
        assert!(m.converged);
        for (est, truth) in [(m.params.theta1, p.theta1), (m.params.theta2, p.theta2), (m.params.theta3, p.theta3)] {
            let tol = if truth == 0.0 { 1e-12 } else { 0.05 * truth };
            assert!((est - truth).abs() <= tol, "{variant}: {est} vs {truth}");
        }
    }
}

fn harm_options(seed: u64) -> FitOptions {
    let mut o = FitOptions::new(Method::Harm, seed);
    o.chain = ChainSettings {
        kept_draws: 5_000,
        thinning: 10,
        burn_in: 5_000,
    };
    o
}

#[test]
fn analytic_and_harm_agree_for_conjugate_priors() {
    for (k, variant) in [ModelVariant::SubModelI, ModelVariant::SubModelII].into_iter().enumerate() {
        let truth = match variant {
            ModelVariant::SubModelI => PseudoExpParams::sub_model_one(2.0, 3.0),
            _ => PseudoExpParams::sub_model_two(2.0, 3.0),
        }
        .unwrap();
        let s = sample_bivariate(&truth, variant, 50, &mut seeded(10 + k as u64)).unwrap();
        for prior in [independent(false), FitPrior::Conjugate { spec: PriorSpec::Improper }] {
            let a = fit(&s, variant, &prior, &FitOptions::new(Method::Analytic, 0)).unwrap();
            let h = fit(&s, variant, &prior, &harm_options(20 + k as u64)).unwrap();
            for id in [ParameterId::Theta1, ParameterId::Theta3] {
                let (pa, ph) = (a.parameter(id).unwrap(), h.parameter(id).unwrap());
                let se = ph.mc_standard_error.unwrap();
                let z = (pa.summary.mean - ph.summary.mean).abs() / se;
                assert!(z < 3.0, "{variant} {} {id}: {z}", prior.kind());
            }
        }
    }
}

#[test]
fn quadrature_and_harm_agree_on_sub_model_two() {
    let truth = PseudoExpParams::sub_model_two(2.0, 5.0).unwrap();
    let s = sample_bivariate(&truth, ModelVariant::SubModelII, 30, &mut seeded(30)).unwrap();
    let prior = FitPrior::Pseudo {
        prior: PseudoGammaPrior::new(2.0, 4.0, 2.0, 0.0, 3.0).unwrap(),
        theta2: None,
    };
    let q = fit(&s, ModelVariant::SubModelII, &prior, &FitOptions::new(Method::Quadrature, 0)).unwrap();
    let h = fit(&s, ModelVariant::SubModelII, &prior, &harm_options(31)).unwrap();
    for id in [ParameterId::Theta1, ParameterId::Theta3] {
        let (pq, ph) = (q.parameter(id).unwrap(), h.parameter(id).unwrap());
        let z = (pq.summary.mean - ph.summary.mean).abs() / ph.mc_standard_error.unwrap();
        assert!(z < 3.0, "{id}: {z}");
    }
}

#[test]
fn independent_and_improper_converge_at_large_n() {
    let truth = PseudoExpParams::sub_model_one(2.0, 3.0).unwrap();
    let s = sample_bivariate(&truth, ModelVariant::SubModelI, 500, &mut seeded(40)).unwrap();
    let o = FitOptions::new(Method::Analytic, 0);
    let a = fit(&s, ModelVariant::SubModelI, &independent(false), &o).unwrap();
    let b = fit(&s, ModelVariant::SubModelI, &FitPrior::Conjugate { spec: PriorSpec::Improper }, &o).unwrap();
    for (pa, pb) in a.parameters.iter().zip(&b.parameters) {
        assert!((pa.summary.mean - pb.summary.mean).abs() <= 0.05 * pb.summary.mean);
        // intervals overlap
        assert!(pa.summary.ci_low < pb.summary.ci_high && pb.summary.ci_low < pa.summary.ci_high);
    }
}

/// Full model: theta1 has an exact gamma posterior and (theta2, theta3) is
/// checked against a midpoint-rule grid over the region holding its mass.
#[test]
fn full_model_harm_matches_grid_oracle() {
    use pseudoexp::conjugate::{full_model_theta23_kernel, posterior_theta1};
    let truth = PseudoExpParams::new(2.0, 1.0, 3.0).unwrap();
    let s = sample_bivariate(&truth, ModelVariant::Full, 500, &mut seeded(50)).unwrap();
    let prior = independent(true);
    let FitPrior::Conjugate { spec } = prior else { unreachable!() };
    let f = fit(&s, ModelVariant::Full, &prior, &harm_options(51)).unwrap();

    let (steps, lo2, hi2, lo3, hi3) = (300, 0.4, 2.0, 1.0, 6.0);
    let mut cells = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            let a = lo2 + (hi2 - lo2) * (i as f64 + 0.5) / steps as f64;
            let b = lo3 + (hi3 - lo3) * (j as f64 + 0.5) / steps as f64;
            cells.push((a, b, full_model_theta23_kernel(&spec, s.pairs(), a, b).unwrap()));
        }
    }
    let top = cells.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for &(a, b, v) in &cells {
        let w = (v - top).exp();
        z += w;
        m2 += w * a;
        m3 += w * b;
    }
    let expected = [
        (ParameterId::Theta1, posterior_theta1(&spec, &s.stats()).unwrap().mean()),
        (ParameterId::Theta2, m2 / z),
        (ParameterId::Theta3, m3 / z),
    ];
    for (id, e) in expected {
        let p = f.parameter(id).unwrap();
        let zscore = (p.summary.mean - e).abs() / p.mc_standard_error.unwrap();
        assert!(zscore < 3.0, "{id}: HARM {} vs oracle {e} ({zscore:.2} SE)", p.summary.mean);
    }
}

/// Each adjacent pair of sample sizes is a separate vote across ten seeds:
/// datasets at different n are independent, so single comparisons can flip.
#[test]
fn conjugate_interval_widths_shrink_with_n() {
    let series = [("IGP", ParameterId::Theta1), ("IGP", ParameterId::Theta3), ("ImP", ParameterId::Theta1), ("ImP", ParameterId::Theta3)];
    let comparisons = series.len() * 5;
    let mut votes = vec![0usize; comparisons];
    for seed in 0..10 {
        let mut c = StudyConfig::new(ModelVariant::SubModelI, 900 + seed);
        c.priors = vec![
            LabeledPrior { label: "IGP".into(), prior: independent(false) },
            LabeledPrior { label: "ImP".into(), prior: FitPrior::Conjugate { spec: PriorSpec::Improper } },
        ];
        let rows = run_study(&c).unwrap();
        for (k, (prior, id)) in series.iter().enumerate() {
            let widths: Vec<f64> = rows
                .iter()
                .filter(|r| r.prior == *prior && r.parameter == *id)
                .map(|r| r.ci_high - r.ci_low)
                .collect();
            for (i, w) in widths.windows(2).enumerate() {
                votes[k * 5 + i] += (w[1] < w[0]) as usize;
            }
        }
    }
    assert!(votes.iter().all(|&v| v > 5), "votes per comparison out of 10: {votes:?}");
}
