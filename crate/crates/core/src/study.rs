//! Seeded simulation study: for each sample size, simulate data, fit every
//! configured prior, and tabulate posterior means and equal-tail intervals.

use std::path::Path;

use rayon::prelude::*;

use crate::conjugate::PriorSpec;
use crate::distributions::{sample_bivariate, BivariateSample, GammaParams, ModelVariant, PseudoExpParams};
use crate::error::{Error, Result};
use crate::fit::{fit, ChainSettings, FitOptions, Method};
use crate::io::{sig17, write_atomic};
use crate::posterior::{free_parameters, FitPrior};
use crate::pseudo_gamma::PseudoGammaPrior;
use crate::rng::{derive_seed, label, seeded};
use crate::summary::ParameterId;

pub const STUDY_HEADER: &str = "n,parameter,prior,mean,ci_low,ci_high";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPrior {
    pub label: String,
    pub prior: FitPrior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub variant: ModelVariant,
    pub true_params: PseudoExpParams,
    pub sample_sizes: Vec<usize>,
    pub priors: Vec<LabeledPrior>,
    /// Independent datasets per sample size; cell values are averaged over them.
    pub replications: usize,
    pub chain: ChainSettings,
    pub level: f64,
    pub seed: u64,
}

pub const DEFAULT_SAMPLE_SIZES: [usize; 6] = [20, 30, 50, 100, 200, 500];

/// Independent gamma with `α1=2, β1=2, α3=4, β3=5` (and `α2=3, β2=1` for the
/// full model), the improper prior, and three pseudo-gamma priors with
/// `τ1=2, τ2=4, ψ1=2, ψ3=3` and `ψ2 ∈ {1, 0, 7}`.
pub fn default_priors(variant: ModelVariant) -> Vec<LabeledPrior> {
    let g = |a, b| GammaParams::new(a, b).expect("valid defaults");
    let theta2 = (variant == ModelVariant::Full).then(|| g(3.0, 1.0));
    let mut out = vec![
        LabeledPrior {
            label: "IGP".into(),
            prior: FitPrior::Conjugate {
                spec: PriorSpec::IndependentGamma {
                    theta1: g(2.0, 2.0),
                    theta2,
                    theta3: g(4.0, 5.0),
                },
            },
        },
        LabeledPrior {
            label: "ImP".into(),
            prior: FitPrior::Conjugate {
                spec: PriorSpec::Improper,
            },
        },
    ];
    for (i, psi2) in [1.0, 0.0, 7.0].into_iter().enumerate() {
        out.push(LabeledPrior {
            label: format!("PGP{}", i + 1),
            prior: FitPrior::Pseudo {
                prior: PseudoGammaPrior::new(2.0, 4.0, 2.0, psi2, 3.0).expect("valid defaults"),
                theta2,
            },
        });
    }
    out
}

/// `(θ1, θ3) = (2, 3)`, plus `θ2 = 1` for the full model.
pub fn default_true_params(variant: ModelVariant) -> PseudoExpParams {
    match variant {
        ModelVariant::Full => PseudoExpParams::new(2.0, 1.0, 3.0),
        ModelVariant::SubModelI => PseudoExpParams::sub_model_one(2.0, 3.0),
        ModelVariant::SubModelII => PseudoExpParams::sub_model_two(2.0, 3.0),
    }
    .expect("valid defaults")
}

impl StudyConfig {
    pub fn new(variant: ModelVariant, seed: u64) -> Self {
        StudyConfig {
            variant,
            true_params: default_true_params(variant),
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            priors: default_priors(variant),
            replications: 1,
            chain: ChainSettings::default(),
            level: 0.95,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(m.to_string()));
        if self.sample_sizes.is_empty() {
            return bad("sample_sizes must not be empty");
        }
        if self.sample_sizes.contains(&0) {
            return bad("every sample size must be at least 1");
        }
        if self.priors.is_empty() {
            return bad("the prior list must not be empty");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        self.variant.check(&self.true_params)
    }
}

/// One table cell. Failed fits carry NaN values and a note.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub parameter: ParameterId,
    pub prior: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub note: Option<String>,
}

/// Closed form for conjugate priors on a sub-model, HARM everywhere else.
pub fn study_method(variant: ModelVariant, prior: &FitPrior) -> Method {
    match prior {
        FitPrior::Conjugate { .. } if variant.is_sub_model() => Method::Analytic,
        _ => Method::Harm,
    }
}

type CellSummary = Vec<(ParameterId, f64, f64, f64)>;

fn fit_cell(
    config: &StudyConfig,
    sample: &BivariateSample,
    prior: &FitPrior,
    seed: u64,
) -> Result<CellSummary> {
    let mut options = FitOptions::new(study_method(config.variant, prior), seed);
    options.chain = config.chain;
    options.level = config.level;
    let f = fit(sample, config.variant, prior, &options)?;
    Ok(f.parameters
        .iter()
        .map(|p| (p.parameter, p.summary.mean, p.summary.ci_low, p.summary.ci_high))
        .collect())
}

/// Rows ordered by `(n, parameter, prior)` with priors in configuration
/// order. Cells run in parallel; each draws from its own derived seed, so the
/// output does not depend on scheduling.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    config.validate()?;
    let reps = config.replications;
    let datasets: Vec<BivariateSample> = (0..config.sample_sizes.len() * reps)
        .into_par_iter()
        .map(|k| {
            let n = config.sample_sizes[k / reps];
            let seed = derive_seed(config.seed, &[label("data"), n as u64, (k % reps) as u64]);
            sample_bivariate(&config.true_params, config.variant, n, &mut seeded(seed))
        })
        .collect::<Result<_>>()?;

    let n_priors = config.priors.len();
    let cells: Vec<Result<CellSummary>> = (0..datasets.len() * n_priors)
        .into_par_iter()
        .map(|k| {
            let (d, j) = (k / n_priors, k % n_priors);
            let n = config.sample_sizes[d / reps] as u64;
            let seed = derive_seed(config.seed, &[label("fit"), n, (d % reps) as u64, j as u64]);
            fit_cell(config, &datasets[d], &config.priors[j].prior, seed)
        })
        .collect();

    let params = free_parameters(config.variant);
    let mut rows = Vec::with_capacity(config.sample_sizes.len() * params.len() * n_priors);
    for (i, &n) in config.sample_sizes.iter().enumerate() {
        for (pi, &param) in params.iter().enumerate() {
            for (j, lp) in config.priors.iter().enumerate() {
                let mut acc = [0.0; 3];
                let mut note = None;
                for r in 0..reps {
                    match &cells[(i * reps + r) * n_priors + j] {
                        Ok(s) => {
                            let (_, m, lo, hi) = s[pi];
                            acc[0] += m;
                            acc[1] += lo;
                            acc[2] += hi;
                        }
                        Err(e) => {
                            note.get_or_insert_with(|| e.to_string());
                        }
                    }
                }
                let k = reps as f64;
                let [mean, ci_low, ci_high] = match note {
                    Some(_) => [f64::NAN; 3],
                    None => acc.map(|v| v / k),
                };
                rows.push(StudyRow {
                    n,
                    parameter: param,
                    prior: lp.label.clone(),
                    mean,
                    ci_low,
                    ci_high,
                    note,
                });
            }
        }
    }
    Ok(rows)
}

pub fn study_to_csv(rows: &[StudyRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Domain("no study rows to export".into()));
    }
    let mut out = String::from(STUDY_HEADER);
    out.push('\n');
    for r in rows {
        if r.prior.contains([',', '"', '\n']) {
            return Err(Error::Domain(format!("prior label `{}` is not CSV-safe", r.prior)));
        }
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.parameter,
            r.prior,
            sig17(r.mean),
            sig17(r.ci_low),
            sig17(r.ci_high)
        ));
    }
    Ok(out)
}

/// Writes the study table atomically; nothing is written when `rows` is empty.
pub fn export_study(rows: &[StudyRow], destination: &Path) -> Result<()> {
    let text = study_to_csv(rows)?;
    write_atomic(destination, text.as_bytes())
}

/// Reads a table written by [`export_study`]. Notes are not stored in the
/// table and come back as `None`.
pub fn parse_study(text: &str) -> Result<Vec<StudyRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    if reader.headers()?.iter().collect::<Vec<_>>().join(",") != STUDY_HEADER {
        return Err(Error::Domain(format!("study table header must be `{STUDY_HEADER}`")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Domain(format!("`{s}` is not a number")))
    };
    reader
        .records()
        .map(|rec| {
            let r = rec?;
            Ok(StudyRow {
                n: r[0]
                    .parse()
                    .map_err(|_| Error::Domain(format!("`{}` is not a count", &r[0])))?,
                parameter: r[1].parse()?,
                prior: r[2].to_string(),
                mean: num(&r[3])?,
                ci_low: num(&r[4])?,
                ci_high: num(&r[5])?,
                note: None,
            })
        })
        .collect()
}
