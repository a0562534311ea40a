//! One dataset in, posterior summaries out: dispatches to the closed-form,
//! quadrature, or HARM route depending on the prior and model variant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conjugate::{posterior_theta1, posterior_theta3, predictive_x, predictive_y, summarize, PriorSpec};
use crate::distributions::{BivariateSample, LomaxParams, ModelVariant};
use crate::error::{Error, Result};
use crate::harm::{run_chain, summarize_chain, ChainConfig};
use crate::likelihood::{mle, MleOptions, MleResult};
use crate::posterior::{free_parameters, FitPrior, PosteriorTarget};
use crate::pseudo_gamma::{marginal_theta1, marginal_theta3};
use crate::quadrature::QuadConfig;
use crate::rng::{derive_seed, label};
use crate::summary::{ParameterId, PosteriorSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Quadrature,
    Harm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Quadrature => "quadrature",
            Method::Harm => "harm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Method::Analytic),
            "quadrature" => Ok(Method::Quadrature),
            "harm" => Ok(Method::Harm),
            other => Err(Error::Domain(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub kept_draws: usize,
    pub thinning: usize,
    pub burn_in: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings {
            kept_draws: 10_000,
            thinning: 10,
            burn_in: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub method: Method,
    pub level: f64,
    pub chain: ChainSettings,
    pub seed: u64,
    pub quadrature: QuadConfig,
    pub mle: MleOptions,
}

impl FitOptions {
    pub fn new(method: Method, seed: u64) -> Self {
        FitOptions {
            method,
            level: 0.95,
            chain: ChainSettings::default(),
            seed,
            quadrature: QuadConfig::default(),
            mle: MleOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterFit {
    pub parameter: ParameterId,
    pub summary: PosteriorSummary,
    /// HARM only.
    pub mc_standard_error: Option<f64>,
    /// HARM only.
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveLaws {
    pub x: LomaxParams,
    pub y: LomaxParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub settings: ChainSettings,
    pub acceptance_rate: f64,
    pub step_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub variant: ModelVariant,
    pub prior: FitPrior,
    pub method: Method,
    pub n: usize,
    pub level: f64,
    pub parameters: Vec<ParameterFit>,
    pub mle: MleResult,
    pub predictive: Option<PredictiveLaws>,
    pub chain: Option<ChainReport>,
}

impl Fit {
    pub fn parameter(&self, id: ParameterId) -> Option<&ParameterFit> {
        self.parameters.iter().find(|p| p.parameter == id)
    }
}

/// Rejects method/prior/variant combinations the chosen route cannot handle.
pub fn check_compatible(variant: ModelVariant, prior: &FitPrior, method: Method) -> Result<()> {
    match (method, prior) {
        (Method::Analytic, FitPrior::Conjugate { .. }) if variant.is_sub_model() => Ok(()),
        (Method::Analytic, _) => Err(Error::Incompatible(format!(
            "analytic fitting needs a sub-model with an independent gamma or improper prior \
             (got {variant} with prior `{}`)",
            prior.kind()
        ))),
        (Method::Quadrature, FitPrior::Pseudo { prior: p, .. })
            if variant.is_sub_model() && p.is_simple() =>
        {
            Ok(())
        }
        (Method::Quadrature, _) => Err(Error::Incompatible(format!(
            "quadrature needs a sub-model with a pseudo-gamma prior whose psi2 = 0 \
             (got {variant} with prior `{}`)",
            prior.kind()
        ))),
        (Method::Harm, _) => Ok(()),
    }
}

fn conjugate_predictive(
    spec: &PriorSpec,
    sample: &BivariateSample,
    variant: ModelVariant,
) -> Result<PredictiveLaws> {
    let stats = sample.stats();
    Ok(PredictiveLaws {
        x: predictive_x(&posterior_theta1(spec, &stats)?)?,
        y: predictive_y(&posterior_theta3(spec, &stats, variant)?, variant)?,
    })
}

pub fn fit(
    sample: &BivariateSample,
    variant: ModelVariant,
    prior: &FitPrior,
    options: &FitOptions,
) -> Result<Fit> {
    check_compatible(variant, prior, options.method)?;
    let params = free_parameters(variant);
    let mut chain = None;
    let parameters: Vec<ParameterFit> = match (options.method, prior) {
        (Method::Analytic, FitPrior::Conjugate { spec }) => {
            let stats = sample.stats();
            let posts = [
                posterior_theta1(spec, &stats)?,
                posterior_theta3(spec, &stats, variant)?,
            ];
            posts
                .iter()
                .map(|post| {
                    Ok(ParameterFit {
                        parameter: post.parameter,
                        summary: summarize(post, options.level)?,
                        mc_standard_error: None,
                        ess: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        (Method::Quadrature, FitPrior::Pseudo { prior: p, .. }) => {
            let m1 = marginal_theta1(p, sample, variant, &options.quadrature)?;
            let m3 = marginal_theta3(p, sample, variant, &options.quadrature)?;
            [(ParameterId::Theta1, m1), (ParameterId::Theta3, m3)]
                .iter()
                .map(|(id, m)| {
                    Ok(ParameterFit {
                        parameter: *id,
                        summary: m.summarize(options.level)?,
                        mc_standard_error: None,
                        ess: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        (Method::Harm, _) => {
            let target = PosteriorTarget::new(sample, variant, *prior)?;
            let settings = options.chain;
            let mut config = ChainConfig::new(
                target.initial_point(),
                derive_seed(options.seed, &[label("harm")]),
            );
            config.burn_in = settings.burn_in;
            config.thinning = settings.thinning;
            let config = config.with_kept_draws(settings.kept_draws);
            let result = run_chain(&target, &config)?;
            let summaries = summarize_chain(&result, options.level)?;
            let se = result.mc_standard_errors();
            let out = params
                .iter()
                .enumerate()
                .map(|(j, id)| ParameterFit {
                    parameter: *id,
                    summary: summaries[j],
                    mc_standard_error: Some(se[j]),
                    ess: Some(result.ess[j]),
                })
                .collect();
            chain = Some(ChainReport {
                settings,
                acceptance_rate: result.acceptance_rate,
                step_scale: result.step_scale.clone(),
            });
            out
        }
        _ => unreachable!("rejected by check_compatible"),
    };
    let predictive = match prior {
        FitPrior::Conjugate { spec } if variant.is_sub_model() => {
            Some(conjugate_predictive(spec, sample, variant)?)
        }
        _ => None,
    };
    Ok(Fit {
        variant,
        prior: *prior,
        method: options.method,
        n: sample.len(),
        level: options.level,
        parameters,
        mle: mle(sample, variant, &options.mle),
        predictive,
        chain,
    })
}
