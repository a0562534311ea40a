//! Exact gamma posteriors under independent gamma (or improper) priors, and
//! the Lomax posterior-predictive laws they imply.
//!
//! Each rate that enters the likelihood as `θ^n e^{-θ S}` is updated from
//! `Γ(α, β)` to `Γ(α + n, β + S)`:
//!
//! | rate | model | statistic `S` |
//! |------|-------|---------------|
//! | `θ1` | any | `Σx` |
//! | `θ3` | sub-model I | `Σy + Σxy` |
//! | `θ3` | sub-model II | `Σxy` |
//!
//! The improper prior is the `α = β = 0` limit, under which the posterior mean
//! `n / S` is the maximum-likelihood estimate.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    gamma_cdf, gamma_quantile, GammaParams, LomaxParams, ModelVariant, SufficientStats,
};
use crate::error::{Error, Result};
use crate::summary::{check_level, ParameterId, PosteriorSummary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    /// Independent gamma priors. `theta2` is only consulted by the full model.
    IndependentGamma {
        theta1: GammaParams,
        theta2: Option<GammaParams>,
        theta3: GammaParams,
    },
    /// Limit `α = β = 0` of every gamma component.
    Improper,
}

impl PriorSpec {
    /// `(shape, rate)` of the component for `parameter`; `(0, 0)` when improper.
    fn component(&self, parameter: ParameterId) -> Result<(f64, f64)> {
        match (self, parameter) {
            (PriorSpec::Improper, _) => Ok((0.0, 0.0)),
            (PriorSpec::IndependentGamma { theta1, .. }, ParameterId::Theta1) => {
                Ok((theta1.shape, theta1.rate))
            }
            (PriorSpec::IndependentGamma { theta3, .. }, ParameterId::Theta3) => {
                Ok((theta3.shape, theta3.rate))
            }
            (PriorSpec::IndependentGamma { theta2, .. }, ParameterId::Theta2) => theta2
                .map(|g| (g.shape, g.rate))
                .ok_or_else(|| Error::Incompatible("no gamma prior given for theta2".into())),
        }
    }
}

/// Gamma posterior of one rate parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPosterior {
    pub shape: f64,
    pub rate: f64,
    pub parameter: ParameterId,
}

impl GammaPosterior {
    pub fn gamma(&self) -> GammaParams {
        GammaParams {
            shape: self.shape,
            rate: self.rate,
        }
    }

    /// Squared-error-loss Bayes estimate.
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// The posterior as an independent-gamma prior component for further updates.
    pub fn as_prior(&self) -> GammaParams {
        self.gamma()
    }
}

fn update(
    prior: &PriorSpec,
    parameter: ParameterId,
    n: usize,
    statistic: f64,
) -> Result<GammaPosterior> {
    let (shape0, rate0) = prior.component(parameter)?;
    let shape = shape0 + n as f64;
    let rate = rate0 + statistic;
    if !(shape > 0.0 && rate > 0.0) {
        return Err(Error::ImproperPosterior(format!(
            "{parameter} posterior Γ({shape}, {rate}) needs at least one observation \
             and a positive statistic under the improper prior"
        )));
    }
    Ok(GammaPosterior {
        shape,
        rate,
        parameter,
    })
}

/// `Γ(α1 + n, β1 + Σx)`; valid for every model variant.
pub fn posterior_theta1(prior: &PriorSpec, stats: &SufficientStats) -> Result<GammaPosterior> {
    update(prior, ParameterId::Theta1, stats.n, stats.sum_x)
}

/// Sub-model I: `Γ(α3 + n, β3 + Σy + Σxy)`.
pub fn posterior_theta3_sub1(prior: &PriorSpec, stats: &SufficientStats) -> Result<GammaPosterior> {
    update(prior, ParameterId::Theta3, stats.n, stats.sum_y + stats.sum_xy)
}

/// Sub-model II: `Γ(α3 + n, β3 + Σxy)`.
pub fn posterior_theta3_sub2(prior: &PriorSpec, stats: &SufficientStats) -> Result<GammaPosterior> {
    update(prior, ParameterId::Theta3, stats.n, stats.sum_xy)
}

/// Dispatches to the `θ3` update for a sub-model.
pub fn posterior_theta3(
    prior: &PriorSpec,
    stats: &SufficientStats,
    variant: ModelVariant,
) -> Result<GammaPosterior> {
    match variant {
        ModelVariant::SubModelI => posterior_theta3_sub1(prior, stats),
        ModelVariant::SubModelII => posterior_theta3_sub2(prior, stats),
        ModelVariant::Full => Err(Error::Incompatible(
            "the full-model (theta2, theta3) posterior has no closed form".into(),
        )),
    }
}

/// Log posterior kernel of `(θ2, θ3)` in the full model:
/// `Σ ln(θ2 + θ3 x_i) + (α2 - 1) ln θ2 + (α3 - 1) ln θ3 - θ2 (β2 + Σy) - θ3 (β3 + Σxy)`.
///
/// `data` may be empty, in which case this is the prior kernel.
pub fn full_model_theta23_kernel(
    prior: &PriorSpec,
    data: &[(f64, f64)],
    theta2: f64,
    theta3: f64,
) -> Result<f64> {
    if !(theta2 >= 0.0 && theta3 >= 0.0) || theta2 + theta3 <= 0.0 {
        return Err(Error::Domain(format!(
            "(theta2, theta3) = ({theta2}, {theta3}) outside the closed quadrant minus the origin"
        )));
    }
    let (a2, b2) = prior.component(ParameterId::Theta2)?;
    let (a3, b3) = prior.component(ParameterId::Theta3)?;
    let log_power = |shape: f64, value: f64, name: &str| -> Result<f64> {
        if value > 0.0 {
            Ok((shape - 1.0) * value.ln())
        } else if shape > 1.0 {
            Ok(f64::NEG_INFINITY)
        } else if shape == 1.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!("kernel diverges at {name} = 0 (shape {shape} < 1)")))
        }
    };
    let mut acc = log_power(a2, theta2, "theta2")? + log_power(a3, theta3, "theta3")?;
    let (mut sum_y, mut sum_xy) = (0.0, 0.0);
    for &(x, y) in data {
        acc += (theta2 + theta3 * x).ln();
        sum_y += y;
        sum_xy += x * y;
    }
    Ok(acc - theta2 * (b2 + sum_y) - theta3 * (b3 + sum_xy))
}

/// Predictive law of a new `x`: `Lomax(α1 + n, β1 + Σx)`.
pub fn predictive_x(posterior: &GammaPosterior) -> Result<LomaxParams> {
    if posterior.parameter != ParameterId::Theta1 {
        return Err(Error::Incompatible(format!(
            "x-predictive needs the theta1 posterior, got {}",
            posterior.parameter
        )));
    }
    LomaxParams::new(posterior.shape, posterior.rate)
}

/// Predictive law built from the `θ3` posterior of a sub-model: the gamma
/// mixture of `θ3 e^{-θ3 t}`, i.e. `Lomax(shape, rate)` of that posterior.
pub fn predictive_y(posterior: &GammaPosterior, variant: ModelVariant) -> Result<LomaxParams> {
    if posterior.parameter != ParameterId::Theta3 || !variant.is_sub_model() {
        return Err(Error::Incompatible(format!(
            "y-predictive needs a sub-model theta3 posterior, got {} under {variant}",
            posterior.parameter
        )));
    }
    LomaxParams::new(posterior.shape, posterior.rate)
}

/// Mean, variance, and equal-tail interval of a gamma posterior.
pub fn summarize(posterior: &GammaPosterior, level: f64) -> Result<PosteriorSummary> {
    let level = check_level(level)?;
    let g = posterior.gamma();
    Ok(PosteriorSummary {
        mean: g.mean(),
        variance: g.variance(),
        ci_low: gamma_quantile(&g, 0.5 * (1.0 - level))?,
        ci_high: gamma_quantile(&g, 0.5 * (1.0 + level))?,
        level,
    })
}

/// Posterior mass inside `[lo, hi]`.
pub fn interval_mass(posterior: &GammaPosterior, lo: f64, hi: f64) -> f64 {
    let g = posterior.gamma();
    gamma_cdf(&g, hi) - gamma_cdf(&g, lo)
}
