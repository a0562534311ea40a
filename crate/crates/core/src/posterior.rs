//! Posterior log-targets over the free rates of a model variant, used as HARM
//! targets and as the common entry point for fitting.

use serde::{Deserialize, Serialize};

use crate::conjugate::PriorSpec;
use crate::distributions::{BivariateSample, GammaParams, ModelVariant, PseudoExpParams};
use crate::error::{Error, Result};
use crate::harm::LogTarget;
use crate::likelihood::{log_likelihood, mle, MleOptions};
use crate::pseudo_gamma::{general_posterior_log_kernel, PseudoGammaPrior};
use crate::summary::ParameterId;

/// Any prior the fitting pipeline accepts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FitPrior {
    Conjugate { spec: PriorSpec },
    /// Pseudo-gamma prior on `(θ1, θ3)`; the full model adds an independent
    /// gamma prior on `θ2`.
    Pseudo {
        prior: PseudoGammaPrior,
        theta2: Option<GammaParams>,
    },
}

impl FitPrior {
    pub fn kind(&self) -> &'static str {
        match self {
            FitPrior::Conjugate {
                spec: PriorSpec::IndependentGamma { .. },
            } => "independent",
            FitPrior::Conjugate {
                spec: PriorSpec::Improper,
            } => "improper",
            FitPrior::Pseudo { .. } => "pseudo",
        }
    }
}

/// Rates sampled for a variant, in coordinate order.
pub fn free_parameters(variant: ModelVariant) -> &'static [ParameterId] {
    match variant {
        ModelVariant::Full => &[ParameterId::Theta1, ParameterId::Theta2, ParameterId::Theta3],
        _ => &[ParameterId::Theta1, ParameterId::Theta3],
    }
}

/// Maps a coordinate vector to the full parameter triple.
pub fn params_from_point(variant: ModelVariant, point: &[f64]) -> Option<PseudoExpParams> {
    let p = match variant {
        ModelVariant::Full => PseudoExpParams::new(point[0], point[1], point[2]),
        ModelVariant::SubModelI => PseudoExpParams::sub_model_one(point[0], point[1]),
        ModelVariant::SubModelII => PseudoExpParams::sub_model_two(point[0], point[1]),
    };
    p.ok()
}

fn gamma_log_kernel(shape: f64, rate: f64, value: f64) -> f64 {
    (shape - 1.0) * value.ln() - rate * value
}

/// Log posterior kernel over the free rates of `variant`.
pub struct PosteriorTarget<'a> {
    sample: &'a BivariateSample,
    variant: ModelVariant,
    prior: FitPrior,
}

impl<'a> PosteriorTarget<'a> {
    pub fn new(sample: &'a BivariateSample, variant: ModelVariant, prior: FitPrior) -> Result<Self> {
        match (&prior, variant) {
            (
                FitPrior::Conjugate {
                    spec: PriorSpec::Improper,
                },
                ModelVariant::Full,
            ) => {
                return Err(Error::ImproperPosterior(
                    "under the improper prior the full-model (theta2, theta3) posterior \
                     has infinite mass near each axis"
                        .into(),
                ))
            }
            (
                FitPrior::Conjugate {
                    spec: PriorSpec::IndependentGamma { theta2: None, .. },
                },
                ModelVariant::Full,
            )
            | (FitPrior::Pseudo { theta2: None, .. }, ModelVariant::Full) => {
                return Err(Error::Incompatible(
                    "the full model needs a gamma prior for theta2".into(),
                ))
            }
            _ => {}
        }
        Ok(PosteriorTarget {
            sample,
            variant,
            prior,
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    fn evaluate(&self, point: &[f64]) -> Result<f64> {
        let theta = params_from_point(self.variant, point)
            .ok_or_else(|| Error::Domain("point outside the parameter space".into()))?;
        match &self.prior {
            FitPrior::Pseudo { prior, theta2 } => general_posterior_log_kernel(
                prior,
                theta2.as_ref(),
                self.sample,
                self.variant,
                &theta,
            ),
            FitPrior::Conjugate { spec } => {
                let ll = log_likelihood(self.sample, &theta, self.variant)?.total();
                let lp = match spec {
                    PriorSpec::Improper => point.iter().map(|v| -v.ln()).sum(),
                    PriorSpec::IndependentGamma {
                        theta1,
                        theta2,
                        theta3,
                    } => {
                        let mut acc = gamma_log_kernel(theta1.shape, theta1.rate, theta.theta1)
                            + gamma_log_kernel(theta3.shape, theta3.rate, theta.theta3);
                        if self.variant == ModelVariant::Full {
                            let g = theta2.expect("checked in constructor");
                            acc += gamma_log_kernel(g.shape, g.rate, theta.theta2);
                        }
                        acc
                    }
                };
                Ok(ll + lp)
            }
        }
    }

    /// Variant MLE with zero coordinates nudged inside the orthant, falling
    /// back to the vector of ones when the target is not finite there.
    pub fn initial_point(&self) -> Vec<f64> {
        let m = mle(self.sample, self.variant, &MleOptions::default());
        let raw: Vec<f64> = match self.variant {
            ModelVariant::Full => vec![m.params.theta1, m.params.theta2, m.params.theta3],
            _ => vec![m.params.theta1, m.params.theta3],
        };
        let floor = 1e-2 * raw.iter().cloned().fold(0.0, f64::max);
        let nudged: Vec<f64> = raw.iter().map(|&v| if v > 0.0 { v } else { floor }).collect();
        if nudged.iter().all(|v| *v > 0.0 && v.is_finite()) && self.log_density(&nudged).is_finite() {
            nudged
        } else {
            vec![1.0; self.dim()]
        }
    }
}

impl LogTarget for PosteriorTarget<'_> {
    fn dim(&self) -> usize {
        free_parameters(self.variant).len()
    }

    fn log_density(&self, point: &[f64]) -> f64 {
        self.evaluate(point).unwrap_or(f64::NEG_INFINITY)
    }
}
