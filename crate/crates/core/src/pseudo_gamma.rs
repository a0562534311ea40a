//! Dependent ("pseudo-gamma") priors on `(θ1, θ3)` and their posteriors.
//!
//! The prior takes `θ3 ~ Γ(τ1, ψ1)` and `θ1 | θ3 ~ Γ(τ2, ψ2 + ψ3 θ3)`. With
//! `ψ2 = 0` the sub-model posteriors have one-dimensional marginals of the form
//!
//! ```text
//! θ^(a-1) e^(-b θ) (c + d θ)^(-m)
//! ```
//!
//! which are normalized, summarized, and inverted by adaptive quadrature on
//! `(0, T)`. For `ψ2 > 0` only the joint kernel is provided; it is sampled with
//! HARM.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::distributions::{BivariateSample, GammaParams, ModelVariant, PseudoExpParams};
use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::likelihood::log_likelihood;
use crate::quadrature::{gauss_kronrod, integrate_with_breakpoints, Panel, QuadConfig};
use crate::summary::{check_level, ParameterId, PosteriorSummary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoGammaPrior {
    pub tau1: f64,
    pub tau2: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
}

impl PseudoGammaPrior {
    pub fn new(tau1: f64, tau2: f64, psi1: f64, psi2: f64, psi3: f64) -> Result<Self> {
        Ok(PseudoGammaPrior {
            tau1: require_positive("tau1", tau1)?,
            tau2: require_positive("tau2", tau2)?,
            psi1: require_positive("psi1", psi1)?,
            psi2: require_nonnegative("psi2", psi2)?,
            psi3: require_positive("psi3", psi3)?,
        })
    }

    /// `ψ2 = 0`
    pub fn is_simple(&self) -> bool {
        self.psi2 == 0.0
    }
}

fn require_open_quadrant(theta1: f64, theta3: f64) -> Result<()> {
    if theta1 > 0.0 && theta3 > 0.0 && theta1.is_finite() && theta3.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "(theta1, theta3) = ({theta1}, {theta3}) must be positive"
        )))
    }
}

/// `τ2 ln(ψ2 + ψ3 θ3) + (τ2 - 1) ln θ1 - (ψ2 + ψ3 θ3) θ1 + (τ1 - 1) ln θ3 - ψ1 θ3`
pub fn prior_log_kernel(prior: &PseudoGammaPrior, theta1: f64, theta3: f64) -> Result<f64> {
    require_open_quadrant(theta1, theta3)?;
    let rate1 = prior.psi2 + prior.psi3 * theta3;
    Ok(prior.tau2 * rate1.ln() + (prior.tau2 - 1.0) * theta1.ln() - rate1 * theta1
        + (prior.tau1 - 1.0) * theta3.ln()
        - prior.psi1 * theta3)
}

/// Normalized log density of the prior: `θ3 ~ Γ(τ1, ψ1)` and
/// `θ1 | θ3 ~ Γ(τ2, ψ2 + ψ3 θ3)`.
pub fn prior_log_density(prior: &PseudoGammaPrior, theta1: f64, theta3: f64) -> Result<f64> {
    Ok(prior_log_kernel(prior, theta1, theta3)? + prior.tau1 * prior.psi1.ln()
        - ln_gamma(prior.tau1)
        - ln_gamma(prior.tau2))
}

/// The `θ3` rate statistic `C`: `ψ1 + Σy + Σxy` (sub-model I) or `ψ1 + Σxy` (sub-model II).
fn theta3_rate(prior: &PseudoGammaPrior, sample: &BivariateSample, variant: ModelVariant) -> Result<f64> {
    match variant {
        ModelVariant::SubModelI => Ok(prior.psi1 + sample.sum_y() + sample.sum_xy()),
        ModelVariant::SubModelII => Ok(prior.psi1 + sample.sum_xy()),
        ModelVariant::Full => Err(Error::Incompatible(
            "closed-form pseudo-gamma posteriors exist only for sub-models".into(),
        )),
    }
}

fn require_simple(prior: &PseudoGammaPrior) -> Result<()> {
    if prior.is_simple() {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "marginal posteriors need psi2 = 0 (got {}); sample the joint kernel instead",
            prior.psi2
        )))
    }
}

/// Joint posterior log-kernel of `(θ1, θ3)` for a sub-model under the `ψ2 = 0`
/// prior:
/// `(τ2 + n - 1) ln θ1 - θ1 (Σx + ψ3 θ3) + (τ1 + τ2 + n - 1) ln θ3 - C θ3`.
///
/// `sample = None` gives the prior kernel.
pub fn posterior_log_kernel(
    prior: &PseudoGammaPrior,
    sample: Option<&BivariateSample>,
    variant: ModelVariant,
    theta1: f64,
    theta3: f64,
) -> Result<f64> {
    require_simple(prior)?;
    require_open_quadrant(theta1, theta3)?;
    let (n, sum_x, c) = match sample {
        Some(s) => (s.n(), s.sum_x(), theta3_rate(prior, s, variant)?),
        None => {
            if !variant.is_sub_model() {
                return Err(Error::Incompatible(
                    "closed-form pseudo-gamma posteriors exist only for sub-models".into(),
                ));
            }
            (0.0, 0.0, prior.psi1)
        }
    };
    Ok((prior.tau2 + n - 1.0) * theta1.ln() - theta1 * (sum_x + prior.psi3 * theta3)
        + (prior.tau1 + prior.tau2 + n - 1.0) * theta3.ln()
        - c * theta3)
}

/// Pseudo-gamma prior on `(θ1, θ3)` (any `ψ2`) plus the log-likelihood of the
/// variant. For the full model an independent gamma prior on `θ2` is required.
pub fn general_posterior_log_kernel(
    prior: &PseudoGammaPrior,
    theta2_prior: Option<&GammaParams>,
    sample: &BivariateSample,
    variant: ModelVariant,
    theta: &PseudoExpParams,
) -> Result<f64> {
    let mut value = prior_log_kernel(prior, theta.theta1, theta.theta3)?
        + log_likelihood(sample, theta, variant)?.total();
    if variant == ModelVariant::Full {
        let g = theta2_prior.ok_or_else(|| {
            Error::Incompatible("the full model needs a gamma prior for theta2".into())
        })?;
        value += if theta.theta2 > 0.0 {
            (g.shape - 1.0) * theta.theta2.ln() - g.rate * theta.theta2
        } else if g.shape > 1.0 {
            f64::NEG_INFINITY
        } else if g.shape == 1.0 {
            0.0
        } else {
            return Err(Error::Domain("theta2 prior kernel diverges at 0".into()));
        };
    }
    Ok(value)
}

/// Unnormalized density `θ^(a-1) e^(-b θ) (c + d θ)^(-m)` on `θ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRatioKernel {
    pub power: f64,
    pub rate: f64,
    pub offset: f64,
    pub slope: f64,
    pub exponent: f64,
}

impl GammaRatioKernel {
    pub fn ln_value(&self, theta: f64) -> f64 {
        if !(theta > 0.0) {
            return f64::NEG_INFINITY;
        }
        (self.power - 1.0) * theta.ln()
            - self.rate * theta
            - self.exponent * (self.offset + self.slope * theta).ln()
    }

    /// `ln` of the gamma envelope `θ^(a-1) e^(-b θ) c^(-m)`, which dominates the kernel.
    pub fn ln_envelope(&self, theta: f64) -> f64 {
        (self.power - 1.0) * theta.ln() - self.rate * theta - self.exponent * self.offset.ln()
    }

    /// Positive stationary point, the root of
    /// `b d θ² + (b c + m d - (a - 1) d) θ - (a - 1) c = 0`.
    fn mode(&self) -> f64 {
        let (a, b, c, d, m) = (self.power, self.rate, self.offset, self.slope, self.exponent);
        if a <= 1.0 {
            return 0.0;
        }
        if d == 0.0 {
            return (a - 1.0) / b;
        }
        let qa = b * d;
        let qb = b * c + m * d - (a - 1.0) * d;
        let qc = -(a - 1.0) * c;
        // Numerically stable positive root.
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        if qb >= 0.0 {
            -2.0 * qc / (qb + disc)
        } else {
            (-qb + disc) / (2.0 * qa)
        }
    }

    fn curvature(&self, theta: f64) -> f64 {
        let denom = self.offset + self.slope * theta;
        (self.power - 1.0) / (theta * theta) - self.exponent * self.slope * self.slope / (denom * denom)
    }
}

/// One-dimensional marginal posterior normalized by quadrature.
#[derive(Debug, Clone)]
pub struct MarginalPosterior {
    parameter: ParameterId,
    kernel: GammaRatioKernel,
    log_scale: f64,
    normalizer: f64,
    mean: f64,
    variance: f64,
    upper: f64,
    panels: Vec<Panel>,
    cumulative: Vec<f64>,
}

impl MarginalPosterior {
    /// Normalizes `kernel` on `(0, T)`, with `T` far enough out that the gamma
    /// envelope's tail beyond it is below `1e-12` of the mass.
    pub fn from_kernel(
        parameter: ParameterId,
        kernel: GammaRatioKernel,
        config: &QuadConfig,
    ) -> Result<Self> {
        let k = kernel;
        if !(k.power > 0.0 && k.rate > 0.0 && k.offset > 0.0 && k.slope >= 0.0 && k.exponent >= 0.0)
        {
            return Err(Error::Quadrature(format!("kernel {k:?} is not integrable")));
        }
        let mode = k.mode();
        let spread = if mode > 0.0 && k.curvature(mode) > 0.0 {
            1.0 / k.curvature(mode).sqrt()
        } else {
            k.power.sqrt() / k.rate
        };
        let anchor = if mode > 0.0 { mode } else { spread };
        let log_scale = k.ln_value(anchor);
        // Laplace-style estimate of the scaled mass.
        let mass_guess = (spread * (2.0 * std::f64::consts::PI).sqrt()).ln();

        let log_tail = |t: f64| {
            let q = gamma_ur(k.power, k.rate * t);
            -k.exponent * k.offset.ln() + ln_gamma(k.power) - k.power * k.rate.ln() + q.ln()
                - log_scale
        };
        let mut upper = anchor + 10.0 * spread;
        let mut guard = 0;
        while log_tail(upper) - mass_guess > (1e-12f64).ln() {
            upper += 2.0 * spread.max(upper * 0.25);
            guard += 1;
            if guard > 200 {
                return Err(Error::Quadrature("could not bound the kernel's tail".into()));
            }
        }

        let mut breaks = vec![0.0];
        for p in [anchor - 4.0 * spread, anchor, anchor + 4.0 * spread] {
            if p > *breaks.last().unwrap() && p < upper {
                breaks.push(p);
            }
        }
        breaks.push(upper);

        let cfg = QuadConfig {
            abs_tol: config.abs_tol * mass_guess.exp().min(1.0),
            ..*config
        };
        let scaled = |t: f64| {
            let v = (k.ln_value(t) - log_scale).exp();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let mass = integrate_with_breakpoints(scaled, &breaks, &cfg)?;
        let z = mass.value;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Quadrature(format!("normalizer {z} is not positive")));
        }
        let first = integrate_with_breakpoints(|t| t * scaled(t), &breaks, &cfg)?;
        let mean = first.value / z;
        let centered = integrate_with_breakpoints(
            |t| {
                let d = t - mean;
                d * d * scaled(t)
            },
            &breaks,
            &cfg,
        )?;
        let variance = centered.value / z;

        let mut cumulative = Vec::with_capacity(mass.panels.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for p in &mass.panels {
            acc += p.integral;
            cumulative.push(acc / z);
        }
        Ok(MarginalPosterior {
            parameter,
            kernel,
            log_scale,
            normalizer: z,
            mean,
            variance,
            upper,
            panels: mass.panels,
            cumulative,
        })
    }

    pub fn parameter(&self) -> ParameterId {
        self.parameter
    }

    pub fn kernel(&self) -> &GammaRatioKernel {
        &self.kernel
    }

    /// `ln` of the normalizing constant of the unscaled kernel.
    pub fn ln_normalizer(&self) -> f64 {
        self.normalizer.ln() + self.log_scale
    }

    /// Truncation point of the integration domain.
    pub fn upper_limit(&self) -> f64 {
        self.upper
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn ln_pdf(&self, theta: f64) -> f64 {
        self.kernel.ln_value(theta) - self.ln_normalizer()
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        self.ln_pdf(theta).exp()
    }

    fn scaled(&self, t: f64) -> f64 {
        let v = (self.kernel.ln_value(t) - self.log_scale).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= self.upper {
            return 1.0;
        }
        let i = self.panels.partition_point(|p| p.hi <= theta);
        let panel = &self.panels[i];
        let (partial, _) = gauss_kronrod(&|t| self.scaled(t), panel.lo, theta);
        (self.cumulative[i] + partial / self.normalizer).clamp(0.0, 1.0)
    }

    /// Interpolates the panel-grid CDF, then bisects within the bracketing
    /// panel to `1e-8` relative width.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0, 1), got {level}"
            )));
        }
        let i = (self.cumulative.partition_point(|&c| c <= level))
            .saturating_sub(1)
            .min(self.panels.len() - 1);
        let (mut lo, mut hi) = (self.panels[i].lo, self.panels[i].hi);
        let (c_lo, c_hi) = (self.cumulative[i], self.cumulative[i + 1]);
        let mut guess = if c_hi > c_lo {
            lo + (hi - lo) * (level - c_lo) / (c_hi - c_lo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            if hi - lo <= 1e-8 * hi.max(1e-300) {
                break;
            }
            if !(guess > lo && guess < hi) {
                guess = 0.5 * (lo + hi);
            }
            if self.cdf(guess) < level {
                lo = guess;
            } else {
                hi = guess;
            }
            guess = 0.5 * (lo + hi);
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn summarize(&self, level: f64) -> Result<PosteriorSummary> {
        let level = check_level(level)?;
        Ok(PosteriorSummary {
            mean: self.mean,
            variance: self.variance,
            ci_low: self.quantile(0.5 * (1.0 - level))?,
            ci_high: self.quantile(0.5 * (1.0 + level))?,
            level,
        })
    }
}

/// Kernel of the `θ1` marginal:
/// `θ1^(τ2+n-1) e^(-θ1 Σx) (C + ψ3 θ1)^(-(τ1+τ2+n))`.
pub fn theta1_marginal_kernel(
    prior: &PseudoGammaPrior,
    sample: &BivariateSample,
    variant: ModelVariant,
) -> Result<GammaRatioKernel> {
    require_simple(prior)?;
    let n = sample.n();
    Ok(GammaRatioKernel {
        power: prior.tau2 + n,
        rate: sample.sum_x(),
        offset: theta3_rate(prior, sample, variant)?,
        slope: prior.psi3,
        exponent: prior.tau1 + prior.tau2 + n,
    })
}

/// Kernel of the `θ3` marginal:
/// `θ3^(τ1+τ2+n-1) e^(-C θ3) (Σx + ψ3 θ3)^(-(τ2+n))`.
pub fn theta3_marginal_kernel(
    prior: &PseudoGammaPrior,
    sample: &BivariateSample,
    variant: ModelVariant,
) -> Result<GammaRatioKernel> {
    require_simple(prior)?;
    let n = sample.n();
    Ok(GammaRatioKernel {
        power: prior.tau1 + prior.tau2 + n,
        rate: theta3_rate(prior, sample, variant)?,
        offset: sample.sum_x(),
        slope: prior.psi3,
        exponent: prior.tau2 + n,
    })
}

pub fn marginal_theta1(
    prior: &PseudoGammaPrior,
    sample: &BivariateSample,
    variant: ModelVariant,
    config: &QuadConfig,
) -> Result<MarginalPosterior> {
    MarginalPosterior::from_kernel(
        ParameterId::Theta1,
        theta1_marginal_kernel(prior, sample, variant)?,
        config,
    )
}

pub fn marginal_theta3(
    prior: &PseudoGammaPrior,
    sample: &BivariateSample,
    variant: ModelVariant,
    config: &QuadConfig,
) -> Result<MarginalPosterior> {
    MarginalPosterior::from_kernel(
        ParameterId::Theta3,
        theta3_marginal_kernel(prior, sample, variant)?,
        config,
    )
}
