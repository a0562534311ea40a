//! Versioned JSON fit report. Every float is written with 17 significant
//! digits so a report re-reads to the exact values it was written from.

use serde::{Deserialize, Serialize};

use crate::conjugate::PriorSpec;
use crate::distributions::{lomax_mean, lomax_variance, GammaParams, LomaxParams, ModelVariant};
use crate::error::{Error, Result};
use crate::fit::{ChainSettings, Fit, Method};
use crate::io::{sha256_hex, Num};
use crate::posterior::FitPrior;
use crate::pseudo_gamma::PseudoGammaPrior;
use crate::summary::ParameterId;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub shape: Num,
    pub rate: Num,
}

impl From<GammaParams> for GammaEntry {
    fn from(g: GammaParams) -> Self {
        GammaEntry {
            shape: Num(g.shape),
            rate: Num(g.rate),
        }
    }
}

impl GammaEntry {
    fn params(&self) -> Result<GammaParams> {
        GammaParams::new(self.shape.0, self.rate.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoEntry {
    pub tau1: Num,
    pub tau2: Num,
    pub psi1: Num,
    pub psi2: Num,
    pub psi3: Num,
}

/// Prior echo. `kind` is `independent`, `improper`, or `pseudo`; only the
/// fields that kind uses are non-null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEntry {
    pub kind: String,
    pub theta1: Option<GammaEntry>,
    pub theta2: Option<GammaEntry>,
    pub theta3: Option<GammaEntry>,
    pub pseudo: Option<PseudoEntry>,
}

impl From<&FitPrior> for PriorEntry {
    fn from(prior: &FitPrior) -> Self {
        let empty = |kind: &str| PriorEntry {
            kind: kind.to_string(),
            theta1: None,
            theta2: None,
            theta3: None,
            pseudo: None,
        };
        match prior {
            FitPrior::Conjugate {
                spec: PriorSpec::Improper,
            } => empty("improper"),
            FitPrior::Conjugate {
                spec:
                    PriorSpec::IndependentGamma {
                        theta1,
                        theta2,
                        theta3,
                    },
            } => PriorEntry {
                theta1: Some((*theta1).into()),
                theta2: theta2.map(Into::into),
                theta3: Some((*theta3).into()),
                ..empty("independent")
            },
            FitPrior::Pseudo { prior, theta2 } => PriorEntry {
                theta2: theta2.map(Into::into),
                pseudo: Some(PseudoEntry {
                    tau1: Num(prior.tau1),
                    tau2: Num(prior.tau2),
                    psi1: Num(prior.psi1),
                    psi2: Num(prior.psi2),
                    psi3: Num(prior.psi3),
                }),
                ..empty("pseudo")
            },
        }
    }
}

impl PriorEntry {
    pub fn to_prior(&self) -> Result<FitPrior> {
        let missing = |what: &str| Error::Domain(format!("prior echo lacks `{what}`"));
        let theta2 = self.theta2.map(|g| g.params()).transpose()?;
        match self.kind.as_str() {
            "improper" => Ok(FitPrior::Conjugate {
                spec: PriorSpec::Improper,
            }),
            "independent" => Ok(FitPrior::Conjugate {
                spec: PriorSpec::IndependentGamma {
                    theta1: self.theta1.ok_or_else(|| missing("theta1"))?.params()?,
                    theta2,
                    theta3: self.theta3.ok_or_else(|| missing("theta3"))?.params()?,
                },
            }),
            "pseudo" => {
                let p = self.pseudo.ok_or_else(|| missing("pseudo"))?;
                Ok(FitPrior::Pseudo {
                    prior: PseudoGammaPrior::new(p.tau1.0, p.tau2.0, p.psi1.0, p.psi2.0, p.psi3.0)?,
                    theta2,
                })
            }
            other => Err(Error::Domain(format!("unknown prior kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterEntry {
    pub name: ParameterId,
    pub mean: Num,
    pub variance: Num,
    pub ci_low: Num,
    pub ci_high: Num,
    pub level: Num,
    pub mc_standard_error: Option<Num>,
    pub ess: Option<Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEntry {
    pub theta1: Num,
    pub theta2: Num,
    pub theta3: Num,
    pub loglik: Num,
    pub converged: bool,
    pub iterations: usize,
    pub on_boundary: bool,
}

/// `mean`/`variance` are `null` where the Lomax moment is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LomaxEntry {
    pub shape: Num,
    pub scale: Num,
    pub mean: Num,
    pub variance: Num,
}

impl From<LomaxParams> for LomaxEntry {
    fn from(l: LomaxParams) -> Self {
        LomaxEntry {
            shape: Num(l.shape),
            scale: Num(l.scale),
            mean: Num(lomax_mean(&l).unwrap_or(f64::NAN)),
            variance: Num(lomax_variance(&l).unwrap_or(f64::NAN)),
        }
    }
}

impl LomaxEntry {
    pub fn params(&self) -> Result<LomaxParams> {
        LomaxParams::new(self.shape.0, self.scale.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveEntry {
    pub x: LomaxEntry,
    pub y: LomaxEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub kept_draws: usize,
    pub thinning: usize,
    pub burn_in: usize,
    pub acceptance_rate: Num,
    pub step_scale: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 over the canonical fit configuration including the data hash.
    pub config_hash: String,
    pub tool_version: String,
    pub data: String,
    pub data_sha256: String,
    /// Whether the reduced 1,000-draw chain length was requested.
    pub fast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub model: ModelVariant,
    pub prior: PriorEntry,
    pub method: Method,
    pub n: usize,
    pub level: Num,
    pub parameters: Vec<ParameterEntry>,
    pub mle: MleEntry,
    /// Absent (`null`) unless the prior is conjugate on a sub-model.
    pub predictive: Option<PredictiveEntry>,
    /// Present for HARM fits only.
    pub chain: Option<ChainEntry>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct HashedConfig<'a> {
    model: ModelVariant,
    prior: &'a PriorEntry,
    method: Method,
    level: Num,
    chain: Option<ChainSettings>,
    seed: u64,
    data_sha256: &'a str,
}

/// Where the data came from and how the run was seeded.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub seed: u64,
    pub data: String,
    pub data_sha256: String,
    pub fast: bool,
}

impl FitReport {
    pub fn from_fit(fit: &Fit, run: &RunInfo) -> FitReport {
        let prior = PriorEntry::from(&fit.prior);
        let chain_settings = fit.chain.as_ref().map(|c| c.settings);
        let hashed = HashedConfig {
            model: fit.variant,
            prior: &prior,
            method: fit.method,
            level: Num(fit.level),
            chain: chain_settings,
            seed: run.seed,
            data_sha256: &run.data_sha256,
        };
        let config_hash =
            sha256_hex(serde_json::to_string(&hashed).expect("plain data serializes").as_bytes());
        FitReport {
            schema_version: SCHEMA_VERSION,
            model: fit.variant,
            prior,
            method: fit.method,
            n: fit.n,
            level: Num(fit.level),
            parameters: fit
                .parameters
                .iter()
                .map(|p| ParameterEntry {
                    name: p.parameter,
                    mean: Num(p.summary.mean),
                    variance: Num(p.summary.variance),
                    ci_low: Num(p.summary.ci_low),
                    ci_high: Num(p.summary.ci_high),
                    level: Num(p.summary.level),
                    mc_standard_error: p.mc_standard_error.map(Num),
                    ess: p.ess.map(Num),
                })
                .collect(),
            mle: MleEntry {
                theta1: Num(fit.mle.params.theta1),
                theta2: Num(fit.mle.params.theta2),
                theta3: Num(fit.mle.params.theta3),
                loglik: Num(fit.mle.loglik_at_max),
                converged: fit.mle.converged,
                iterations: fit.mle.iterations,
                on_boundary: fit.mle.on_boundary,
            },
            predictive: fit.predictive.map(|p| PredictiveEntry {
                x: p.x.into(),
                y: p.y.into(),
            }),
            chain: fit.chain.as_ref().map(|c| ChainEntry {
                kept_draws: c.settings.kept_draws,
                thinning: c.settings.thinning,
                burn_in: c.settings.burn_in,
                acceptance_rate: Num(c.acceptance_rate),
                step_scale: c.step_scale.iter().copied().map(Num).collect(),
            }),
            provenance: Provenance {
                seed: run.seed,
                config_hash,
                tool_version: TOOL_VERSION.to_string(),
                data: run.data.clone(),
                data_sha256: run.data_sha256.clone(),
                fast: run.fast,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<FitReport> {
        let report: FitReport = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Incompatible(format!(
                "fit report schema version {} is not supported (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    /// `(x, y)` predictive laws; an error when the report has none.
    pub fn predictive_laws(&self) -> Result<(LomaxParams, LomaxParams)> {
        let p = self.predictive.ok_or_else(|| {
            Error::Incompatible(format!(
                "the fit report has no predictive block ({} model, {} prior)",
                self.model, self.prior.kind
            ))
        })?;
        Ok((p.x.params()?, p.y.params()?))
    }

    pub fn parameter(&self, id: ParameterId) -> Option<&ParameterEntry> {
        self.parameters.iter().find(|p| p.name == id)
    }
}
