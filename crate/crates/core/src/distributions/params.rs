use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};

/// Which constraint, if any, ties the conditional rates together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    /// All three rates free.
    Full,
    /// `theta2 == theta3`: `Y | X = x ~ Exp(theta3 (1 + x))`.
    #[serde(rename = "sub1")]
    SubModelI,
    /// `theta2 == 0`: `Y | X = x ~ Exp(theta3 x)`.
    #[serde(rename = "sub2")]
    SubModelII,
}

impl ModelVariant {
    pub fn is_sub_model(self) -> bool {
        !matches!(self, ModelVariant::Full)
    }

    /// Short name used on the command line and in output files.
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Full => "full",
            ModelVariant::SubModelI => "sub1",
            ModelVariant::SubModelII => "sub2",
        }
    }

    /// Checks that `params` respects this variant's constraint.
    pub fn check(self, params: &PseudoExpParams) -> Result<()> {
        match self {
            ModelVariant::Full => Ok(()),
            ModelVariant::SubModelI if params.theta2 != params.theta3 => Err(Error::Constraint(
                format!(
                    "sub-model I requires theta2 == theta3 (got {} and {})",
                    params.theta2, params.theta3
                ),
            )),
            ModelVariant::SubModelII if params.theta2 != 0.0 => Err(Error::Constraint(format!(
                "sub-model II requires theta2 == 0 (got {})",
                params.theta2
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(ModelVariant::Full),
            "sub1" | "submodeli" | "sub-model-i" => Ok(ModelVariant::SubModelI),
            "sub2" | "submodelii" | "sub-model-ii" => Ok(ModelVariant::SubModelII),
            other => Err(Error::Constraint(format!(
                "unknown model `{other}` (expected full, sub1, or sub2)"
            ))),
        }
    }
}

/// Rate triple of the bivariate pseudo-exponential law
/// `X ~ Exp(theta1)`, `Y | X = x ~ Exp(theta2 + theta3 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoExpParams {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl PseudoExpParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        require_positive("theta1", theta1)?;
        require_nonnegative("theta2", theta2)?;
        require_nonnegative("theta3", theta3)?;
        if theta2 + theta3 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta2 + theta3",
                value: theta2 + theta3,
                reason: "conditional rate must not vanish",
            });
        }
        Ok(PseudoExpParams {
            theta1,
            theta2,
            theta3,
        })
    }

    /// Parameters for sub-model I (`theta2 = theta3`).
    pub fn sub_model_one(theta1: f64, theta3: f64) -> Result<Self> {
        require_positive("theta3", theta3)?;
        Self::new(theta1, theta3, theta3)
    }

    /// Parameters for sub-model II (`theta2 = 0`).
    pub fn sub_model_two(theta1: f64, theta3: f64) -> Result<Self> {
        require_positive("theta3", theta3)?;
        Self::new(theta1, 0.0, theta3)
    }

    /// Rate of `Y` given `X = x`.
    #[inline]
    pub fn conditional_rate(&self, x: f64) -> f64 {
        self.theta2 + self.theta3 * x
    }
}

/// Gamma distribution in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        require_positive("rate", rate)?;
        Ok(GammaParams { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

/// Lomax (Pareto type II) distribution with density
/// `a λ^a / (λ + t)^(a + 1)` on `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LomaxParams {
    pub shape: f64,
    pub scale: f64,
}

impl LomaxParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        require_positive("scale", scale)?;
        Ok(LomaxParams { shape, scale })
    }
}
