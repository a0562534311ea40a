use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which rate a posterior or summary describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterId {
    Theta1,
    Theta2,
    Theta3,
}

impl ParameterId {
    pub fn as_str(self) -> &'static str {
        match self {
            ParameterId::Theta1 => "theta1",
            ParameterId::Theta2 => "theta2",
            ParameterId::Theta3 => "theta3",
        }
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theta1" => Ok(ParameterId::Theta1),
            "theta2" => Ok(ParameterId::Theta2),
            "theta3" => Ok(ParameterId::Theta3),
            other => Err(Error::Domain(format!("unknown parameter `{other}`"))),
        }
    }
}

/// Posterior mean, variance, and equal-tail credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
}

pub(crate) fn check_level(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(Error::Domain(format!("coverage level must lie in (0, 1), got {level}")))
    }
}
