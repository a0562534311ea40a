use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the support of a density or kernel.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Parameters do not satisfy the constraints of the selected model variant.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("{moment} of Lomax(shape = {shape}) is not finite")]
    Moment { moment: &'static str, shape: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("posterior is improper: {0}")]
    ImproperPosterior(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("sampler initialization failed: {0}")]
    Initialization(String),

    /// Method, prior, and variant combination that has no implementation.
    #[error("incompatible request: {0}")]
    Incompatible(String),

    #[error("{}", fmt_config(.line, .message))]
    Config {
        line: Option<usize>,
        message: String,
    },

    /// Dataset rows that failed validation. Row numbers are 1-based data rows.
    #[error("{message}{}", fmt_rows(.rows))]
    Dataset { rows: Vec<usize>, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_config(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error at line {l}: {message}"),
        None => format!("config error: {message}"),
    }
}

fn fmt_rows(rows: &[usize]) -> String {
    if rows.is_empty() {
        String::new()
    } else {
        let list: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        format!(" (rows {})", list.join(", "))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
