use crate::error::{Error, Result};

/// Sufficient statistics of a (possibly empty) batch of observations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SufficientStats {
    pub n: usize,
    pub sum_x: f64,
    pub sum_y: f64,
    pub sum_xy: f64,
}

impl SufficientStats {
    /// Statistics of no data at all.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Statistics of the concatenated batches.
    pub fn merge(&self, other: &SufficientStats) -> SufficientStats {
        SufficientStats {
            n: self.n + other.n,
            sum_x: self.sum_x + other.sum_x,
            sum_y: self.sum_y + other.sum_y,
            sum_xy: self.sum_xy + other.sum_xy,
        }
    }
}

/// Observed `(x, y)` pairs with cached sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    pairs: Vec<(f64, f64)>,
    sum_x: f64,
    sum_y: f64,
    sum_xy: f64,
    sum_log_x: f64,
    sum_log_1p_x: f64,
}

impl BivariateSample {
    /// Validates and wraps the pairs. Rejects an empty list and any
    /// non-positive or non-finite coordinate, reporting 1-based row numbers.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Dataset {
                rows: vec![],
                message: "sample must contain at least one pair".into(),
            });
        }
        let bad: Vec<usize> = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(x, y))| !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0))
            .map(|(i, _)| i + 1)
            .collect();
        if !bad.is_empty() {
            return Err(Error::Dataset {
                rows: bad,
                message: "x and y must be finite and strictly positive".into(),
            });
        }
        Ok(Self::from_valid(pairs))
    }

    pub(crate) fn from_valid(pairs: Vec<(f64, f64)>) -> Self {
        let mut s = BivariateSample {
            pairs,
            sum_x: 0.0,
            sum_y: 0.0,
            sum_xy: 0.0,
            sum_log_x: 0.0,
            sum_log_1p_x: 0.0,
        };
        for &(x, y) in &s.pairs {
            s.sum_x += x;
            s.sum_y += y;
            s.sum_xy += x * y;
            s.sum_log_x += x.ln();
            s.sum_log_1p_x += x.ln_1p();
        }
        s
    }

    pub fn stats(&self) -> SufficientStats {
        SufficientStats {
            n: self.len(),
            sum_x: self.sum_x,
            sum_y: self.sum_y,
            sum_xy: self.sum_xy,
        }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always false: a sample holds at least one pair.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `n` as a float.
    pub fn n(&self) -> f64 {
        self.pairs.len() as f64
    }

    /// `Σ x_i`
    pub fn sum_x(&self) -> f64 {
        self.sum_x
    }

    /// `Σ y_i`
    pub fn sum_y(&self) -> f64 {
        self.sum_y
    }

    /// `Σ x_i y_i`
    pub fn sum_xy(&self) -> f64 {
        self.sum_xy
    }

    /// `Σ ln x_i`
    pub fn sum_log_x(&self) -> f64 {
        self.sum_log_x
    }

    /// `Σ ln(1 + x_i)`
    pub fn sum_log_1p_x(&self) -> f64 {
        self.sum_log_1p_x
    }

    /// Concatenates two samples.
    pub fn concat(&self, other: &BivariateSample) -> BivariateSample {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        BivariateSample::from_valid(pairs)
    }

    /// First `n` pairs (all of them if `n` exceeds the length).
    pub fn prefix(&self, n: usize) -> Result<BivariateSample> {
        BivariateSample::new(self.pairs[..n.min(self.len())].to_vec())
    }
}
