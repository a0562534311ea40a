//! Hit-And-Run Metropolis on the positive orthant.
//!
//! Each step draws a direction uniformly on the unit sphere, stretches it by
//! the per-coordinate step scale, and moves a Gaussian distance along it. The
//! proposal is symmetric, so the plain Metropolis ratio applies; proposals
//! outside the open orthant or with zero target density are rejected.
//!
//! The step scale is tuned only during burn-in: halfway through, each
//! coordinate's scale is reset from the burn-in spread, and a global factor is
//! driven by Robbins-Monro updates on the log scale toward
//! [`TARGET_ACCEPTANCE`]. It is frozen for the kept iterations.

mod diagnostics;

pub use diagnostics::{effective_sample_size, sorted_quantile};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{seeded, SeededRng};
use crate::summary::{check_level, PosteriorSummary};

pub const TARGET_ACCEPTANCE: f64 = 0.35;

/// Unnormalized log density on the positive orthant. `-inf` marks zero density.
pub trait LogTarget {
    fn dim(&self) -> usize;
    fn log_density(&self, point: &[f64]) -> f64;
}

impl<T: LogTarget + ?Sized> LogTarget for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_density(&self, point: &[f64]) -> f64 {
        (**self).log_density(point)
    }
}

/// Adapts a closure into a [`LogTarget`].
pub struct FnTarget<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnTarget<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnTarget { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> LogTarget for FnTarget<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, point: &[f64]) -> f64 {
        (self.f)(point)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Raw steps after burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    /// Keep every `thinning`-th post-burn-in state.
    pub thinning: usize,
    pub initial_point: Vec<f64>,
    /// Per-coordinate scale; `None` uses a tenth of the initial point.
    pub step_scale: Option<Vec<f64>>,
    pub seed: u64,
}

impl ChainConfig {
    /// 10,000 burn-in steps, then 100,000 steps thinned by 10.
    pub fn new(initial_point: Vec<f64>, seed: u64) -> Self {
        ChainConfig {
            iterations: 100_000,
            burn_in: 10_000,
            thinning: 10,
            initial_point,
            step_scale: None,
            seed,
        }
    }

    /// Sets `iterations` so that `kept` draws survive thinning.
    pub fn with_kept_draws(mut self, kept: usize) -> Self {
        self.iterations = kept * self.thinning;
        self
    }

    pub fn kept_draws(&self) -> usize {
        self.iterations / self.thinning
    }

    fn validate(&self, dim: usize) -> Result<Vec<f64>> {
        if self.thinning == 0 || self.iterations < self.thinning {
            return Err(Error::Initialization(format!(
                "need thinning >= 1 and iterations >= thinning (got {} and {})",
                self.thinning, self.iterations
            )));
        }
        if self.initial_point.len() != dim {
            return Err(Error::Initialization(format!(
                "initial point has dimension {}, target has {dim}",
                self.initial_point.len()
            )));
        }
        if self.initial_point.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Initialization(
                "initial point must be strictly positive".into(),
            ));
        }
        let scale = match &self.step_scale {
            Some(s) => s.clone(),
            None => self.initial_point.iter().map(|&v| 0.1 * v).collect(),
        };
        if scale.len() != dim || scale.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Initialization(
                "step scale must be positive with one entry per coordinate".into(),
            ));
        }
        Ok(scale)
    }
}

/// A point with its cached log density.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub point: Vec<f64>,
    pub log_density: f64,
}

/// One hit-and-run Metropolis transition. Returns whether the move was accepted;
/// on rejection `state` is unchanged.
pub fn harm_step<T: LogTarget + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    target: &T,
    step_scale: &[f64],
    rng: &mut R,
) -> bool {
    let dim = state.point.len();
    let mut direction: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    let distance: f64 = rng.sample(StandardNormal);
    for (i, d) in direction.iter_mut().enumerate() {
        *d = state.point[i] + distance * step_scale[i] * *d / norm;
    }
    let proposal = direction;
    // The uniform is drawn before any early exit so that the stream advances
    // identically whether or not the proposal is feasible.
    let u: f64 = rng.random();
    if proposal.iter().any(|&v| !(v > 0.0)) {
        return false;
    }
    let log_density = target.log_density(&proposal);
    if log_density.is_nan() || log_density == f64::NEG_INFINITY {
        return false;
    }
    let delta = log_density - state.log_density;
    if delta >= 0.0 || u < delta.exp() {
        state.point = proposal;
        state.log_density = log_density;
        true
    } else {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    dim: usize,
    draws: Vec<f64>,
    /// Post-burn-in acceptance fraction.
    pub acceptance_rate: f64,
    /// Per-coordinate effective sample size of the kept draws.
    pub ess: Vec<f64>,
    /// Step scale after burn-in adaptation.
    pub step_scale: Vec<f64>,
}

impl ChainResult {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kept(&self) -> usize {
        self.draws.len() / self.dim
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim)
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.draws().map(|d| d[j]).collect()
    }

    /// `sd / sqrt(ess)` per coordinate.
    pub fn mc_standard_errors(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let c = self.coordinate(j);
                let n = c.len() as f64;
                let mean = c.iter().sum::<f64>() / n;
                let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
                (var / self.ess[j]).sqrt()
            })
            .collect()
    }
}

pub fn run_chain<T: LogTarget + ?Sized>(target: &T, config: &ChainConfig) -> Result<ChainResult> {
    let dim = target.dim();
    let mut base_scale = config.validate(dim)?;
    let mut rng: SeededRng = seeded(config.seed);
    let log_density = target.log_density(&config.initial_point);
    if !log_density.is_finite() {
        return Err(Error::Initialization(format!(
            "target is not finite at the initial point {:?}",
            config.initial_point
        )));
    }
    let mut state = ChainState {
        point: config.initial_point.clone(),
        log_density,
    };

    let mut log_factor = 0.0_f64;
    let mut scale: Vec<f64> = base_scale.clone();
    let half = config.burn_in / 2;
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut adapt_t = 0usize;
    for t in 0..config.burn_in {
        let accepted = harm_step(&mut state, target, &scale, &mut rng);
        if t < half {
            let k = (t + 1) as f64;
            for j in 0..dim {
                let d = state.point[j] - mean[j];
                mean[j] += d / k;
                m2[j] += d * (state.point[j] - mean[j]);
            }
        }
        if t + 1 == half && half >= 20 {
            for j in 0..dim {
                let sd = (m2[j] / (half - 1) as f64).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    base_scale[j] = 2.4 * sd;
                }
            }
            log_factor = 0.0;
            adapt_t = 0;
        }
        adapt_t += 1;
        let gain = 1.0 / (adapt_t as f64).powf(0.6);
        log_factor += gain * (f64::from(u8::from(accepted)) - TARGET_ACCEPTANCE);
        log_factor = log_factor.clamp(-30.0, 30.0);
        let f = log_factor.exp();
        for j in 0..dim {
            scale[j] = base_scale[j] * f;
        }
    }

    let kept = config.kept_draws();
    let mut draws = Vec::with_capacity(kept * dim);
    let mut accepted = 0usize;
    for t in 1..=config.iterations {
        if harm_step(&mut state, target, &scale, &mut rng) {
            accepted += 1;
        }
        if t % config.thinning == 0 {
            draws.extend_from_slice(&state.point);
        }
    }

    let mut result = ChainResult {
        dim,
        draws,
        acceptance_rate: accepted as f64 / config.iterations as f64,
        ess: Vec::new(),
        step_scale: scale,
    };
    result.ess = (0..dim)
        .map(|j| effective_sample_size(&result.coordinate(j)))
        .collect();
    Ok(result)
}

/// Per-coordinate sample mean, variance, and empirical equal-tail interval.
pub fn summarize_chain(result: &ChainResult, level: f64) -> Result<Vec<PosteriorSummary>> {
    let level = check_level(level)?;
    if result.kept() < 2 {
        return Err(Error::Domain("need at least two kept draws to summarize".into()));
    }
    Ok((0..result.dim())
        .map(|j| {
            let mut c = result.coordinate(j);
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let variance = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            c.sort_by(f64::total_cmp);
            PosteriorSummary {
                mean,
                variance,
                ci_low: sorted_quantile(&c, 0.5 * (1.0 - level)),
                ci_high: sorted_quantile(&c, 0.5 * (1.0 + level)),
                level,
            }
        })
        .collect())
}
