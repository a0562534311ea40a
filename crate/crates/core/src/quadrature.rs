//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)` or the subdivision budget is
//! spent. The converged panel list is returned so callers can build a
//! cumulative distribution function on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of panels.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub integral: f64,
    pub error: f64,
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    /// Converged panels, sorted by lower bound and covering the domain.
    pub panels: Vec<Panel>,
}

/// Single 15-point Kronrod panel; returns the Kronrod estimate and
/// `|K15 - G7|` as its error.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, config: &QuadConfig) -> Result<Integral> {
    integrate_with_breakpoints(f, &[lo, hi], config)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from one panel per
/// consecutive pair of breakpoints.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    config: &QuadConfig,
) -> Result<Integral> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Quadrature(
            "breakpoints must be strictly increasing with at least two entries".into(),
        ));
    }
    let mut heap: BinaryHeap<Panel> = points
        .windows(2)
        .map(|w| {
            let (integral, error) = gauss_kronrod(&f, w[0], w[1]);
            Panel {
                lo: w[0],
                hi: w[1],
                integral,
                error,
            }
        })
        .collect();

    loop {
        let value: f64 = heap.iter().map(|p| p.integral).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        if error <= config.abs_tol.max(config.rel_tol * value.abs()) {
            let mut panels = heap.into_vec();
            panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            return Ok(Integral {
                value: panels.iter().map(|p| p.integral).sum(),
                abs_error: error,
                panels,
            });
        }
        if heap.len() >= config.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "tolerance not reached within {} panels (estimate {value}, error {error})",
                config.max_subdivisions
            )));
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            return Err(Error::Quadrature(format!(
                "panel [{}, {}] cannot be subdivided further",
                worst.lo, worst.hi
            )));
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (integral, error) = gauss_kronrod(&f, lo, hi);
            heap.push(Panel {
                lo,
                hi,
                integral,
                error,
            });
        }
    }
}

/// Integrates `f` over `[lo, ∞)` through the substitution `x = lo + t / (1 - t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    config: &QuadConfig,
) -> Result<Integral> {
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let v = f(lo + t / s) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, config)
}
