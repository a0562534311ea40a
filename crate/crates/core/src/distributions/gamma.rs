//! Gamma and exponential helpers: density, distribution function, quantile,
//! and variate generation.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use super::GammaParams;
use crate::error::{Error, Result};

const QUANTILE_MAX_ITER: usize = 300;

/// `ln` of the gamma density at `t`. Returns `-inf` outside the support.
pub fn gamma_ln_pdf(params: &GammaParams, t: f64) -> f64 {
    let GammaParams { shape, rate } = *params;
    if t < 0.0 {
        return f64::NEG_INFINITY;
    }
    if t == 0.0 {
        return if shape < 1.0 {
            f64::INFINITY
        } else if shape == 1.0 {
            rate.ln()
        } else {
            f64::NEG_INFINITY
        };
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * t.ln() - rate * t
}

pub fn gamma_pdf(params: &GammaParams, t: f64) -> f64 {
    gamma_ln_pdf(params, t).exp()
}

/// `P(T ≤ t)`
pub fn gamma_cdf(params: &GammaParams, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        gamma_lr(params.shape, params.rate * t)
    }
}

/// Inverse of [`gamma_cdf`], solved on the unit-rate scale by safeguarded
/// Newton iteration on the regularized incomplete gamma function.
pub fn gamma_quantile(params: &GammaParams, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    Ok(standard_gamma_quantile(params.shape, level)? / params.rate)
}

fn standard_gamma_quantile(a: f64, p: f64) -> Result<f64> {
    // Work with the smaller tail to avoid cancellation near 1.
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    let residual = |x: f64| -> f64 {
        if upper {
            target - gamma_ur(a, x)
        } else {
            gamma_lr(a, x) - target
        }
    };
    let ln_norm = ln_gamma(a);
    let density = |x: f64| ((a - 1.0) * x.ln() - x - ln_norm).exp();

    let mut x = initial_guess(a, p);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..QUANTILE_MAX_ITER {
        let r = residual(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = density(x);
        let mut next = x - r / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1e-300) };
        }
        if (next - x).abs() <= 1e-15 * x.max(f64::MIN_POSITIVE) || (hi.is_finite() && hi - lo <= 1e-15 * hi) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Convergence(format!(
        "gamma quantile (shape {a}, level {p}) did not converge"
    )))
}

// Wilson-Hilferty start, with a small-argument series for tiny shapes or levels.
fn initial_guess(a: f64, p: f64) -> f64 {
    let z = standard_normal_quantile(p);
    let c = 1.0 / (9.0 * a);
    let wh = a * (1.0 - c + z * c.sqrt()).powi(3);
    let small = (p * (ln_gamma(a + 1.0)).exp()).powf(1.0 / a);
    if wh > 0.0 && wh.is_finite() && a > 0.5 {
        wh.max(small.min(wh))
    } else if small.is_finite() && small > 0.0 {
        small
    } else {
        a.max(1e-3)
    }
}

// Acklam-style rational approximation; only used for starting values.
fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Exponential variate by inversion: `-ln(U) / rate` with `U` in `(0, 1]`.
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

/// Gamma variate. Marsaglia-Tsang squeeze/rejection for `shape ≥ 1`; for
/// `shape < 1` a `Gamma(shape + 1)` draw is scaled by `U^(1/shape)`.
pub fn sample_gamma<R: Rng + ?Sized>(params: &GammaParams, rng: &mut R) -> f64 {
    standard_gamma(params.shape, rng) / params.rate
}

fn standard_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return standard_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u: f64 = rng.random();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 {
            return d * v3;
        }
        if u.ln() < 0.5 * z2 + d * (1.0 - v3 + v3.ln()) {
            return d * v3;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn exponential_median() {
        let g = GammaParams::new(1.0, 2.0).unwrap();
        let q = gamma_quantile(&g, 0.5).unwrap();
        assert!((q - std::f64::consts::LN_2 / 2.0).abs() < 1e-12, "{q}");
    }

    // P(2, x) = 1 - e^{-x}(1 + x) solved by plain bisection on the smaller tail.
    fn bisect_gamma2(p: f64) -> f64 {
        let below = |x: f64| {
            if p <= 0.5 {
                1.0 - (-x).exp() * (1.0 + x) < p
            } else {
                (-x).exp() * (1.0 + x) > 1.0 - p
            }
        };
        let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gamma2_quantiles_match_bisection_oracle() {
        let g = GammaParams::new(2.0, 1.0).unwrap();
        for p in [1e-9, 0.025, 0.3, 0.5, 0.975, 1.0 - 1e-9] {
            let q = gamma_quantile(&g, p).unwrap();
            assert!((q - bisect_gamma2(p)).abs() < 1e-10, "p={p}: {q}");
        }
        // Frozen from the oracle.
        assert!((gamma_quantile(&g, 0.025).unwrap() - 0.242_209_278_543_965_4).abs() < 1e-10);
        assert!((gamma_quantile(&g, 0.975).unwrap() - 5.571_643_390_938_896).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf_across_shapes() {
        for &shape in &[0.05, 0.3, 1.0, 2.5, 22.0, 530.0, 1e4] {
            let g = GammaParams::new(shape, 3.0).unwrap();
            for &p in &[1e-9, 1e-4, 0.025, 0.5, 0.975, 0.9999, 1.0 - 1e-9] {
                let q = gamma_quantile(&g, p).unwrap();
                let back = gamma_cdf(&g, q);
                let tol = 1e-9 * p.min(1.0 - p).max(1e-3);
                assert!((back - p).abs() < tol.max(1e-12), "shape {shape} p {p}: cdf(q)={back}");
            }
        }
    }

    #[test]
    fn quantile_rejects_bad_levels() {
        let g = GammaParams::new(2.0, 1.0).unwrap();
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(gamma_quantile(&g, p).is_err());
        }
    }

    #[test]
    fn gamma_sampler_moments() {
        let mut rng = seeded(11);
        for &(shape, rate) in &[(0.4, 2.0), (1.0, 1.0), (3.0, 2.0), (22.0, 12.0)] {
            let g = GammaParams::new(shape, rate).unwrap();
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_gamma(&g, &mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let se = (g.variance() / n as f64).sqrt();
            assert!((mean - g.mean()).abs() < 4.0 * se, "shape {shape}: {mean}");
            assert!(draws.iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn exponential_sampler_mean() {
        let mut rng = seeded(3);
        let n = 200_000;
        let mean = (0..n).map(|_| sample_exponential(4.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.25).abs() < 4.0 * 0.25 / (n as f64).sqrt());
    }
}
