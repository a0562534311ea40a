//! Lomax (Pareto of the second kind) distribution.

use rand::Rng;

use super::gamma::{sample_exponential, sample_gamma};
use super::{GammaParams, LomaxParams};
use crate::error::{Error, Result};

pub fn lomax_ln_pdf(params: &LomaxParams, t: f64) -> f64 {
    if t < 0.0 {
        return f64::NEG_INFINITY;
    }
    let LomaxParams { shape, scale } = *params;
    (shape / scale).ln() - (shape + 1.0) * (t / scale).ln_1p()
}

/// `(a/λ) (1 + t/λ)^{-(a+1)}`; exactly `a/λ` at `t = 0`.
pub fn lomax_pdf(params: &LomaxParams, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let LomaxParams { shape, scale } = *params;
    shape / scale * (-(shape + 1.0) * (t / scale).ln_1p()).exp()
}

pub fn lomax_cdf(params: &LomaxParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    // 1 - (λ/(λ+t))^a, written to keep precision for small t.
    -(-params.shape * (t / params.scale).ln_1p()).exp_m1()
}

pub fn lomax_quantile(params: &LomaxParams, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    Ok(params.scale * ((-(-level).ln_1p() / params.shape).exp_m1()))
}

/// `λ / (a - 1)`, finite only for `a > 1`.
pub fn lomax_mean(params: &LomaxParams) -> Result<f64> {
    if params.shape <= 1.0 {
        return Err(Error::Moment {
            moment: "mean",
            shape: params.shape,
        });
    }
    Ok(params.scale / (params.shape - 1.0))
}

/// `λ² a / ((a - 1)² (a - 2))`, finite only for `a > 2`.
pub fn lomax_variance(params: &LomaxParams) -> Result<f64> {
    let a = params.shape;
    if a <= 2.0 {
        return Err(Error::Moment {
            moment: "variance",
            shape: a,
        });
    }
    Ok(params.scale * params.scale * a / ((a - 1.0) * (a - 1.0) * (a - 2.0)))
}

/// Draws by composition: a gamma-distributed rate, then an exponential.
pub fn sample_lomax<R: Rng + ?Sized>(params: &LomaxParams, rng: &mut R) -> f64 {
    let rate = sample_gamma(
        &GammaParams {
            shape: params.shape,
            rate: params.scale,
        },
        rng,
    );
    sample_exponential(rate, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(a: f64, s: f64) -> LomaxParams {
        LomaxParams::new(a, s).unwrap()
    }

    #[test]
    fn moments() {
        assert_eq!(lomax_mean(&l(3.0, 2.0)).unwrap(), 1.0);
        assert_eq!(lomax_variance(&l(3.0, 2.0)).unwrap(), 3.0);
        assert!(matches!(lomax_mean(&l(1.0, 2.0)), Err(Error::Moment { .. })));
        assert!(matches!(lomax_variance(&l(2.0, 2.0)), Err(Error::Moment { .. })));
    }

    #[test]
    fn boundary_values() {
        let p = l(3.0, 2.0);
        assert_eq!(lomax_cdf(&p, 0.0), 0.0);
        assert!((lomax_pdf(&p, 0.0) - 1.5).abs() < 1e-15);
        assert!((lomax_cdf(&p, 1e12) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = l(4.0, 5.0);
        let median = lomax_quantile(&p, 0.5).unwrap();
        assert!((median - 5.0 * (2f64.powf(0.25) - 1.0)).abs() < 1e-13);
        for q in [1e-6, 0.1, 0.9, 0.999] {
            let t = lomax_quantile(&p, q).unwrap();
            assert!((lomax_cdf(&p, t) - q).abs() < 1e-13);
        }
    }
}
