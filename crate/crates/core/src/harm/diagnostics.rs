//! Chain diagnostics. These never gate results.

/// Effective sample size from Geyer's initial positive (and monotone)
/// sequence estimator of the integrated autocorrelation time.
pub fn effective_sample_size(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = chain.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 {
        return n as f64;
    }
    let mut tau = -1.0;
    let mut previous = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(previous);
        tau += 2.0 * pair;
        previous = pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

/// Linear-interpolation (type 7) quantile of already sorted data.
pub fn sorted_quantile(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn iid_draws_have_full_ess() {
        let mut rng = seeded(1);
        let x: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
        let ess = effective_sample_size(&x);
        assert!((ess / 20_000.0 - 1.0).abs() < 0.1, "{ess}");
    }

    #[test]
    fn ar1_ess_matches_theory() {
        // AR(1) with coefficient φ has τ = (1 + φ)/(1 - φ).
        let phi: f64 = 0.8;
        let mut rng = seeded(2);
        let mut v = 0.0;
        let x: Vec<f64> = (0..100_000)
            .map(|_| {
                v = phi * v + rng.sample::<f64, _>(StandardNormal);
                v
            })
            .collect();
        let expect = 100_000.0 * (1.0 - phi) / (1.0 + phi);
        let ess = effective_sample_size(&x);
        assert!((ess / expect - 1.0).abs() < 0.15, "{ess} vs {expect}");
    }

    #[test]
    fn quantile_endpoints() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(sorted_quantile(&v, 0.025), 2.5);
        assert_eq!(sorted_quantile(&v, 0.975), 97.5);
        assert_eq!(sorted_quantile(&v, 0.0), 0.0);
        assert_eq!(sorted_quantile(&v, 1.0), 100.0);
    }
}
