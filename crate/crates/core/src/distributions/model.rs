//! The bivariate pseudo-exponential law: `X ~ Exp(θ1)` and
//! `Y | X = x ~ Exp(θ2 + θ3 x)`.

use rand::Rng;

use super::gamma::sample_exponential;
use super::{BivariateSample, ModelVariant, PseudoExpParams};
use crate::error::{Error, Result};

/// Log joint density
/// `ln θ1 - θ1 x + ln(θ2 + θ3 x) - (θ2 + θ3 x) y`.
pub fn joint_logpdf(
    params: &PseudoExpParams,
    variant: ModelVariant,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!(
            "density support is x > 0, y > 0 (got x = {x}, y = {y})"
        )));
    }
    variant.check(params)?;
    let rate = params.conditional_rate(x);
    Ok(params.theta1.ln() - params.theta1 * x + rate.ln() - rate * y)
}

pub fn joint_pdf(params: &PseudoExpParams, variant: ModelVariant, x: f64, y: f64) -> Result<f64> {
    joint_logpdf(params, variant, x, y).map(f64::exp)
}

/// Draws `n` i.i.d. pairs by composition.
pub fn sample_bivariate<R: Rng + ?Sized>(
    params: &PseudoExpParams,
    variant: ModelVariant,
    n: usize,
    rng: &mut R,
) -> Result<BivariateSample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    variant.check(params)?;
    let pairs = (0..n)
        .map(|_| {
            let x = sample_exponential(params.theta1, rng);
            let y = sample_exponential(params.conditional_rate(x), rng);
            (x, y)
        })
        .collect();
    BivariateSample::new(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn substitution_examples() {
        let full = PseudoExpParams::new(1.0, 1.0, 1.0).unwrap();
        let v = joint_logpdf(&full, ModelVariant::Full, 1.0, 1.0).unwrap();
        assert!((v - (2.0 * (-3f64).exp()).ln()).abs() < 1e-14);
        assert!((v + 2.306_852_819_440_055).abs() < 1e-12);

        let s1 = PseudoExpParams::sub_model_one(2.0, 5.0).unwrap();
        let v = joint_logpdf(&s1, ModelVariant::SubModelI, 1.0, 0.1).unwrap();
        assert!((v - (20.0 * (-3f64).exp()).ln()).abs() < 1e-14);

        let s2 = PseudoExpParams::sub_model_two(2.0, 5.0).unwrap();
        let v = joint_logpdf(&s2, ModelVariant::SubModelII, 1.0, 0.1).unwrap();
        assert!((v - (10.0 * (-2.5f64).exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn domain_and_constraint_errors() {
        let p = PseudoExpParams::new(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            joint_logpdf(&p, ModelVariant::Full, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            joint_logpdf(&p, ModelVariant::Full, 1.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            joint_logpdf(&p, ModelVariant::SubModelI, 1.0, 1.0),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let p = PseudoExpParams::new(2.0, 1.0, 3.0).unwrap();
        let a = sample_bivariate(&p, ModelVariant::Full, 1, &mut seeded(5)).unwrap();
        let b = sample_bivariate(&p, ModelVariant::Full, 1, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
        assert!(sample_bivariate(&p, ModelVariant::Full, 0, &mut seeded(5)).is_err());
    }
}
