//! Log-likelihood in its factored form and maximum-likelihood estimation.
//!
//! The log-likelihood splits into a term in `θ1` alone and a term in
//! `(θ2, θ3)` alone, so `θ1` is always estimated by `n / Σx`. The conditional
//! term is concave in `(θ2, θ3)`; for the full model it is maximized by
//! projected Newton over the nonnegative quadrant.

use serde::{Deserialize, Serialize};

use crate::distributions::{BivariateSample, ModelVariant, PseudoExpParams};
use crate::error::{Error, Result};

/// The two factors of the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactoredLogLikelihood {
    /// `n ln θ1 - θ1 Σx`
    pub marginal_term: f64,
    /// Everything involving `θ2` and `θ3`.
    pub conditional_term: f64,
}

impl FactoredLogLikelihood {
    pub fn total(&self) -> f64 {
        self.marginal_term + self.conditional_term
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub params: PseudoExpParams,
    pub loglik_at_max: f64,
    pub converged: bool,
    pub iterations: usize,
    /// True when `θ2` or `θ3` sits at zero.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Bound on the projected-gradient norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

pub fn log_likelihood(
    sample: &BivariateSample,
    params: &PseudoExpParams,
    variant: ModelVariant,
) -> Result<FactoredLogLikelihood> {
    variant.check(params)?;
    let n = sample.n();
    let marginal_term = n * params.theta1.ln() - params.theta1 * sample.sum_x();
    let t3 = params.theta3;
    let conditional_term = match variant {
        ModelVariant::Full => {
            let v = conditional_log_likelihood(sample, params.theta2, t3);
            if v == f64::NEG_INFINITY {
                return Err(Error::Domain(
                    "conditional rate theta2 + theta3 x vanishes for some observation".into(),
                ));
            }
            v
        }
        ModelVariant::SubModelI => {
            n * t3.ln() + sample.sum_log_1p_x() - t3 * (sample.sum_y() + sample.sum_xy())
        }
        ModelVariant::SubModelII => n * t3.ln() + sample.sum_log_x() - t3 * sample.sum_xy(),
    };
    Ok(FactoredLogLikelihood {
        marginal_term,
        conditional_term,
    })
}

/// `Σ ln(θ2 + θ3 x_i) - θ2 Σy - θ3 Σxy`; `-inf` outside the closed quadrant
/// or wherever a conditional rate is zero.
pub fn conditional_log_likelihood(sample: &BivariateSample, theta2: f64, theta3: f64) -> f64 {
    if !(theta2 >= 0.0 && theta3 >= 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &(x, _) in sample.pairs() {
        let r = theta2 + theta3 * x;
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += r.ln();
    }
    acc - theta2 * sample.sum_y() - theta3 * sample.sum_xy()
}

/// Gradient of [`conditional_log_likelihood`] with respect to `(θ2, θ3)`.
pub fn conditional_gradient(sample: &BivariateSample, theta2: f64, theta3: f64) -> [f64; 2] {
    let (g, _) = gradient_and_hessian(sample, theta2, theta3);
    g
}

/// Hessian `[[h22, h23], [h23, h33]]` of the conditional term.
pub fn conditional_hessian(sample: &BivariateSample, theta2: f64, theta3: f64) -> [[f64; 2]; 2] {
    let (_, h) = gradient_and_hessian(sample, theta2, theta3);
    h
}

fn gradient_and_hessian(sample: &BivariateSample, a: f64, b: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, _) in sample.pairs() {
        let inv = 1.0 / (a + b * x);
        let inv2 = inv * inv;
        ga += inv;
        gb += x * inv;
        haa -= inv2;
        hab -= x * inv2;
        hbb -= x * x * inv2;
    }
    (
        [ga - sample.sum_y(), gb - sample.sum_xy()],
        [[haa, hab], [hab, hbb]],
    )
}

/// Closed-form MLE for sub-model I: `θ1 = n/Σx`, `θ3 = n/(Σy + Σxy)`.
pub fn mle_submodel1(sample: &BivariateSample) -> MleResult {
    let n = sample.n();
    let params = PseudoExpParams::sub_model_one(
        n / sample.sum_x(),
        n / (sample.sum_y() + sample.sum_xy()),
    )
    .expect("positive sufficient statistics give valid estimates");
    closed_form(sample, params, ModelVariant::SubModelI)
}

/// Closed-form MLE for sub-model II: `θ1 = n/Σx`, `θ3 = n/Σxy`.
pub fn mle_submodel2(sample: &BivariateSample) -> MleResult {
    let n = sample.n();
    let params = PseudoExpParams::sub_model_two(n / sample.sum_x(), n / sample.sum_xy())
        .expect("positive sufficient statistics give valid estimates");
    closed_form(sample, params, ModelVariant::SubModelII)
}

fn closed_form(sample: &BivariateSample, params: PseudoExpParams, variant: ModelVariant) -> MleResult {
    let ll = log_likelihood(sample, &params, variant).expect("closed-form estimate is valid");
    MleResult {
        params,
        loglik_at_max: ll.total(),
        converged: true,
        iterations: 0,
        on_boundary: false,
    }
}

/// MLE for the variant, dispatching to the closed forms for the sub-models.
pub fn mle(sample: &BivariateSample, variant: ModelVariant, options: &MleOptions) -> MleResult {
    match variant {
        ModelVariant::Full => mle_full(sample, options),
        ModelVariant::SubModelI => mle_submodel1(sample),
        ModelVariant::SubModelII => mle_submodel2(sample),
    }
}

fn projected_gradient_norm(z: [f64; 2], g: [f64; 2]) -> f64 {
    z.iter()
        .zip(g)
        .map(|(&zi, gi)| if zi <= 0.0 { gi.max(0.0) } else { gi })
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Full-model MLE. `θ1 = n/Σx`; `(θ2, θ3)` by projected Newton with Armijo
/// backtracking on the nonnegative quadrant. On non-convergence the best
/// iterate is returned with `converged = false`.
pub fn mle_full(sample: &BivariateSample, options: &MleOptions) -> MleResult {
    let n = sample.n();
    let theta1 = n / sample.sum_x();
    let start = n / (sample.sum_y() + sample.sum_xy());
    let mut z = [start, start];
    let mut value = conditional_log_likelihood(sample, z[0], z[1]);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        let (g, h) = gradient_and_hessian(sample, z[0], z[1]);
        if projected_gradient_norm(z, g) < options.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let free = [z[0] > 0.0 || g[0] > 0.0, z[1] > 0.0 || g[1] > 0.0];
        let direction = newton_direction(g, h, free);
        let slope = g[0] * direction[0] + g[1] * direction[1];
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let trial = [
                (z[0] + step * direction[0]).max(0.0),
                (z[1] + step * direction[1]).max(0.0),
            ];
            let trial_value = conditional_log_likelihood(sample, trial[0], trial[1]);
            let gain = g[0] * (trial[0] - z[0]) + g[1] * (trial[1] - z[1]);
            if trial_value.is_finite() && trial_value >= value + 1e-4 * gain.min(step * slope) {
                moved = trial != z;
                z = trial;
                value = trial_value;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            let (g, _) = gradient_and_hessian(sample, z[0], z[1]);
            converged = projected_gradient_norm(z, g) < options.tol;
            break;
        }
    }

    // Snap coordinates that are numerically zero onto the boundary.
    for i in 0..2 {
        if z[i] > 0.0 && z[i] < 1e-9 * (z[0] + z[1]) {
            let mut snapped = z;
            snapped[i] = 0.0;
            let v = conditional_log_likelihood(sample, snapped[0], snapped[1]);
            if v >= value - 1e-12 * value.abs().max(1.0) {
                z = snapped;
                value = v;
            }
        }
    }
    let (g, _) = gradient_and_hessian(sample, z[0], z[1]);
    converged = converged && projected_gradient_norm(z, g) < options.tol.max(1e-9 * n);

    let params = PseudoExpParams {
        theta1,
        theta2: z[0],
        theta3: z[1],
    };
    MleResult {
        params,
        loglik_at_max: n * theta1.ln() - theta1 * sample.sum_x() + value,
        converged,
        iterations,
        on_boundary: z[0] == 0.0 || z[1] == 0.0,
    }
}

// Ascent direction on the free coordinates: Newton where the negated Hessian
// block is positive definite, scaled gradient otherwise.
fn newton_direction(g: [f64; 2], h: [[f64; 2]; 2], free: [bool; 2]) -> [f64; 2] {
    match free {
        [true, true] => {
            let (a, b, c) = (-h[0][0], -h[0][1], -h[1][1]);
            let det = a * c - b * b;
            if a > 0.0 && det > 1e-14 * a * c {
                [(c * g[0] - b * g[1]) / det, (a * g[1] - b * g[0]) / det]
            } else {
                let scale = 1.0 / (a + c).max(f64::MIN_POSITIVE);
                [g[0] * scale, g[1] * scale]
            }
        }
        [true, false] => [g[0] / (-h[0][0]).max(f64::MIN_POSITIVE), 0.0],
        [false, true] => [0.0, g[1] / (-h[1][1]).max(f64::MIN_POSITIVE)],
        [false, false] => [0.0, 0.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{joint_logpdf, sample_bivariate};
    use crate::rng::seeded;

    fn sample(pairs: &[(f64, f64)]) -> BivariateSample {
        BivariateSample::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn single_point_factors() {
        let s = sample(&[(1.0, 1.0)]);
        let p = PseudoExpParams::new(1.0, 1.0, 1.0).unwrap();
        let ll = log_likelihood(&s, &p, ModelVariant::Full).unwrap();
        assert!((ll.marginal_term + 1.0).abs() < 1e-15);
        assert!((ll.conditional_term - (2f64.ln() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn sub_model_two_conditional_shape() {
        let s = sample(&[(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)]);
        let p = PseudoExpParams::sub_model_two(1.5, 2.5).unwrap();
        let ll = log_likelihood(&s, &p, ModelVariant::SubModelII).unwrap();
        let expect = 3.0 * 2.5f64.ln() + (1.0f64 * 2.0 * 0.3).ln() - 2.5 * s.sum_xy();
        assert!((ll.conditional_term - expect).abs() < 1e-13);
    }

    #[test]
    fn factorization_matches_pointwise_sum() {
        let mut rng = seeded(17);
        let truth = PseudoExpParams::new(1.3, 0.7, 2.1).unwrap();
        let s = sample_bivariate(&truth, ModelVariant::Full, 25, &mut rng).unwrap();
        for (variant, p) in [
            (ModelVariant::Full, PseudoExpParams::new(0.9, 0.4, 1.7).unwrap()),
            (ModelVariant::SubModelI, PseudoExpParams::sub_model_one(2.2, 1.1).unwrap()),
            (ModelVariant::SubModelII, PseudoExpParams::sub_model_two(0.6, 3.0).unwrap()),
        ] {
            let ll = log_likelihood(&s, &p, variant).unwrap();
            let direct: f64 = s
                .pairs()
                .iter()
                .map(|&(x, y)| joint_logpdf(&p, variant, x, y).unwrap())
                .sum();
            assert!((ll.total() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_estimates() {
        let s = sample(&[(1.0, 1.0), (2.0, 0.5)]);
        let m1 = mle_submodel1(&s);
        assert!((m1.params.theta1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m1.params.theta3 - 2.0 / 3.5).abs() < 1e-15);
        assert_eq!(m1.params.theta2, m1.params.theta3);
        let m2 = mle_submodel2(&s);
        assert!((m2.params.theta1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m2.params.theta3, 1.0);
        assert_eq!(m2.params.theta2, 0.0);

        let one = mle_submodel1(&sample(&[(1.0, 1.0)]));
        assert_eq!((one.params.theta1, one.params.theta3), (1.0, 0.5));
        let two = mle_submodel2(&sample(&[(2.0, 3.0)]));
        assert_eq!((two.params.theta1, two.params.theta3), (0.5, 1.0 / 6.0));
    }

    // Brute-force maximizer on a grid over [0, hi]^2.
    fn grid_argmax(s: &BivariateSample, hi: f64, steps: usize) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..=steps {
            for j in 0..=steps {
                let (a, b) = (hi * i as f64 / steps as f64, hi * j as f64 / steps as f64);
                let v = conditional_log_likelihood(s, a, b);
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        best
    }

    #[test]
    fn full_mle_boundary_example() {
        let s = sample(&[(1.0, 1.0), (2.0, 1.0)]);
        let m = mle_full(&s, &MleOptions::default());
        assert!(m.converged);
        assert!(m.on_boundary);
        assert!((m.params.theta2 - 1.0).abs() < 1e-8, "{:?}", m.params);
        assert_eq!(m.params.theta3, 0.0);
        let (a, b, v) = grid_argmax(&s, 3.0, 600);
        assert!((a - 1.0).abs() <= 0.005 && b <= 0.005);
        assert!(conditional_log_likelihood(&s, m.params.theta2, m.params.theta3) >= v);
    }

    #[test]
    fn full_mle_dominates_grid_and_nested_models() {
        let mut rng = seeded(23);
        let truth = PseudoExpParams::new(2.0, 1.0, 3.0).unwrap();
        let s = sample_bivariate(&truth, ModelVariant::Full, 40, &mut rng).unwrap();
        let m = mle_full(&s, &MleOptions::default());
        assert!(m.converged);
        let at = |p: &PseudoExpParams| conditional_log_likelihood(&s, p.theta2, p.theta3);
        let best = at(&m.params);
        assert!(best >= at(&mle_submodel1(&s).params));
        assert!(best >= at(&mle_submodel2(&s).params));
        let (_, _, grid_best) = grid_argmax(&s, 10.0, 400);
        assert!(best >= grid_best - 1e-12);
    }

    #[test]
    fn full_mle_on_sub_model_two_data_shrinks_theta2() {
        let mut rng = seeded(29);
        let truth = PseudoExpParams::sub_model_two(2.0, 5.0).unwrap();
        let s = sample_bivariate(&truth, ModelVariant::SubModelII, 20_000, &mut rng).unwrap();
        let m = mle_full(&s, &MleOptions::default());
        assert!(m.converged);
        assert!(m.params.theta2 < 0.05, "{:?}", m.params);
        assert!((m.params.theta3 - 5.0).abs() < 0.25);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let mut rng = seeded(31);
        let truth = PseudoExpParams::new(1.0, 0.8, 2.0).unwrap();
        let s = sample_bivariate(&truth, ModelVariant::Full, 50, &mut rng).unwrap();
        for &(a, b) in &[(0.5, 1.0), (2.0, 0.3), (0.05, 4.0)] {
            let g = conditional_gradient(&s, a, b);
            let (ha, hb) = (1e-6 * a, 1e-6 * b);
            let fd_a = (conditional_log_likelihood(&s, a + ha, b)
                - conditional_log_likelihood(&s, a - ha, b))
                / (2.0 * ha);
            let fd_b = (conditional_log_likelihood(&s, a, b + hb)
                - conditional_log_likelihood(&s, a, b - hb))
                / (2.0 * hb);
            assert!((g[0] - fd_a).abs() <= 1e-4 * g[0].abs().max(1.0));
            assert!((g[1] - fd_b).abs() <= 1e-4 * g[1].abs().max(1.0));
        }
    }

    #[test]
    fn full_mle_recovers_sub_model_two_on_its_face() {
        // Here the maximizer lies on theta2 = 0 with theta3 interior.
        let s = sample(&[(1.0, 2.0), (2.0, 0.1)]);
        let m = mle_full(&s, &MleOptions::default());
        assert!(m.converged && m.on_boundary);
        assert_eq!(m.params.theta2, 0.0);
        let sub = mle_submodel2(&s);
        assert!((m.params.theta3 - sub.params.theta3).abs() < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn conditional_term_is_concave(
            xs in proptest::collection::vec((0.01f64..5.0, 0.01f64..5.0), 1..30),
            a0 in 0.0f64..5.0, b0 in 0.01f64..5.0,
            a1 in 0.0f64..5.0, b1 in 0.01f64..5.0,
        ) {
            let s = BivariateSample::new(xs).unwrap();
            let f0 = conditional_log_likelihood(&s, a0, b0);
            let f1 = conditional_log_likelihood(&s, a1, b1);
            let mid = conditional_log_likelihood(&s, 0.5 * (a0 + a1), 0.5 * (b0 + b1));
            let avg = 0.5 * (f0 + f1);
            proptest::prop_assert!(mid >= avg - 1e-10 * avg.abs().max(1.0));
        }
    }
}
