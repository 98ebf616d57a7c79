//! Central finite-difference gradient estimation.
//!
//! This is the independent oracle every hand-derived backward pass in the
//! crate is verified against. It must stay free of any dependency on the
//! analytic gradient code paths.

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Central-difference gradient estimate of a scalar function `f` at `theta`:
/// `(f(theta + eps*e_i) - f(theta - eps*e_i)) / (2*eps)` per coordinate.
///
/// `f` must be deterministic. A non-finite evaluation is reported together
/// with the coordinate being perturbed.
pub fn finite_difference_gradient<F>(mut f: F, theta: &[f64], eps: f64) -> Result<Vector>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(eps > 0.0, "eps must be positive");
    let mut point = theta.to_vec();
    let mut grad = Vector::zeros(theta.len());
    for i in 0..theta.len() {
        let original = point[i];
        point[i] = original + eps;
        let plus = f(&point);
        point[i] = original - eps;
        let minus = f(&point);
        point[i] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite {
                context: format!("finite difference at coordinate {i}"),
            });
        }
        grad.set(i, (plus - minus) / (2.0 * eps));
    }
    Ok(grad)
}

/// Relative error between an analytic and a numeric gradient entry.
///
/// Scaled by the larger magnitude; when both are below `floor` the pair is
/// treated as an exact match (zero gradients agree with finite-difference
/// noise at the 1e-8 level).
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-8;
    let scale = analytic.abs().max(numeric.abs());
    if scale <= FLOOR {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_uniform_init, softmax, Matrix, Rng};

    #[test]
    fn gradient_of_square() {
        let grad = finite_difference_gradient(|x| x[0] * x[0], &[3.0], 1e-4).unwrap();
        assert!((grad.get(0) - 6.0).abs() < 1e-7);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let grad = finite_difference_gradient(|_| 4.25, &[1.0, -2.0, 0.5], 1e-4).unwrap();
        assert!(grad.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn non_finite_evaluation_names_coordinate() {
        let err = finite_difference_gradient(
            |x| if x[1] > 1.0 { f64::NAN } else { 0.0 },
            &[0.0, 1.0],
            1e-2,
        )
        .unwrap_err();
        assert!(err.to_string().contains("coordinate 1"), "{err}");
    }

    #[test]
    fn quadratic_form_gradient_matches_closed_form() {
        // grad of 0.5 * theta^T A theta is 0.5 * (A + A^T) theta.
        let mut rng = Rng::new(41);
        let n = 5;
        let a = random_uniform_init(n, n, 1.0, &mut rng);
        let theta: Vec<f64> = (0..n).map(|_| rng.uniform(2.0)).collect();

        let f = |x: &[f64]| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += 0.5 * x[i] * a.get(i, j) * x[j];
                }
            }
            acc
        };
        let numeric = finite_difference_gradient(f, &theta, 1e-5).unwrap();

        let mut sym = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sym.set(i, j, 0.5 * (a.get(i, j) + a.get(j, i)));
            }
        }
        for i in 0..n {
            let analytic: f64 = (0..n).map(|j| sym.get(i, j) * theta[j]).sum();
            assert!(
                relative_error(analytic, numeric.get(i)) < 1e-6,
                "coord {i}: {analytic} vs {}",
                numeric.get(i)
            );
        }
    }

    #[test]
    fn two_class_cross_entropy_matches_analytic_gradient() {
        // Fixed 2-class softmax model on one example: L(w) = -ln p_gold with
        // logits w (the parameters themselves). Analytic: p - onehot(gold).
        let logits = [0.3, -0.7];
        let gold = 0usize;
        let loss = |w: &[f64]| {
            let p = softmax(&Vector::from_slice(w));
            -p.get(gold).ln()
        };
        let numeric = finite_difference_gradient(loss, &logits, 1e-4).unwrap();
        let p = softmax(&Vector::from_slice(&logits));
        for i in 0..2 {
            let analytic = p.get(i) - if i == gold { 1.0 } else { 0.0 };
            assert!(
                relative_error(analytic, numeric.get(i)) < 1e-6,
                "coord {i}"
            );
        }
    }

    #[test]
    fn relative_error_floors_tiny_pairs() {
        assert_eq!(relative_error(0.0, 5e-9), 0.0);
        assert!(relative_error(1.0, 1.1) > 0.09);
    }
}
