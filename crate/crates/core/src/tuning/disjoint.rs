//! Disjointness of ellipsoids and of the escape regions.

use crate::error::{Error, Result};
use crate::geometry::{EllipsoidSpec, Matrix, Vector, TOL_SET};

const BISECTION_ITERS: usize = 200;

/// Minimum of `‖E₂(x − c₂)‖²` over the solid ellipsoid `𝓔≤(c₁, E₁)`, with a
/// minimizer.
///
/// The minimizer follows the curve `x(λ) = (E₂² + λE₁²)⁻¹(E₂²c₂ + λE₁²c₁)`;
/// `λ` is searched as `t = λ/(1 + λ) ∈ [0, 1]` so the bracket is fixed.
pub fn min_metric_over(region: &EllipsoidSpec, metric: &EllipsoidSpec) -> Result<(f64, Vector)> {
    if region.center.len() != metric.center.len() {
        return Err(Error::DimensionMismatch {
            expected: region.center.len(),
            got: metric.center.len(),
        });
    }
    let value = |x: &Vector| (metric.shape.matrix() * (x - &metric.center)).norm_squared();
    if region.residual(&metric.center) <= 0.0 {
        return Ok((0.0, metric.center.clone()));
    }
    let (a1, a2) = (region.shape.squared(), metric.shape.squared());
    let (r1, r2) = (a1 * &region.center, a2 * &metric.center);
    let point = |t: f64| -> Result<Vector> {
        let m: Matrix = a2 * (1.0 - t) + a1 * t;
        let rhs = &r2 * (1.0 - t) + &r1 * t;
        m.cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or_else(|| Error::SolverFailure("singular KKT system in disjointness test".into()))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = region.residual(&point(mid)?);
        if !g.is_finite() {
            return Err(Error::SolverFailure("non-finite residual in disjointness test".into()));
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = point(hi)?;
    Ok((value(&x), x))
}

/// The two solid ellipsoids do not meet.
pub fn weak_disjoint(a: &EllipsoidSpec, b: &EllipsoidSpec) -> Result<bool> {
    Ok(min_metric_over(a, b)?.0 > 1.0 + TOL_SET)
}

/// Sufficient test from the eigenvalues: `1/λmin(E₁) + 1/λmin(E₂) < ‖c₁ − c₂‖`.
pub fn strong_disjoint(a: &EllipsoidSpec, b: &EllipsoidSpec) -> bool {
    1.0 / a.shape.lambda_min() + 1.0 / b.shape.lambda_min() < (&a.center - &b.center).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpdMatrix;
    use approx::assert_abs_diff_eq;

    fn ball(x: f64) -> EllipsoidSpec {
        EllipsoidSpec::new(Vector::from_column_slice(&[x, 0.0]), SpdMatrix::identity(2)).unwrap()
    }

    #[test]
    fn collinear_balls() {
        let (v, x) = min_metric_over(&ball(0.0), &ball(3.0)).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert!(weak_disjoint(&ball(0.0), &ball(3.0)).unwrap());
        let (v, _) = min_metric_over(&ball(0.0), &ball(1.5)).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
        let (v, _) = min_metric_over(&ball(0.0), &ball(0.5)).unwrap();
        assert_eq!(v, 0.0);
        assert!(!weak_disjoint(&ball(0.0), &ball(1.5)).unwrap());
    }

    #[test]
    fn ellipse_gap() {
        let a = EllipsoidSpec::new(
            Vector::from_column_slice(&[0.0, 0.0]),
            SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap(),
        )
        .unwrap();
        let (v, _) = min_metric_over(&a, &ball(2.2)).unwrap();
        assert_abs_diff_eq!(v, 1.2 * 1.2, epsilon = 1e-10);
        assert!(weak_disjoint(&a, &ball(2.2)).unwrap());
    }

    #[test]
    fn strong_examples() {
        assert!(strong_disjoint(&ball(0.0), &ball(3.0)));
        assert!(!strong_disjoint(&ball(0.0), &ball(2.0)));
    }
}
