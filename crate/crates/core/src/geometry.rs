//! Projection maps, ellipsoids and cones in ℝⁿ.
//!
//! Everything here is a pure function of its inputs. Sets are classified with
//! closed-set semantics: a point whose defining residual lies within
//! [`TOL_SET`] of zero is on the [`RegionSide::Boundary`] and therefore
//! belongs to both the closed interior and the closed exterior.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::min_quadratic_on_sphere;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Absolute tolerance on the dimensionless set residuals.
pub const TOL_SET: f64 = 1e-9;
/// Below this norm a direction vector is treated as zero.
pub const TOL_ZERO: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;

fn checked_norm_sq(z: &Vector) -> Result<f64> {
    let n = z.norm();
    if !(n > TOL_ZERO) {
        return Err(Error::ZeroDirection);
    }
    Ok(n * n)
}

/// `π∥(z) x`, the projection of `x` onto the line spanned by `z`.
pub fn proj_parallel(z: &Vector, x: &Vector) -> Result<Vector> {
    let nz = checked_norm_sq(z)?;
    Ok(z * (z.dot(x) / nz))
}

/// `π⊥(z) x`, the projection of `x` onto the hyperplane orthogonal to `z`.
pub fn proj_orthogonal(z: &Vector, x: &Vector) -> Result<Vector> {
    let nz = checked_norm_sq(z)?;
    Ok(x - z * (z.dot(x) / nz))
}

/// Householder reflection of `x` about the hyperplane orthogonal to `z`.
pub fn reflect(z: &Vector, x: &Vector) -> Result<Vector> {
    let nz = checked_norm_sq(z)?;
    Ok(x - z * (2.0 * z.dot(x) / nz))
}

pub fn parallel_matrix(z: &Vector) -> Result<Matrix> {
    let nz = checked_norm_sq(z)?;
    Ok(z * z.transpose() / nz)
}

pub fn orthogonal_matrix(z: &Vector) -> Result<Matrix> {
    Ok(Matrix::identity(z.len(), z.len()) - parallel_matrix(z)?)
}

pub fn reflector_matrix(z: &Vector) -> Result<Matrix> {
    Ok(Matrix::identity(z.len(), z.len()) - parallel_matrix(z)? * 2.0)
}

/// The parametric map `cos²θ π⊥(z) − sin²θ π∥(z)`.
pub fn proj_theta(z: &Vector, theta: f64) -> Result<Matrix> {
    let par = parallel_matrix(z)?;
    let perp = Matrix::identity(z.len(), z.len()) - &par;
    let (s, c) = theta.sin_cos();
    Ok(perp * (c * c) - par * (s * s))
}

/// Symmetric positive definite matrix with its inverse, square and extreme
/// eigenvalues cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: Matrix,
    inv: Matrix,
    sq: Matrix,
    eigenvalues: Vector,
    eigenvectors: Matrix,
    lambda_min: f64,
    lambda_max: f64,
}

impl SpdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NonSpdMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonSpdMatrix("non-finite entry".into()));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NonSpdMatrix(format!(
                "not symmetric (max asymmetry {asym:e})"
            )));
        }
        let m = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m.clone());
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if !(lambda_min > 0.0) {
            return Err(Error::NonSpdMatrix(format!(
                "smallest eigenvalue {lambda_min:e} is not positive"
            )));
        }
        let inv_diag = eig.eigenvalues.map(|l| 1.0 / l);
        let q = &eig.eigenvectors;
        let inv = q * Matrix::from_diagonal(&inv_diag) * q.transpose();
        let inv = (&inv + inv.transpose()) * 0.5;
        let sq = &m * &m;
        Ok(Self {
            m,
            inv,
            sq,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            lambda_min,
            lambda_max,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n, n)).expect("identity is SPD")
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NonSpdMatrix("rows of unequal length".into()));
        }
        Self::new(Matrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    /// `s·M` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0, "SPD scaling factor must be positive");
        Self {
            m: &self.m * s,
            inv: &self.inv / s,
            sq: &self.sq * (s * s),
            eigenvalues: &self.eigenvalues * s,
            eigenvectors: self.eigenvectors.clone(),
            lambda_min: self.lambda_min * s,
            lambda_max: self.lambda_max * s,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inv
    }

    pub fn squared(&self) -> &Matrix {
        &self.sq
    }

    /// Eigenvalues, paired with the columns of [`SpdMatrix::eigenvectors`].
    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| self.m.row(r).iter().copied().collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionSide {
    Interior,
    Boundary,
    Exterior,
}

impl RegionSide {
    /// Member of the closed interior (`≤` variant).
    pub fn in_closed_interior(self) -> bool {
        self != RegionSide::Exterior
    }

    /// Member of the closed exterior (`≥` variant).
    pub fn in_closed_exterior(self) -> bool {
        self != RegionSide::Interior
    }
}

/// The ellipsoid `{x : ‖E(x−c)‖² = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidSpec {
    pub center: Vector,
    pub shape: SpdMatrix,
}

impl EllipsoidSpec {
    pub fn new(center: Vector, shape: SpdMatrix) -> Result<Self> {
        if center.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                got: center.len(),
            });
        }
        Ok(Self { center, shape })
    }

    /// `‖E(x−c)‖² − 1`; negative inside.
    pub fn residual(&self, x: &Vector) -> f64 {
        (self.shape.matrix() * (x - &self.center)).norm_squared() - 1.0
    }

    /// Largest Euclidean norm of a point of the solid ellipsoid.
    pub fn max_norm(&self) -> f64 {
        let einv = self.shape.inverse();
        let m = -(einv * einv);
        let b = -(einv * &self.center);
        let (v, _) = min_quadratic_on_sphere(&m, &b);
        (self.center.norm_squared() - v).max(0.0).sqrt()
    }

    /// Half-widths of the axis-aligned bounding box.
    pub fn half_widths(&self) -> Vector {
        let einv = self.shape.inverse();
        Vector::from_fn(self.center.len(), |k, _| einv.column(k).norm())
    }

    /// Closest point of the solid ellipsoid to `q`.
    pub fn project(&self, q: &Vector) -> Vector {
        if self.residual(q) <= 0.0 {
            return q.clone();
        }
        let lam = self.shape.eigenvalues();
        let basis = self.shape.eigenvectors();
        let d = basis.transpose() * (q - &self.center);
        let u = |t: f64| Vector::from_fn(d.len(), |k, _| d[k] / (1.0 + t * lam[k] * lam[k]));
        let excess = |t: f64| u(t).component_mul(lam).norm_squared() - 1.0;
        let mut hi = 1.0;
        while excess(hi) > 0.0 && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        &self.center + basis * u(hi)
    }
}

/// Euclidean distance between two solid ellipsoids (zero when they meet),
/// computed by alternating projections.
pub fn ellipsoid_distance(a: &EllipsoidSpec, b: &EllipsoidSpec) -> f64 {
    if a.residual(&b.center) <= 0.0 || b.residual(&a.center) <= 0.0 {
        return 0.0;
    }
    let scale = 1.0 + (&a.center - &b.center).norm();
    let mut x = a.project(&b.center);
    let mut y = b.project(&x);
    for _ in 0..200_000 {
        let x_next = a.project(&y);
        let y_next = b.project(&x_next);
        let moved = (&x_next - &x).norm() + (&y_next - &y).norm();
        x = x_next;
        y = y_next;
        if moved <= 1e-15 * scale {
            break;
        }
    }
    (x - y).norm()
}

pub fn ellipsoid_classify(e: &EllipsoidSpec, x: &Vector) -> RegionSide {
    let r = e.residual(x);
    if r.abs() <= TOL_SET {
        RegionSide::Boundary
    } else if r < 0.0 {
        RegionSide::Interior
    } else {
        RegionSide::Exterior
    }
}

/// A single nappe with vertex `c`, axis `v`, half-aperture `θ` measured in the
/// metric induced by `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    pub vertex: Vector,
    pub axis: Vector,
    pub half_aperture: f64,
    pub metric: SpdMatrix,
}

impl ConeSpec {
    pub fn new(vertex: Vector, axis: Vector, half_aperture: f64, metric: SpdMatrix) -> Result<Self> {
        if vertex.len() != metric.dim() || axis.len() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                got: if vertex.len() != metric.dim() {
                    vertex.len()
                } else {
                    axis.len()
                },
            });
        }
        if !(axis.norm() > TOL_ZERO) {
            return Err(Error::ZeroDirection);
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&half_aperture) {
            return Err(Error::BadParams(format!(
                "cone half-aperture {half_aperture} outside [0, pi/2]"
            )));
        }
        Ok(Self {
            vertex,
            axis,
            half_aperture,
            metric,
        })
    }

    /// `vᵀE²(x−c) − cosθ‖Ev‖‖E(x−c)‖`, normalized by `‖Ev‖‖E(x−c)‖` so that
    /// it equals `cos∠ − cosθ` (zero at the vertex). Positive inside.
    pub fn residual(&self, x: &Vector) -> f64 {
        let e = self.metric.matrix();
        let ev = e * &self.axis;
        let ed = e * (x - &self.vertex);
        let nd = ed.norm();
        if nd <= TOL_ZERO {
            return 0.0;
        }
        ev.dot(&ed) / (ev.norm() * nd) - self.half_aperture.cos()
    }
}

pub fn cone_classify(k: &ConeSpec, x: &Vector) -> RegionSide {
    let r = k.residual(x);
    if r.abs() <= TOL_SET {
        RegionSide::Boundary
    } else if r > 0.0 {
        RegionSide::Interior
    } else {
        RegionSide::Exterior
    }
}

/// `E π^θ(Ev) E (x−c)`, normal to the cone surface through `x`.
pub fn cone_normal(k: &ConeSpec, x: &Vector) -> Result<Vector> {
    let d = x - &k.vertex;
    if d.norm() <= TOL_ZERO {
        return Err(Error::DegenerateVertex);
    }
    let e = k.metric.matrix();
    let pt = proj_theta(&(e * &k.axis), k.half_aperture)?;
    Ok(e * pt * e * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn projections_axis_aligned() {
        let z = v(&[1.0, 0.0]);
        let x = v(&[3.0, 4.0]);
        assert_eq!(proj_parallel(&z, &x).unwrap(), v(&[3.0, 0.0]));
        assert_eq!(proj_orthogonal(&z, &x).unwrap(), v(&[0.0, 4.0]));
        assert_eq!(reflect(&z, &x).unwrap(), v(&[-3.0, 4.0]));
    }

    #[test]
    fn projections_diagonal_direction() {
        let z = v(&[1.0, 1.0]) / 2f64.sqrt();
        let x = v(&[2.0, 0.0]);
        assert_abs_diff_eq!(proj_parallel(&z, &x).unwrap(), v(&[1.0, 1.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(proj_orthogonal(&z, &x).unwrap(), v(&[1.0, -1.0]), epsilon = 1e-15);
    }

    #[test]
    fn projections_of_the_direction_itself() {
        let z = v(&[0.3, -1.7, 2.2]);
        assert_abs_diff_eq!(proj_parallel(&z, &z).unwrap(), z.clone(), epsilon = 1e-14);
        assert_abs_diff_eq!(proj_orthogonal(&z, &z).unwrap().norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(reflect(&z, &z).unwrap(), -z.clone(), epsilon = 1e-14);
    }

    #[test]
    fn zero_direction_rejected() {
        let z = v(&[0.0, 0.0]);
        let x = v(&[1.0, 0.0]);
        assert!(matches!(proj_parallel(&z, &x), Err(Error::ZeroDirection)));
        assert!(matches!(proj_orthogonal(&z, &x), Err(Error::ZeroDirection)));
        assert!(matches!(reflect(&z, &x), Err(Error::ZeroDirection)));
        assert!(matches!(proj_theta(&z, 0.3), Err(Error::ZeroDirection)));
    }

    #[test]
    fn proj_theta_special_angles() {
        let z = v(&[1.0, 0.0]);
        let m = proj_theta(&z, FRAC_PI_4).unwrap();
        // ½ρ(z) + ½cos(π/2) I = ½ diag(−1, 1)
        assert_abs_diff_eq!(m, Matrix::from_diagonal(&v(&[-0.5, 0.5])), epsilon = 1e-15);

        let z = v(&[0.4, 1.2, -0.5]);
        assert_abs_diff_eq!(proj_theta(&z, 0.0).unwrap(), orthogonal_matrix(&z).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            proj_theta(&z, FRAC_PI_2).unwrap(),
            -parallel_matrix(&z).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn spd_validation() {
        assert!(SpdMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).is_ok());
        assert!(matches!(
            SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]),
            Err(Error::NonSpdMatrix(_))
        ));
        assert!(matches!(
            SpdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.0, 1.0]]),
            Err(Error::NonSpdMatrix(_))
        ));
        let m = SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(m.lambda_min(), 1.0);
        assert_eq!(m.lambda_max(), 4.0);
        assert_abs_diff_eq!(m.matrix() * m.inverse(), Matrix::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn ellipsoid_sides() {
        let ball = EllipsoidSpec::new(v(&[0.0, 0.0]), SpdMatrix::identity(2)).unwrap();
        assert_eq!(ellipsoid_classify(&ball, &v(&[1.0, 0.0])), RegionSide::Boundary);
        assert_eq!(ellipsoid_classify(&ball, &v(&[0.0, 0.0])), RegionSide::Interior);
        assert_eq!(ellipsoid_classify(&ball, &v(&[1.0, 1.0])), RegionSide::Exterior);

        // corner of the helmet of the unit obstacle at (4, 0)
        let obstacle = EllipsoidSpec::new(v(&[4.0, 0.0]), SpdMatrix::identity(2)).unwrap();
        let corner = v(&[3.75, 15f64.sqrt() / 4.0]);
        assert_eq!(ellipsoid_classify(&obstacle, &corner), RegionSide::Boundary);
    }

    #[test]
    fn cone_sides() {
        let k = ConeSpec::new(v(&[0.0, 0.0]), v(&[1.0, 0.0]), FRAC_PI_4, SpdMatrix::identity(2)).unwrap();
        assert_eq!(cone_classify(&k, &v(&[1.0, 1.0])), RegionSide::Boundary);
        assert_eq!(cone_classify(&k, &v(&[1.0, 0.0])), RegionSide::Interior);
        assert_eq!(cone_classify(&k, &v(&[-1.0, 0.0])), RegionSide::Exterior);
        assert_eq!(cone_classify(&k, &v(&[0.0, 0.0])), RegionSide::Boundary);
    }

    #[test]
    fn cone_normal_examples() {
        let k = ConeSpec::new(v(&[0.0, 0.0]), v(&[1.0, 0.0]), FRAC_PI_4, SpdMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(cone_normal(&k, &v(&[1.0, 1.0])).unwrap(), v(&[-0.5, 0.5]), epsilon = 1e-15);
        let a = cone_normal(&k, &v(&[0.3, 0.7])).unwrap();
        let b = cone_normal(&k, &v(&[0.9, 2.1])).unwrap();
        assert_abs_diff_eq!(b, a * 3.0, epsilon = 1e-14);
        assert!(matches!(cone_normal(&k, &v(&[0.0, 0.0])), Err(Error::DegenerateVertex)));
    }

    #[test]
    fn ellipsoid_extent() {
        let e = EllipsoidSpec::new(v(&[4.0, 0.0]), SpdMatrix::identity(2).scaled(0.8)).unwrap();
        assert_abs_diff_eq!(e.max_norm(), 5.25, epsilon = 1e-12);
        assert_abs_diff_eq!(e.half_widths(), v(&[1.25, 1.25]), epsilon = 1e-15);
        let f = EllipsoidSpec::new(v(&[0.0, 0.0]), SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.25]]).unwrap()).unwrap();
        assert_abs_diff_eq!(f.max_norm(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.project(&v(&[3.0, 0.0])), v(&[1.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn distance_between_balls() {
        let a = EllipsoidSpec::new(v(&[0.0, 0.0]), SpdMatrix::identity(2)).unwrap();
        let b = EllipsoidSpec::new(v(&[3.0, 4.0]), SpdMatrix::identity(2).scaled(0.5)).unwrap();
        assert_abs_diff_eq!(ellipsoid_distance(&a, &b), 2.0, epsilon = 1e-9);
        let c = EllipsoidSpec::new(v(&[1.5, 0.0]), SpdMatrix::identity(2)).unwrap();
        assert_eq!(ellipsoid_distance(&a, &c), 0.0);
    }

    #[test]
    fn cone_rejects_bad_inputs() {
        let e = SpdMatrix::identity(2);
        assert!(ConeSpec::new(v(&[0.0, 0.0]), v(&[0.0, 0.0]), 0.3, e.clone()).is_err());
        assert!(ConeSpec::new(v(&[0.0, 0.0]), v(&[1.0, 0.0]), 2.0, e).is_err());
    }
}
