//! Construction of the auxiliary points `p₁`, `p₋₁` on the cone
//! `C(c, −c, θ, E)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::{proj_orthogonal, reflect, Vector, TOL_ZERO};
use crate::obstacle::Obstacle;

const HINT_TOL: f64 = 1e-8;

/// Unit vector orthogonal to the unit vector `a` spanning, with `a`, the
/// rotation plane.
pub(crate) fn rotation_partner(a: &Vector, axis_hint: Option<&Vector>) -> Result<Vector> {
    let n = a.len();
    if let Some(h) = axis_hint {
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.len(),
            });
        }
        let hn = h.norm();
        if !(hn > TOL_ZERO) {
            return Err(Error::DegenerateHint);
        }
        let w = proj_orthogonal(a, h)?;
        if w.norm() <= HINT_TOL * hn {
            return Err(Error::DegenerateHint);
        }
        return Ok(w.normalize());
    }
    if n == 2 {
        return Ok(Vector::from_column_slice(&[-a[1], a[0]]));
    }
    for k in 0..n {
        let w = proj_orthogonal(a, &Vector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 }))?;
        if w.norm() > HINT_TOL {
            return Ok(w.normalize());
        }
    }
    unreachable!("a unit vector is parallel to at most one canonical direction")
}

/// Rotation by `theta` in the oriented plane spanned by the orthonormal pair
/// `(a, w)`, applied to `y`.
fn rotate(a: &Vector, w: &Vector, theta: f64, y: &Vector) -> Vector {
    let (s, c) = theta.sin_cos();
    let (ya, yw) = (a.dot(y), w.dot(y));
    y + a * ((c - 1.0) * ya - s * yw) + w * (s * ya + (c - 1.0) * yw)
}

/// `p₁ = π⊥(E⁻¹R(θ)Ec) c` and `p₋₁ = −E⁻¹ρ(Ec)E p₁`.
///
/// `R(θ)` rotates `Ec` towards the partner direction: the counterclockwise
/// normal in the plane, the component of `axis_hint` orthogonal to `Ec` when
/// given, and otherwise the first canonical direction not parallel to `Ec`.
pub fn avoidance_points(o: &Obstacle, theta: f64, axis_hint: Option<&Vector>) -> Result<(Vector, Vector)> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::BadParams(format!("theta = {theta} outside (0, pi/2)")));
    }
    let e = o.shape().matrix();
    let einv = o.shape().inverse();
    let c = o.center();
    let ec = e * c;
    let a = ec.normalize();
    let w = rotation_partner(&a, axis_hint)?;
    let z = einv * rotate(&a, &w, theta, &ec);
    if !(z.dot(c) > TOL_ZERO * z.norm() * c.norm()) {
        return Err(Error::BadParams(format!(
            "rotation by theta = {theta} turns E^-1 R E c away from c; choose a smaller theta"
        )));
    }
    let p1 = proj_orthogonal(&z, c)?;
    let pm1 = -(einv * reflect(&ec, &(e * &p1))?);
    Ok((p1, pm1))
}
