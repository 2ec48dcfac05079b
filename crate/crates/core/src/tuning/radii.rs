//! Minimum-norm points of the helmets and the escape regions next to them.
//!
//! In the coordinates `y = Ex` of one obstacle, every set involved is bounded
//! by spheres centred on the line through `a = Ec` or by cones with vertex at
//! the origin and axis `a`. Along a ray `y = s·ĝ` from the origin, with
//! `cos φ = ĝᵀa/‖a‖`, each of these constraints is an interval condition on
//! `s` with closed-form endpoints. The problems therefore reduce to a search
//! over ray directions `ĝ = cos φ·â + sin φ·w`, `w ⟂ â`; for the minimum-norm
//! problems the minimization over `w` is itself exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector, TOL_SET};
use crate::numeric::{min_quadratic_on_sphere, scan_min};
use crate::obstacle::Obstacle;
use crate::tuning::bounds::cos_vartheta;

const PHI_GRID: usize = 2048;

/// Orthonormal frame in `y = Ex` coordinates: `â` and a basis of `â⊥`.
pub(crate) struct RayFrame {
    pub(crate) a_norm: f64,
    pub(crate) a_hat: Vector,
    pub(crate) perp: Matrix,
    pub(crate) einv: Matrix,
}

impl RayFrame {
    pub(crate) fn new(o: &Obstacle) -> Self {
        let a = o.shape().matrix() * o.center();
        let a_norm = a.norm();
        let a_hat = a / a_norm;
        let n = a_hat.len();
        // Householder reflector mapping e₁ to ±â; its other columns span â⊥
        let s = if a_hat[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = a_hat.clone();
        v[0] += s;
        let h = Matrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
        let perp = h.columns(1, n - 1).into_owned();
        Self {
            a_norm,
            a_hat,
            perp,
            einv: o.shape().inverse().clone(),
        }
    }

    /// Unit ray direction in `y` coordinates; `w` is in the basis of `â⊥`.
    pub(crate) fn direction(&self, phi: f64, w: &Vector) -> Vector {
        let (s, c) = phi.sin_cos();
        &self.a_hat * c + &self.perp * w * s
    }

    /// Interval of `s` where the ray at angle `phi` lies inside the sphere of
    /// radius `radius` centred at `k·a`.
    fn chord(&self, k: f64, radius: f64, phi: f64) -> Option<(f64, f64)> {
        let (sin, cos) = phi.sin_cos();
        let ka = k * self.a_norm;
        let disc = radius * radius - ka * ka * sin * sin;
        (disc >= 0.0).then(|| {
            let r = disc.sqrt();
            (ka * cos - r, ka * cos + r)
        })
    }

    /// `‖s·ĝ − k·a‖² / radius² − 1`.
    fn sphere_residual(&self, k: f64, radius: f64, phi: f64, s: f64) -> f64 {
        let ka = k * self.a_norm;
        (s * s - 2.0 * s * ka * phi.cos() + ka * ka) / (radius * radius) - 1.0
    }
}

/// Smallest `s ≥ 0` with `s·ĝ` in the helmet `𝓗(δ, μ)`, for rays at angle
/// `phi` from `â`.
fn helmet_entry(frame: &RayFrame, delta: f64, mu: f64, phi: f64) -> Option<f64> {
    let outer_r = 1.0 / delta;
    let bar_r = frame.a_norm / (2.0 * mu);
    let outer = frame.chord(1.0, outer_r, phi)?;
    let mut cands = vec![outer.0.max(0.0)];
    if let Some(c) = frame.chord(1.0, 1.0, phi) {
        cands.push(c.0);
        cands.push(c.1);
    }
    if let Some(c) = frame.chord(0.5, bar_r, phi) {
        cands.push(c.1);
    }
    cands.retain(|&s| s >= 0.0);
    cands.sort_by(f64::total_cmp);
    cands.into_iter().find(|&s| {
        frame.sphere_residual(1.0, outer_r, phi, s) <= TOL_SET
            && frame.sphere_residual(1.0, 1.0, phi, s) >= -TOL_SET
            && frame.sphere_residual(0.5, bar_r, phi, s) >= -TOL_SET
    })
}

/// `min ‖E⁻¹ĝ‖²` over unit directions at angle `phi` from `â`, with the
/// minimizing `w`.
fn min_inverse_norm(frame: &RayFrame, phi: f64) -> (f64, Vector) {
    let (sin, cos) = phi.sin_cos();
    let u0 = &frame.einv * &frame.a_hat;
    let u = &frame.einv * &frame.perp;
    let m = u.transpose() * &u * (sin * sin);
    let b = u.transpose() * &u0 * (sin * cos);
    let (v, w) = min_quadratic_on_sphere(&m, &b);
    (v + cos * cos * u0.norm_squared(), w)
}

fn helmet_min_norm(o: &Obstacle, delta: f64, mu: f64) -> Result<(f64, Vector)> {
    if !(delta > 0.0 && delta <= 1.0 && mu >= 1.0) {
        return Err(Error::BadThickness { a: delta, b: mu });
    }
    let frame = RayFrame::new(o);
    let ratio = 1.0 / (delta * frame.a_norm);
    let phi_max = if ratio >= 1.0 { std::f64::consts::PI } else { ratio.asin() };
    let objective = |phi: f64| match helmet_entry(&frame, delta, mu, phi) {
        Some(s) => s * s * min_inverse_norm(&frame, phi).0,
        None => f64::INFINITY,
    };
    let (phi, val) = scan_min(objective, 0.0, phi_max, PHI_GRID, 4);
    if !val.is_finite() {
        return Err(Error::SolverFailure("helmet is empty along every ray".into()));
    }
    let s = helmet_entry(&frame, delta, mu, phi).expect("finite objective");
    let (_, w) = min_inverse_norm(&frame, phi);
    let x = &frame.einv * frame.direction(phi, &w) * s;
    Ok((val.sqrt(), x))
}

/// `r̄ = min ‖x‖` over `𝓗* = 𝓔(c, E) ∩ 𝓔≥(c̄, Ē)`, with a minimizer.
pub fn min_norm_helmet_star(o: &Obstacle) -> Result<(f64, Vector)> {
    helmet_min_norm(o, 1.0, 1.0)
}

/// `r = min ‖x‖` over `𝓗(δ, μ)`, with a minimizer.
pub fn min_norm_helmet(o: &Obstacle, delta: f64, mu: f64) -> Result<(f64, Vector)> {
    helmet_min_norm(o, delta, mu)
}

/// Escape region of one obstacle: the part of the space around the helmet
/// rim through which avoidance solutions leave the obstacle. `δ = μ = 1` gives
/// the undilated region, which lies on a single cone.
#[derive(Debug, Clone)]
pub struct EscapeRegion {
    obstacle: Obstacle,
    delta: f64,
    radius: f64,
    cos_lo: f64,
    cos_hi: f64,
}

impl EscapeRegion {
    pub fn new(o: &Obstacle, delta: f64, mu: f64) -> Result<Self> {
        let exact = delta == 1.0 && mu == 1.0;
        let radius = if exact {
            min_norm_helmet_star(o)?.0
        } else {
            min_norm_helmet(o, delta, mu)?.0
        };
        // angle range [ϑ(1, μ), ϑ(δ, μ)] as cosines
        let cos_lo = cos_vartheta(o, 1.0, mu)?;
        let cos_hi = cos_vartheta(o, delta, mu)?;
        Ok(Self {
            obstacle: o.clone(),
            delta,
            radius,
            cos_lo,
            cos_hi,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Half-aperture range of the region's cones.
    pub fn angle_range(&self) -> (f64, f64) {
        (self.cos_lo.acos(), self.cos_hi.acos())
    }

    fn exact(&self) -> bool {
        self.cos_lo == self.cos_hi
    }

    /// Cosine of the angle between `Ex` and `Ec`.
    fn cos_angle(&self, x: &Vector) -> Option<f64> {
        let e = self.obstacle.shape().matrix();
        let y = e * x;
        let a = e * self.obstacle.center();
        let ny = y.norm();
        (ny > 0.0).then(|| y.dot(&a) / (ny * a.norm()))
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let o = &self.obstacle;
        let norm_ok = x.norm_squared() / (self.radius * self.radius) - 1.0 >= -TOL_SET;
        let shells_ok = o.shell_residual(self.delta, x) >= -TOL_SET && o.bar_residual(1.0, x) <= TOL_SET;
        let Some(cos) = self.cos_angle(x) else {
            return false;
        };
        let cone_ok = if self.exact() {
            (cos - self.cos_lo).abs() <= TOL_SET
        } else {
            // inside the wide cone, outside the narrow one
            cos - self.cos_hi >= -TOL_SET && cos - self.cos_lo <= TOL_SET
        };
        norm_ok && shells_ok && cone_ok
    }

    /// Feasible `s` along the ray `x = s·E⁻¹ĝ`, where `cos φ = cos_phi` and
    /// `u = E⁻¹ĝ`.
    fn ray_interval(&self, frame: &RayFrame, phi: f64, u: &Vector) -> Option<(f64, f64)> {
        let lo = self.radius / u.norm();
        let cos = phi.cos();
        let mut hi = frame.a_norm * cos;
        if let Some((s_minus, _)) = frame.chord(1.0, 1.0 / self.delta, phi) {
            hi = hi.min(s_minus);
        }
        let slack = 1e-9 * (1.0 + hi.abs());
        if lo > hi + slack {
            None
        } else {
            Some((lo.min(hi), hi))
        }
    }

    /// Minimum of `‖F(x − d)‖²` over the region, with a minimizer. `None`
    /// when the region is empty.
    pub fn min_quadratic(&self, f: &Matrix, d: &Vector) -> Option<(f64, Vector)> {
        let frame = RayFrame::new(&self.obstacle);
        let fd = f * d;
        let eval = |phi: f64, w: &Vector| -> Option<(f64, Vector)> {
            let g = frame.direction(phi, &w.normalize());
            let u = &frame.einv * g;
            let (lo, hi) = self.ray_interval(&frame, phi, &u)?;
            let fu = f * &u;
            let s = (fu.dot(&fd) / fu.norm_squared()).clamp(lo, hi);
            let x = u * s;
            Some(((f * &x - &fd).norm_squared(), x))
        };
        let value = |phi: f64, w: &Vector| eval(phi, w).map_or(f64::INFINITY, |r| r.0);
        let (phi_lo, phi_hi) = self.angle_range();
        let (phi_lo, phi_hi) = if self.exact() { (phi_lo, phi_lo) } else { (phi_lo, phi_hi) };
        let k = frame.perp.ncols();

        let mut best: Option<(f64, f64, Vector)> = None;
        let mut consider = |phi: f64, w: Vector, v: f64| {
            if v.is_finite() && best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, phi, w));
            }
        };

        if k == 1 {
            for sign in [1.0, -1.0] {
                let w = Vector::from_element(1, sign);
                let (phi, v) = scan_min(|p| value(p, &w), phi_lo, phi_hi, 512, 4);
                consider(phi, w, v);
            }
        } else {
            let mut starts: Vec<(f64, f64, Vector)> = Vec::new();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut ws: Vec<Vector> = Vec::new();
            // the direction of d itself is a natural candidate
            let yd = frame.perp.transpose() * (self.obstacle.shape().matrix() * d);
            if yd.norm() > 0.0 {
                ws.push(yd.normalize());
            }
            for _ in 0..256 * (k - 1) {
                let w = Vector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
                ws.push(w.normalize());
            }
            let phis: Vec<f64> = if phi_hi > phi_lo {
                (0..17).map(|t| phi_lo + (phi_hi - phi_lo) * t as f64 / 16.0).collect()
            } else {
                vec![phi_lo]
            };
            for w in &ws {
                for &phi in &phis {
                    let v = value(phi, w);
                    if v.is_finite() {
                        starts.push((v, phi, w.clone()));
                    }
                }
            }
            starts.sort_by(|p, q| p.0.total_cmp(&q.0));
            for (v0, phi0, w0) in starts.into_iter().take(8) {
                let (v, phi, w) = compass(&value, v0, phi0, w0, phi_lo, phi_hi);
                consider(phi, w, v);
            }
        }
        let (_, phi, w) = best?;
        eval(phi, &w)
    }
}

/// Pattern search over `(φ, w)` with `w` renormalized onto the unit sphere.
fn compass(
    value: &dyn Fn(f64, &Vector) -> f64,
    mut v: f64,
    mut phi: f64,
    mut w: Vector,
    phi_lo: f64,
    phi_hi: f64,
) -> (f64, f64, Vector) {
    let k = w.len();
    let mut step = 0.1;
    while step > 1e-11 {
        let mut improved = false;
        if phi_hi > phi_lo {
            for sgn in [1.0, -1.0] {
                let p = (phi + sgn * step * (phi_hi - phi_lo)).clamp(phi_lo, phi_hi);
                let vp = value(p, &w);
                if vp < v {
                    (v, phi, improved) = (vp, p, true);
                }
            }
        }
        for j in 0..k {
            for sgn in [1.0, -1.0] {
                let mut cand = w.clone();
                cand[j] += sgn * step;
                let cand = cand.normalize();
                let vc = value(phi, &cand);
                if vc < v {
                    (v, w, improved) = (vc, cand, true);
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, phi, w)
}

/// Membership in the escape region of `o` for `(δ, μ)`.
pub fn in_r(o: &Obstacle, delta: f64, mu: f64, x: &Vector) -> Result<bool> {
    Ok(EscapeRegion::new(o, delta, mu)?.contains(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpdMatrix;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    /// Corner of `‖x − c‖ = r1` and `‖x − c/2‖ = r2` for `c = (cx, 0)`.
    fn circle_corner(cx: f64, r1: f64, r2: f64) -> (f64, f64) {
        let h = cx / 2.0;
        let x = (r2 * r2 - r1 * r1 + cx * cx - h * h) / (2.0 * (cx - h));
        let y = (r1 * r1 - (x - cx) * (x - cx)).sqrt();
        (x, y)
    }

    #[test]
    fn star_radius_on_unit_ball() {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        let (r, x) = min_norm_helmet_star(&o).unwrap();
        assert_abs_diff_eq!(r, 15f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(x[0], 3.75, epsilon = 1e-7);
        assert_abs_diff_eq!(x[1].abs(), 0.968246, epsilon = 1e-6);
    }

    #[test]
    fn dilated_radius_on_unit_ball() {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        let (r, x) = min_norm_helmet(&o, 0.8, 1.2).unwrap();
        let (cx, cy) = circle_corner(4.0, 1.25, 4.0 / 2.4);
        assert_abs_diff_eq!(r, (cx * cx + cy * cy).sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(r, 3.463099, epsilon = 1e-6);
        assert_abs_diff_eq!(x[0], 3.30382, epsilon = 1e-5);
        assert_abs_diff_eq!(x[1].abs(), 1.03819, epsilon = 1e-5);
    }

    #[test]
    fn scaling_homogeneity() {
        let e = SpdMatrix::from_rows(&[vec![1.3, 0.2], vec![0.2, 0.7]]).unwrap();
        let o = Obstacle::new(v(&[3.0, 2.0]), e.clone()).unwrap();
        let o2 = Obstacle::new(v(&[6.0, 4.0]), e.scaled(0.5)).unwrap();
        let r1 = min_norm_helmet_star(&o).unwrap().0;
        let r2 = min_norm_helmet_star(&o2).unwrap().0;
        assert_abs_diff_eq!(r2, 2.0 * r1, epsilon = 1e-8);
    }

    /// Dense sampling of the ellipse boundary as an independent check.
    #[test]
    fn star_radius_matches_boundary_sampling() {
        let e = SpdMatrix::from_rows(&[vec![1.3, 0.2], vec![0.2, 0.7]]).unwrap();
        let o = Obstacle::new(v(&[3.0, 2.0]), e).unwrap();
        let (r, x) = min_norm_helmet_star(&o).unwrap();
        let einv = o.shape().inverse();
        let mut best = f64::INFINITY;
        for k in 0..400_000 {
            let t = k as f64 * std::f64::consts::TAU / 400_000.0;
            let p = o.center() + einv * v(&[t.cos(), t.sin()]);
            if o.bar_residual(1.0, &p) >= 0.0 {
                best = best.min(p.norm());
            }
        }
        assert!(r <= best + 1e-9, "{r} vs sampled {best}");
        assert!(best - r < 1e-4, "{r} vs sampled {best}");
        assert_abs_diff_eq!(o.shell_residual(1.0, &x), 0.0, epsilon = 1e-9);
        assert!(o.bar_residual(1.0, &x) >= -1e-9);
    }

    #[test]
    fn escape_region_membership() {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        let r = EscapeRegion::new(&o, 1.0, 1.0).unwrap();
        assert!(r.contains(&v(&[3.75, 15f64.sqrt() / 4.0])));
        assert!(!r.contains(&v(&[0.0, 0.0])));
        assert!(!r.contains(&v(&[8.0, 0.0])));
    }

    #[test]
    fn escape_region_distance_to_point() {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        let r = EscapeRegion::new(&o, 1.0, 1.0).unwrap();
        let (val, x) = r.min_quadratic(&Matrix::identity(2, 2), &v(&[0.0, 4.0])).unwrap();
        let corner = v(&[3.75, 15f64.sqrt() / 4.0]);
        assert_abs_diff_eq!(x, corner.clone(), epsilon = 1e-7);
        assert_abs_diff_eq!(val, (corner - v(&[0.0, 4.0])).norm_squared(), epsilon = 1e-7);
    }
}
