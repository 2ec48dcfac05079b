//! The hybrid feedback: control law, jump map and input bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{proj_orthogonal, Vector, TOL_ZERO};
use crate::obstacle::{in_cim, j0_indices, Mode, Workspace};

/// `(x, i, m)`: position, obstacle index (0-based) and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub x: Vector,
    pub i: usize,
    pub m: Mode,
}

impl HybridState {
    pub fn new(x: Vector, i: usize, m: Mode) -> Self {
        Self { x, i, m }
    }
}

/// Positive gains of the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub k0: f64,
    pub k1: f64,
    pub km1: f64,
}

impl Gains {
    pub fn new(k0: f64, k1: f64, km1: f64) -> Result<Self> {
        for (name, k) in [("k0", k0), ("k1", k1), ("km1", km1)] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::BadParams(format!("gain {name} = {k} must be positive")));
            }
        }
        Ok(Self { k0, k1, km1 })
    }

    pub fn uniform(k: f64) -> Result<Self> {
        Self::new(k, k, k)
    }

    pub fn gain(&self, m: Mode) -> f64 {
        match m {
            Mode::Negative => self.km1,
            Mode::Stabilize => self.k0,
            Mode::Positive => self.k1,
        }
    }

    pub fn max(&self) -> f64 {
        self.k0.max(self.k1).max(self.km1)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            k0: self.k0 * s,
            k1: self.k1 * s,
            km1: self.km1 * s,
        }
    }
}

/// Control input. Stabilization: `−k₀x`. Avoidance: `−kₘE⁻¹π⊥(E(x−c))E(x−pₘ)`,
/// which keeps `‖E(x − c)‖` constant.
pub fn kappa(w: &Workspace, g: &Gains, s: &HybridState) -> Result<Vector> {
    if s.m == Mode::Stabilize {
        return Ok(&s.x * -g.k0);
    }
    let o = w.obstacle(s.i);
    let p = w.param(s.i).point(s.m)?;
    let d = &s.x - o.center();
    if d.norm() <= TOL_ZERO {
        return Err(Error::DegenerateCenter(s.i));
    }
    let e = o.shape().matrix();
    let normal = e * d;
    // π⊥(E(x−c))E(x−p) = π⊥(E(x−c))E(c−p); the second form avoids cancelling
    // a large normal component far from the obstacle, and the repeated
    // projection removes what rounding leaves along the normal.
    let tangent = proj_orthogonal(&normal, &(e * (o.center() - p)))?;
    let tangent = proj_orthogonal(&normal, &tangent)?;
    Ok(o.shape().inverse() * tangent * -g.gain(s.m))
}

/// One element of the jump map's value. `margin` is how far `x` lies outside
/// the entry cone of `(i, m)` in angle (zero for stabilization targets).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpCandidate {
    pub i: usize,
    pub m: Mode,
    pub margin: f64,
}

/// Angle between `E(x − c)` and `E(c − pₘ)` minus `ψ̄`.
fn entry_margin(w: &Workspace, i: usize, m: Mode, x: &Vector) -> Result<f64> {
    let (o, p) = (w.obstacle(i), w.param(i));
    let e = o.shape().matrix();
    let d = e * (x - o.center());
    let axis = e * (o.center() - p.point(m)?);
    let nd = d.norm();
    if nd <= TOL_ZERO {
        return Ok(0.0);
    }
    let cos = (d.dot(&axis) / (nd * axis.norm())).clamp(-1.0, 1.0);
    Ok(cos.acos() - p.psi_bar)
}

/// Admissible avoidance modes for obstacle `i` at `x`.
pub fn entry_modes(w: &Workspace, i: usize, x: &Vector) -> Result<Vec<Mode>> {
    let (o, p) = (w.obstacle(i), w.param(i));
    let mut out = Vec::with_capacity(2);
    for m in Mode::AVOIDANCE {
        if in_cim(o, p, m, x)? {
            out.push(m);
        }
    }
    Ok(out)
}

/// Possible post-jump `(i′, m′)`. From an avoidance mode the index is kept and
/// the mode resets to stabilization; from stabilization, every obstacle whose
/// helmet contains `x` is a candidate with each admissible avoidance mode.
pub fn jump_map(w: &Workspace, s: &HybridState) -> Result<Vec<JumpCandidate>> {
    let out = if s.m.is_avoidance() {
        vec![JumpCandidate {
            i: s.i,
            m: Mode::Stabilize,
            margin: 0.0,
        }]
    } else {
        let mut out = Vec::new();
        for i in j0_indices(w, &s.x) {
            for m in entry_modes(w, i, &s.x)? {
                out.push(JumpCandidate {
                    i,
                    m,
                    margin: entry_margin(w, i, m, &s.x)?,
                });
            }
        }
        out
    };
    if out.is_empty() {
        return Err(Error::EmptyJump(s.x.as_slice().to_vec()));
    }
    Ok(out)
}

/// Selection rule among jump candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum JumpPolicy {
    /// Largest margin; ties within `1e-12` go to `m = +1`, then to the smallest
    /// index.
    #[default]
    Margin,
    /// Uniform choice driven by the seed.
    Random { seed: u64 },
}

const TIE_TOL: f64 = 1e-12;

/// Picks one candidate. Deterministic for a given policy (and seed).
pub fn resolve_jump(candidates: &[JumpCandidate], policy: &JumpPolicy) -> JumpCandidate {
    assert!(!candidates.is_empty(), "resolve_jump needs at least one candidate");
    match policy {
        JumpPolicy::Margin => {
            let best = candidates.iter().map(|c| c.margin).fold(f64::NEG_INFINITY, f64::max);
            *candidates
                .iter()
                .filter(|c| c.margin >= best - TIE_TOL)
                .min_by_key(|c| (std::cmp::Reverse(c.m.value()), c.i))
                .expect("nonempty")
        }
        JumpPolicy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            candidates[rng.random_range(0..candidates.len())]
        }
    }
}

/// `k·α·(r_b + p)`: `k` the largest gain, `α` the largest condition number
/// `λmax/λmin` of the shape matrices, `r_b` the radius of the smallest
/// origin-centred ball containing every `𝓔(cᵢ, δᵢEᵢ)` and `p` the largest
/// norm of an auxiliary point. Valid along solutions with `‖x(0)‖ ≤ α(r_b + p)`.
pub fn control_bound(w: &Workspace, g: &Gains) -> f64 {
    let (alpha, rb, p) = control_bound_terms(w);
    g.max() * alpha * (rb + p)
}

/// `(α, r_b, p)` of [`control_bound`].
pub fn control_bound_terms(w: &Workspace) -> (f64, f64, f64) {
    let mut alpha = 0.0f64;
    let mut rb = 0.0f64;
    let mut p = 0.0f64;
    for (o, par) in w.obstacles().iter().zip(w.params()) {
        alpha = alpha.max(o.shape().lambda_max() / o.shape().lambda_min());
        rb = rb.max(o.dilated(par.delta).max_norm());
        p = p.max(par.p1.norm()).max(par.pm1.norm());
    }
    (alpha, rb, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::{Obstacle, ObstacleParams};
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn workspace() -> Workspace {
        let params = ObstacleParams {
            delta: 0.8,
            epsilon: 0.9,
            mu: 1.2,
            nu: 1.1,
            theta: 0.5,
            psi: 0.2,
            psi_bar: 0.3,
            p1: v(&[0.919395, -1.682942]),
            pm1: v(&[0.919395, 1.682942]),
        };
        Workspace::new(vec![Obstacle::ball(&[4.0, 0.0]).unwrap()], vec![params]).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let w = workspace();
        let g = Gains::uniform(0.25).unwrap();
        let u = kappa(&w, &g, &HybridState::new(v(&[1.0, 2.0]), 0, Mode::Stabilize)).unwrap();
        assert_abs_diff_eq!(u, v(&[-0.25, -0.5]), epsilon = 1e-15);
        let u = kappa(&w, &g, &HybridState::new(v(&[4.0, 1.25]), 0, Mode::Positive)).unwrap();
        assert_abs_diff_eq!(u, v(&[-0.25 * (4.0 - 0.919395), 0.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(u[0], -0.770151, epsilon = 1e-6);
        assert!(matches!(
            kappa(&w, &g, &HybridState::new(v(&[4.0, 0.0]), 0, Mode::Negative)),
            Err(Error::DegenerateCenter(0))
        ));
    }

    #[test]
    fn jump_map_examples() {
        let w = workspace();
        let back = jump_map(&w, &HybridState::new(v(&[0.0, 0.0]), 0, Mode::Positive)).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!((back[0].i, back[0].m), (0, Mode::Stabilize));

        // on the symmetry axis both directions are admissible, with equal margins
        let x = v(&[3.0, 0.0]);
        let both = jump_map(&w, &HybridState::new(x, 0, Mode::Stabilize));
        assert!(both.is_err(), "x = (3, 0) is outside the helmet");
        let x = v(&[5.1, 0.0]);
        let both = jump_map(&w, &HybridState::new(x.clone(), 0, Mode::Stabilize)).unwrap();
        let modes: Vec<Mode> = both.iter().map(|c| c.m).collect();
        assert_eq!(modes, vec![Mode::Negative, Mode::Positive]);
        assert_abs_diff_eq!(both[0].margin, both[1].margin, epsilon = 1e-12);
        assert_eq!(resolve_jump(&both, &JumpPolicy::Margin).m, Mode::Positive);

        let modes = entry_modes(&w, 0, &v(&[2.0, 0.0])).unwrap();
        assert_eq!(modes, vec![Mode::Negative, Mode::Positive]);
    }

    #[test]
    fn random_policy_is_reproducible() {
        let cands: Vec<JumpCandidate> = (0..5)
            .map(|i| JumpCandidate {
                i,
                m: Mode::Positive,
                margin: 0.0,
            })
            .collect();
        let p = JumpPolicy::Random { seed: 7 };
        assert_eq!(resolve_jump(&cands, &p), resolve_jump(&cands, &p));
        assert_eq!(resolve_jump(&cands[..1], &p), cands[0]);
    }

    #[test]
    fn control_bound_example() {
        let w = workspace();
        let g = Gains::uniform(0.25).unwrap();
        let (alpha, rb, p) = control_bound_terms(&w);
        assert_abs_diff_eq!(alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rb, 5.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 1.917702, epsilon = 1e-6);
        assert_abs_diff_eq!(control_bound(&w, &g), 1.791926, epsilon = 1e-6);
        assert_abs_diff_eq!(control_bound(&w, &g.scaled(3.0)), 3.0 * control_bound(&w, &g), epsilon = 1e-12);
    }
}
