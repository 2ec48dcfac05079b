//! Obstacles, their design parameters, and membership tests for the free
//! workspace, the helmets and every flow and jump set of the controller.
//!
//! Obstacle indices are 0-based here. File formats add one when writing.
//! All predicates use the closed-set convention of [`crate::geometry`]: each
//! inequality is relaxed by [`TOL_SET`], so points on a shared boundary belong
//! to a set and to its closed complement.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConeSpec, EllipsoidSpec, SpdMatrix, Vector, TOL_SET};

/// Ellipsoidal obstacle `𝓔≤(c, E)` together with the ellipsoid `𝓔(c̄, Ē)`
/// that delimits its helmet.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    center: Vector,
    shape: SpdMatrix,
    bar_center: Vector,
    bar_shape: SpdMatrix,
    ec_norm: f64,
}

impl Obstacle {
    /// Fails unless `n >= 2` and the target (the origin) lies strictly outside,
    /// i.e. `‖Ec‖ > 1`.
    pub fn new(center: Vector, shape: SpdMatrix) -> Result<Self> {
        if center.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                got: center.len(),
            });
        }
        if center.len() < 2 {
            return Err(Error::AssumptionViolated {
                assumption: "Assumption 1",
                detail: format!("workspace dimension must be at least 2, got {}", center.len()),
            });
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParams("obstacle center has non-finite entries".into()));
        }
        let ec_norm = (shape.matrix() * &center).norm();
        if !(ec_norm > 1.0) {
            return Err(Error::AssumptionViolated {
                assumption: "Assumption 2",
                detail: format!(
                    "the target must lie outside every obstacle, but ||E c|| = {ec_norm} <= 1 for center {:?}",
                    center.as_slice()
                ),
            });
        }
        let bar_center = &center * 0.5;
        let bar_shape = shape.scaled(2.0 / ec_norm);
        Ok(Self {
            center,
            shape,
            bar_center,
            bar_shape,
            ec_norm,
        })
    }

    pub fn from_rows(center: &[f64], shape: &[Vec<f64>]) -> Result<Self> {
        Self::new(Vector::from_column_slice(center), SpdMatrix::from_rows(shape)?)
    }

    /// Unit-ball obstacle `‖x − c‖ ≤ 1`.
    pub fn ball(center: &[f64]) -> Result<Self> {
        Self::new(
            Vector::from_column_slice(center),
            SpdMatrix::identity(center.len()),
        )
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &SpdMatrix {
        &self.shape
    }

    /// `c̄ = c/2`.
    pub fn bar_center(&self) -> &Vector {
        &self.bar_center
    }

    /// `Ē = 2E/‖Ec‖`.
    pub fn bar_shape(&self) -> &SpdMatrix {
        &self.bar_shape
    }

    /// `‖Ec‖`.
    pub fn ec_norm(&self) -> f64 {
        self.ec_norm
    }

    pub fn ellipsoid(&self) -> EllipsoidSpec {
        self.dilated(1.0)
    }

    /// `𝓔(c, aE)`.
    pub fn dilated(&self, a: f64) -> EllipsoidSpec {
        EllipsoidSpec {
            center: self.center.clone(),
            shape: self.shape.scaled(a),
        }
    }

    /// `𝓔(c̄, bĒ)`.
    pub fn bar_ellipsoid(&self, b: f64) -> EllipsoidSpec {
        EllipsoidSpec {
            center: self.bar_center.clone(),
            shape: self.bar_shape.scaled(b),
        }
    }

    /// `‖E(x − c)‖`, which is at least one in the free workspace.
    pub fn clearance(&self, x: &Vector) -> f64 {
        (self.shape.matrix() * (x - &self.center)).norm()
    }

    /// `‖aE(x − c)‖² − 1`.
    pub fn shell_residual(&self, a: f64, x: &Vector) -> f64 {
        let d = self.clearance(x) * a;
        d * d - 1.0
    }

    /// `‖bĒ(x − c̄)‖² − 1`.
    pub fn bar_residual(&self, b: f64, x: &Vector) -> f64 {
        let d = (self.bar_shape.matrix() * (x - &self.bar_center)).norm() * b;
        d * d - 1.0
    }

    /// `C(c, v, θ, E)` with this obstacle's center and metric.
    pub fn cone(&self, axis: Vector, half_aperture: f64) -> Result<ConeSpec> {
        ConeSpec::new(self.center.clone(), axis, half_aperture, self.shape.clone())
    }
}

/// Controller mode: stabilization or one of the two avoidance directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Mode {
    Negative,
    Stabilize,
    Positive,
}

impl Mode {
    pub const AVOIDANCE: [Mode; 2] = [Mode::Negative, Mode::Positive];
    pub const ALL: [Mode; 3] = [Mode::Negative, Mode::Stabilize, Mode::Positive];

    pub fn value(self) -> i8 {
        match self {
            Mode::Negative => -1,
            Mode::Stabilize => 0,
            Mode::Positive => 1,
        }
    }

    pub fn from_value(m: i8) -> Result<Self> {
        match m {
            -1 => Ok(Mode::Negative),
            0 => Ok(Mode::Stabilize),
            1 => Ok(Mode::Positive),
            other => Err(Error::BadParams(format!("mode must be -1, 0 or 1, got {other}"))),
        }
    }

    pub fn is_avoidance(self) -> bool {
        self != Mode::Stabilize
    }
}

impl From<Mode> for i8 {
    fn from(m: Mode) -> i8 {
        m.value()
    }
}

impl TryFrom<i8> for Mode {
    type Error = Error;

    fn try_from(m: i8) -> Result<Self> {
        Mode::from_value(m)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Per-obstacle design parameters.
///
/// Shells: the stabilization mode jumps inside `𝓗(ε, ν)`; avoidance flows in
/// the larger `𝓗(δ, μ)`. `θ` is the aperture of the cone carrying `p₁` and
/// `p₋₁`, `ψ` cuts the avoidance flow sets and `ψ̄` selects the avoidance
/// direction at jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleParams {
    pub delta: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
    pub psi: f64,
    pub psi_bar: f64,
    #[serde(with = "crate::serde_util::vector")]
    pub p1: Vector,
    #[serde(with = "crate::serde_util::vector")]
    pub pm1: Vector,
}

impl ObstacleParams {
    /// The auxiliary point `p_m`.
    pub fn point(&self, m: Mode) -> Result<&Vector> {
        match m {
            Mode::Positive => Ok(&self.p1),
            Mode::Negative => Ok(&self.pm1),
            Mode::Stabilize => Err(Error::BadMode(0)),
        }
    }
}

/// Obstacles with their parameters.
///
/// Construction checks shapes only. Parameter orderings and the disjointness
/// requirements are reported by [`crate::tuning::validate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    obstacles: Vec<Obstacle>,
    params: Vec<ObstacleParams>,
}

impl Workspace {
    pub fn new(obstacles: Vec<Obstacle>, params: Vec<ObstacleParams>) -> Result<Self> {
        let Some(first) = obstacles.first() else {
            return Err(Error::BadParams("workspace needs at least one obstacle".into()));
        };
        let n = first.dim();
        if params.len() != obstacles.len() {
            return Err(Error::BadParams(format!(
                "{} obstacles but {} parameter sets",
                obstacles.len(),
                params.len()
            )));
        }
        for o in &obstacles {
            if o.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: o.dim(),
                });
            }
        }
        for p in &params {
            for v in [&p.p1, &p.pm1] {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
            }
        }
        Ok(Self { obstacles, params })
    }

    pub fn dim(&self) -> usize {
        self.obstacles[0].dim()
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn params(&self) -> &[ObstacleParams] {
        &self.params
    }

    pub fn obstacle(&self, i: usize) -> &Obstacle {
        &self.obstacles[i]
    }

    pub fn param(&self, i: usize) -> &ObstacleParams {
        &self.params[i]
    }

    /// `minᵢ ‖Eᵢ(x − cᵢ)‖` together with the minimizing index.
    pub fn min_clearance(&self, x: &Vector) -> (f64, usize) {
        self.obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clearance(x), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Same workspace with obstacles and parameters reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            obstacles: perm.iter().map(|&k| self.obstacles[k].clone()).collect(),
            params: perm.iter().map(|&k| self.params[k].clone()).collect(),
        }
    }
}

fn avoidance(m: Mode) -> Result<()> {
    if m.is_avoidance() {
        Ok(())
    } else {
        Err(Error::BadMode(0))
    }
}

fn ge(r: f64) -> bool {
    r >= -TOL_SET
}

fn le(r: f64) -> bool {
    r <= TOL_SET
}

/// `x ∈ 𝓔≥(c, E)`.
fn outside(o: &Obstacle, x: &Vector) -> bool {
    ge(o.shell_residual(1.0, x))
}

/// Normalized residual of `C(c, c − p_m, angle, E)`, positive inside.
fn avoidance_cone_residual(o: &Obstacle, p: &ObstacleParams, m: Mode, angle: f64, x: &Vector) -> Result<f64> {
    let axis = o.center() - p.point(m)?;
    Ok(o.cone(axis, angle)?.residual(x))
}

/// `x` is in the closed free workspace.
pub fn in_workspace(w: &Workspace, x: &Vector) -> bool {
    w.obstacles().iter().all(|o| outside(o, x))
}

/// `x ∈ 𝓗* = 𝓔(c, E) ∩ 𝓔≥(c̄, Ē)`: the part of the obstacle surface where
/// the stabilizing field points inwards.
pub fn helmet_star_contains(o: &Obstacle, x: &Vector) -> bool {
    o.shell_residual(1.0, x).abs() <= TOL_SET && ge(o.bar_residual(1.0, x))
}

fn helmet_unchecked(o: &Obstacle, a: f64, b: f64, x: &Vector) -> bool {
    le(o.shell_residual(a, x)) && outside(o, x) && ge(o.bar_residual(b, x))
}

/// `x ∈ 𝓗(a, b) = 𝓔≤(c, aE) ∩ 𝓔≥(c, E) ∩ 𝓔≥(c̄, bĒ)`.
pub fn helmet_contains(o: &Obstacle, a: f64, b: f64, x: &Vector) -> Result<bool> {
    if !(a > 0.0 && a <= 1.0 && b >= 1.0) {
        return Err(Error::BadThickness { a, b });
    }
    Ok(helmet_unchecked(o, a, b, x))
}

/// Stabilization flow set `𝓕₀`.
pub fn in_f0(w: &Workspace, x: &Vector) -> bool {
    in_workspace(w, x)
        && w.obstacles().iter().zip(w.params()).all(|(o, p)| {
            ge(o.shell_residual(p.epsilon, x)) || le(o.bar_residual(p.nu, x))
        })
}

/// Indices `i` with `x ∈ 𝓙₀ⁱ`.
pub fn j0_indices(w: &Workspace, x: &Vector) -> Vec<usize> {
    if !in_workspace(w, x) {
        return Vec::new();
    }
    w.obstacles()
        .iter()
        .zip(w.params())
        .enumerate()
        .filter(|(_, (o, p))| helmet_unchecked(o, p.epsilon, p.nu, x))
        .map(|(i, _)| i)
        .collect()
}

/// Stabilization jump set `𝓙₀ = ∪ᵢ 𝓙₀ⁱ`.
pub fn in_j0(w: &Workspace, x: &Vector) -> bool {
    !j0_indices(w, x).is_empty()
}

/// Avoidance flow set `𝓕ₘⁱ = 𝓗ᵢ(δᵢ, μᵢ) ∩ C≥(cᵢ, cᵢ − pᵢₘ, ψᵢ, Eᵢ) ∩ 𝓦`.
pub fn in_fm(w: &Workspace, i: usize, m: Mode, x: &Vector) -> Result<bool> {
    avoidance(m)?;
    let (o, p) = (w.obstacle(i), w.param(i));
    Ok(helmet_unchecked(o, p.delta, p.mu, x)
        && avoidance_cone_residual(o, p, m, p.psi, x)? <= TOL_SET
        && in_workspace(w, x))
}

/// Avoidance jump set, the closed complement of `𝓕ₘⁱ` in `𝓦`.
pub fn in_jm(w: &Workspace, i: usize, m: Mode, x: &Vector) -> Result<bool> {
    avoidance(m)?;
    let (o, p) = (w.obstacle(i), w.param(i));
    let leaves = ge(o.shell_residual(p.delta, x))
        || le(o.bar_residual(p.mu, x))
        || avoidance_cone_residual(o, p, m, p.psi, x)? >= -TOL_SET;
    Ok(leaves && in_workspace(w, x))
}

/// `x ∈ C≥(c, c − pₘ, ψ̄, E)`, the region from which mode `m` may be entered.
pub fn in_cim(o: &Obstacle, p: &ObstacleParams, m: Mode, x: &Vector) -> Result<bool> {
    avoidance(m)?;
    Ok(avoidance_cone_residual(o, p, m, p.psi_bar, x)? <= TOL_SET)
}

/// Flow set of the state `(x, i, m)`; `i` is ignored in stabilization mode.
pub fn in_flow_set(w: &Workspace, i: usize, m: Mode, x: &Vector) -> bool {
    match m {
        Mode::Stabilize => in_f0(w, x),
        _ => in_fm(w, i, m, x).expect("avoidance mode"),
    }
}

/// Jump set of the state `(x, i, m)`; `i` is ignored in stabilization mode.
pub fn in_jump_set(w: &Workspace, i: usize, m: Mode, x: &Vector) -> bool {
    match m {
        Mode::Stabilize => in_j0(w, x),
        _ => in_jm(w, i, m, x).expect("avoidance mode"),
    }
}
