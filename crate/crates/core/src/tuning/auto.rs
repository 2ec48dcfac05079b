//! Parameter validation, disjointness certification and automatic tuning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reflect, ellipsoid_distance, Vector, TOL_SET, TOL_ZERO};
use crate::obstacle::{Obstacle, ObstacleParams, Workspace};
use crate::parallel::Execution;
use crate::tuning::bounds::{cos_vartheta, delta_lower, mu_bar, mu_bar_radicand, theta_bar, vartheta, vartheta_bar};
use crate::tuning::disjoint::min_metric_over;
use crate::tuning::points::avoidance_points;
use crate::tuning::radii::{min_norm_helmet, min_norm_helmet_star, EscapeRegion};

/// Margin on `‖E(x − c)‖² − 1` required by the escape-region certificates.
pub const DISJOINT_MARGIN: f64 = 1e-6;

/// Fixed values for some of an obstacle's parameters; the rest are tuned.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub theta: Option<f64>,
    pub psi: Option<f64>,
    pub psi_bar: Option<f64>,
    pub p1: Option<Vec<f64>>,
    pub rotation_axis: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    /// Radius of a spherical vehicle; caps every `ε`.
    pub vehicle_radius: Option<f64>,
    /// Lower bound on every `δ`, used to keep the plain stabilizing feedback
    /// active outside `⋂ 𝓔≥(cᵢ, floor·Eᵢ)`.
    pub delta_floor: Option<f64>,
    /// Also require the escape regions to clear the dilated obstacles.
    pub require_gas: bool,
    pub max_retries: usize,
    pub execution: Execution,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            vehicle_radius: None,
            delta_floor: None,
            require_gas: true,
            max_retries: 20,
            execution: Execution::default(),
        }
    }
}

/// A failed requirement. `obstacle` is 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub obstacle: Option<usize>,
    pub message: String,
}

impl Violation {
    fn on(i: usize, message: impl Into<String>) -> Self {
        Self {
            obstacle: Some(i),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            obstacle: None,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.obstacle {
            Some(i) => write!(f, "obstacle {}: {}", i + 1, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Smallest value of a pairwise certificate; indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleReport {
    pub delta_lower: f64,
    pub mu_bar: f64,
    pub theta_bar: f64,
    pub vartheta: f64,
    pub vartheta_bar: f64,
    pub r_bar: f64,
    pub r: f64,
    pub params: ObstacleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub obstacles: Vec<ObstacleReport>,
    pub weak_disjoint: bool,
    pub dilated_disjoint: bool,
    pub sufficiently_disjoint: bool,
    pub ri_disjoint: bool,
    pub retries: usize,
    pub violations: Vec<Violation>,
}

/// Ordered pairs `(i, j)`, `i ≠ j`.
fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
}

/// Minimum of `‖sⱼEⱼ(x − cⱼ)‖²` over each pair of dilated obstacles
/// `𝓔≤(cᵢ, sᵢEᵢ)`, unordered pairs only.
pub fn dilated_pair_values(obstacles: &[Obstacle], scales: &[f64], exec: Execution) -> Result<Vec<PairValue>> {
    let pairs: Vec<(usize, usize)> = ordered_pairs(obstacles.len()).into_iter().filter(|(i, j)| i < j).collect();
    exec.map(&pairs, |&(i, j)| {
        let (value, _) = min_metric_over(&obstacles[i].dilated(scales[i]), &obstacles[j].dilated(scales[j]))?;
        Ok(PairValue { from: i, to: j, value })
    })
    .into_iter()
    .collect()
}

/// The solid obstacles `𝓔≤(cᵢ, sᵢEᵢ)` are pairwise disjoint.
pub fn pairwise_weak_disjoint(obstacles: &[Obstacle], scales: &[f64], exec: Execution) -> Result<bool> {
    Ok(dilated_pair_values(obstacles, scales, exec)?
        .iter()
        .all(|p| p.value > 1.0 + TOL_SET))
}

/// For each ordered pair `(i, j)`, the minimum of `‖sⱼEⱼ(x − cⱼ)‖²` over the
/// escape region of obstacle `i` for `(δᵢ, μᵢ)`. Empty regions give `+∞`.
pub fn escape_pair_values(
    obstacles: &[Obstacle],
    shells: &[(f64, f64)],
    scales: &[f64],
    exec: Execution,
) -> Result<Vec<PairValue>> {
    let regions: Vec<EscapeRegion> = exec
        .map_range(obstacles.len(), |i| EscapeRegion::new(&obstacles[i], shells[i].0, shells[i].1))
        .into_iter()
        .collect::<Result<_>>()?;
    let pairs = ordered_pairs(obstacles.len());
    Ok(exec.map(&pairs, |&(i, j)| {
        let f = obstacles[j].shape().matrix() * scales[j];
        let value = regions[i]
            .min_quadratic(&f, obstacles[j].center())
            .map_or(f64::INFINITY, |r| r.0);
        PairValue { from: i, to: j, value }
    }))
}

/// Obstacles are weakly disjoint and no undilated escape region meets
/// another obstacle.
pub fn sufficiently_disjoint(obstacles: &[Obstacle], exec: Execution) -> Result<bool> {
    let ones = vec![1.0; obstacles.len()];
    if !pairwise_weak_disjoint(obstacles, &ones, exec)? {
        return Ok(false);
    }
    let shells = vec![(1.0, 1.0); obstacles.len()];
    Ok(escape_pair_values(obstacles, &shells, &ones, exec)?
        .iter()
        .all(|p| p.value > 1.0 + DISJOINT_MARGIN))
}

/// Each tuned escape region `Rᵢ(δᵢ, μᵢ)` clears every other dilated obstacle
/// `𝓔≤(cⱼ, δⱼEⱼ)`.
pub fn tuned_ri_disjoint(w: &Workspace, exec: Execution) -> Result<bool> {
    let shells: Vec<(f64, f64)> = w.params().iter().map(|p| (p.delta, p.mu)).collect();
    let scales: Vec<f64> = w.params().iter().map(|p| p.delta).collect();
    Ok(escape_pair_values(w.obstacles(), &shells, &scales, exec)?
        .iter()
        .all(|p| p.value > 1.0 + DISJOINT_MARGIN))
}

/// Smallest Euclidean distance between two obstacles (`+∞` for one obstacle).
pub fn min_pairwise_distance(obstacles: &[Obstacle]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..obstacles.len() {
        for j in i + 1..obstacles.len() {
            best = best.min(ellipsoid_distance(&obstacles[i].ellipsoid(), &obstacles[j].ellipsoid()));
        }
    }
    best
}

/// Largest `ε` keeping a spherical vehicle of radius `r_v` clear of `o`:
/// `(1 + λmax(E)·r_v)⁻¹`. `min_obstacle_distance` is the smallest distance
/// between obstacles, which the vehicle must fit through.
pub fn max_epsilon_for_vehicle_radius(o: &Obstacle, r_v: f64, min_obstacle_distance: f64) -> Result<f64> {
    if !(r_v >= 0.0) {
        return Err(Error::BadParams(format!("vehicle radius {r_v} is negative")));
    }
    if r_v >= min_obstacle_distance {
        return Err(Error::InfeasibleVehicle {
            radius: r_v,
            limit: min_obstacle_distance,
        });
    }
    Ok(1.0 / (1.0 + o.shape().lambda_max() * r_v))
}

/// `p₋₁ = −E⁻¹ρ(Ec)E p₁`.
pub fn mirror_point(o: &Obstacle, p1: &Vector) -> Result<Vector> {
    let e = o.shape().matrix();
    Ok(-(o.shape().inverse() * reflect(&(e * o.center()), &(e * p1))?))
}

/// Normalized residual of `C(c, −c, θ, E)` at `p`; `None` at `p = c`.
fn point_cone_residual(o: &Obstacle, theta: f64, p: &Vector) -> Option<f64> {
    let e = o.shape().matrix();
    let axis = -(e * o.center());
    let d = e * (p - o.center());
    let nd = d.norm();
    (nd > TOL_ZERO).then(|| axis.dot(&d) / (axis.norm() * nd) - theta.cos())
}

/// Every requirement on the parameters, as data. Empty means the workspace
/// satisfies all parameter orderings, auxiliary point placements and
/// disjointness conditions (escape-region clearance only if `require_gas`).
pub fn validate_params(w: &Workspace, require_gas: bool) -> Vec<Violation> {
    validate_with(w, require_gas, Execution::default())
}

pub fn validate_with(w: &Workspace, require_gas: bool, exec: Execution) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, (o, p)) in w.obstacles().iter().zip(w.params()).enumerate() {
        let dl = delta_lower(o).unwrap_or(f64::NAN);
        let mut chk = |ok: bool, msg: &str| {
            if !ok {
                out.push(Violation::on(i, msg));
            }
        };
        chk(p.delta > dl, "delta not strictly greater than delta_lower");
        chk(p.epsilon > p.delta, "epsilon not strictly greater than delta");
        chk(p.epsilon < 1.0, "epsilon not strictly less than 1");
        chk(p.nu > 1.0, "nu not strictly greater than 1");
        chk(p.mu > p.nu, "mu not strictly greater than nu");
        let delta_ok = p.delta > dl && p.delta < 1.0;
        let mb = if delta_ok { mu_bar(o, p.delta).unwrap_or(f64::NAN) } else { f64::NAN };
        chk(delta_ok && p.mu < mb, "mu not strictly less than mu_bar(delta)");
        chk(p.psi > 0.0, "psi not strictly positive");
        chk(p.psi_bar > p.psi, "psi_bar not strictly greater than psi");
        chk(p.theta > p.psi_bar, "theta not strictly greater than psi_bar");
        let tb = theta_bar(o, p.delta, p.mu).unwrap_or(f64::NAN);
        chk(p.theta < tb, "theta not strictly less than theta_bar(delta, mu)");
        for (name, pt) in [("p1", &p.p1), ("p-1", &p.pm1)] {
            match point_cone_residual(o, p.theta, pt) {
                Some(r) if r.abs() <= TOL_SET => {}
                Some(r) => out.push(Violation::on(
                    i,
                    format!("{name} is off the cone C(c, -c, theta, E) (residual {r:e})"),
                )),
                None => out.push(Violation::on(i, format!("{name} coincides with the obstacle center"))),
            }
        }
    }

    let obstacles = w.obstacles();
    let ones = vec![1.0; obstacles.len()];
    match dilated_pair_values(obstacles, &ones, exec) {
        Ok(v) => {
            for p in v.iter().filter(|p| p.value <= 1.0 + TOL_SET) {
                out.push(Violation::global(format!(
                    "obstacles {} and {} are not weakly disjoint",
                    p.from + 1,
                    p.to + 1
                )));
            }
        }
        Err(e) => out.push(Violation::global(format!("weak disjointness test failed: {e}"))),
    }
    let deltas: Vec<f64> = w.params().iter().map(|p| p.delta).collect();
    if deltas.iter().all(|d| *d > 0.0) {
        match dilated_pair_values(obstacles, &deltas, exec) {
            Ok(v) => {
                for p in v.iter().filter(|p| p.value <= 1.0 + TOL_SET) {
                    out.push(Violation::global(format!(
                        "dilated obstacles {} and {} are not weakly disjoint",
                        p.from + 1,
                        p.to + 1
                    )));
                }
            }
            Err(e) => out.push(Violation::global(format!("dilated disjointness test failed: {e}"))),
        }
    }
    let shells_ok = out.is_empty();
    if require_gas && shells_ok {
        let shells: Vec<(f64, f64)> = w.params().iter().map(|p| (p.delta, p.mu)).collect();
        match escape_pair_values(obstacles, &shells, &deltas, exec) {
            Ok(v) => {
                for p in v.iter().filter(|p| p.value <= 1.0 + DISJOINT_MARGIN) {
                    out.push(Violation::global(format!(
                        "escape region of obstacle {} meets dilated obstacle {} (min value {:.6e})",
                        p.from + 1,
                        p.to + 1,
                        p.value
                    )));
                }
            }
            Err(e) => out.push(Violation::global(format!("escape region test failed: {e}"))),
        }
    }
    out
}

impl TuningReport {
    /// Evaluates every bound, radius and certificate for a parameterized
    /// workspace.
    pub fn assess(w: &Workspace, require_gas: bool, retries: usize, exec: Execution) -> Result<Self> {
        let obstacles = w.obstacles();
        let per: Vec<ObstacleReport> = exec
            .map_range(w.len(), |i| {
                let (o, p) = (&obstacles[i], w.param(i));
                Ok(ObstacleReport {
                    delta_lower: delta_lower(o)?,
                    mu_bar: mu_bar(o, p.delta).unwrap_or(f64::NAN),
                    theta_bar: theta_bar(o, p.delta, p.mu).unwrap_or(f64::NAN),
                    vartheta: vartheta(o, p.delta, p.mu).unwrap_or(f64::NAN),
                    vartheta_bar: vartheta_bar(o),
                    r_bar: min_norm_helmet_star(o)?.0,
                    r: min_norm_helmet(o, p.delta, p.mu).map_or(f64::NAN, |r| r.0),
                    params: p.clone(),
                })
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let ones = vec![1.0; w.len()];
        let deltas: Vec<f64> = w.params().iter().map(|p| p.delta).collect();
        let weak = pairwise_weak_disjoint(obstacles, &ones, exec)?;
        let dilated = deltas.iter().all(|d| *d > 0.0 && *d <= 1.0) && pairwise_weak_disjoint(obstacles, &deltas, exec)?;
        let sufficient = weak && sufficiently_disjoint(obstacles, exec)?;
        let shells_valid = w.obstacles().iter().zip(w.params()).all(|(o, p)| {
            p.delta <= 1.0 && cos_vartheta(o, p.delta, p.mu).is_ok()
        });
        let ri = shells_valid && dilated && tuned_ri_disjoint(w, exec)?;
        Ok(Self {
            obstacles: per,
            weak_disjoint: weak,
            dilated_disjoint: dilated,
            sufficiently_disjoint: sufficient,
            ri_disjoint: ri,
            retries,
            violations: validate_with(w, require_gas, exec),
        })
    }
}

/// Builds one obstacle's parameters at refinement `level`.
fn build_params(
    o: &Obstacle,
    ov: &ParamOverrides,
    lo: f64,
    cap: f64,
    level: usize,
) -> Result<ObstacleParams> {
    let n = o.dim();
    let bad = |field: &str, e: Error| Error::TuningFailure(format!("cannot derive {field}: {e}"));
    let halving = 0.5f64.powi(level as i32 + 1);
    let delta = ov.delta.unwrap_or(cap - (cap - lo) * halving);
    let epsilon = ov.epsilon.unwrap_or(delta + 0.5 * (cap - delta));
    let dl = delta_lower(o)?;
    let mu = match ov.mu {
        Some(m) => m,
        None => {
            if !(delta > dl && delta < 1.0) {
                return Err(bad("mu", Error::BadDelta { delta, lower: dl }));
            }
            let mb = mu_bar_radicand(dl, delta).powf(-0.5);
            1.0 + (mb - 1.0) * halving
        }
    };
    let nu = ov.nu.unwrap_or(1.0 + 0.5 * (mu - 1.0));
    let hint = ov.rotation_axis.as_ref().map(|v| Vector::from_column_slice(v));
    if let Some(h) = &hint {
        if h.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.len() });
        }
    }

    let mut theta = match ov.theta {
        Some(t) => t,
        None => 0.9 * theta_bar(o, delta, mu).map_err(|e| bad("theta", e))?,
    };
    // shrink θ until the rotated direction still has a positive component along c
    let (p1, pm1) = loop {
        let pts = match &ov.p1 {
            Some(p1) => {
                if p1.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: p1.len() });
                }
                let p1 = Vector::from_column_slice(p1);
                let pm1 = mirror_point(o, &p1)?;
                Ok((p1, pm1))
            }
            None => avoidance_points(o, theta, hint.as_ref()),
        };
        match pts {
            Ok(p) => break p,
            Err(Error::BadParams(_)) if ov.theta.is_none() && ov.p1.is_none() && theta > 1e-6 => theta *= 0.5,
            Err(e) => return Err(bad("p1", e)),
        }
    };
    let psi_bar = ov.psi_bar.unwrap_or(0.5 * theta);
    let psi = ov.psi.unwrap_or(0.5 * psi_bar);
    Ok(ObstacleParams {
        delta,
        epsilon,
        mu,
        nu,
        theta,
        psi,
        psi_bar,
        p1,
        pm1,
    })
}

/// A tuned workspace with its report.
#[derive(Debug, Clone)]
pub struct Tuned {
    pub workspace: Workspace,
    pub report: TuningReport,
}

/// Chooses every parameter not fixed by `overrides`, refining `δ → 1` and
/// `μ → 1` on the obstacles involved in failed disjointness checks.
pub fn auto_tune(obstacles: &[Obstacle], overrides: &[ParamOverrides], opts: &TuneOptions) -> Result<Tuned> {
    let count = obstacles.len();
    if count == 0 {
        return Err(Error::BadParams("no obstacles".into()));
    }
    if overrides.len() != count && !overrides.is_empty() {
        return Err(Error::BadParams(format!(
            "{} parameter override sets for {count} obstacles",
            overrides.len()
        )));
    }
    let default_ov = ParamOverrides::default();
    let ov = |i: usize| overrides.get(i).unwrap_or(&default_ov);
    let exec = opts.execution;

    let ones = vec![1.0; count];
    if let Some(p) = dilated_pair_values(obstacles, &ones, exec)?
        .into_iter()
        .find(|p| p.value <= 1.0 + TOL_SET)
    {
        return Err(Error::AssumptionViolated {
            assumption: "Assumption 3",
            detail: format!("obstacles {} and {} are not weakly disjoint", p.from + 1, p.to + 1),
        });
    }

    let min_dist = if opts.vehicle_radius.is_some() { min_pairwise_distance(obstacles) } else { f64::INFINITY };
    let mut bounds = Vec::with_capacity(count);
    for (i, o) in obstacles.iter().enumerate() {
        let dl = delta_lower(o)?;
        let cap = match opts.vehicle_radius {
            Some(rv) => max_epsilon_for_vehicle_radius(o, rv, min_dist)?,
            None => 1.0,
        };
        let lo = dl.max(opts.delta_floor.unwrap_or(0.0));
        if !(lo < cap) {
            return Err(Error::TuningFailure(format!(
                "obstacle {}: no admissible delta in ({lo}, {cap})",
                i + 1
            )));
        }
        bounds.push((lo, cap));
    }

    let mut levels = vec![0usize; count];
    for attempt in 0..=opts.max_retries {
        let params: Vec<ObstacleParams> = (0..count)
            .map(|i| build_params(&obstacles[i], ov(i), bounds[i].0, bounds[i].1, levels[i]))
            .collect::<Result<_>>()?;
        let w = Workspace::new(obstacles.to_vec(), params)?;

        let deltas: Vec<f64> = w.params().iter().map(|p| p.delta).collect();
        let mut bump = vec![false; count];
        let mut first_failure: Option<String> = None;
        for p in dilated_pair_values(obstacles, &deltas, exec)? {
            if p.value <= 1.0 + TOL_SET {
                bump[p.from] = true;
                bump[p.to] = true;
                first_failure.get_or_insert(format!(
                    "dilated obstacles {} and {} overlap",
                    p.from + 1,
                    p.to + 1
                ));
            }
        }
        if first_failure.is_none() && opts.require_gas {
            let shells: Vec<(f64, f64)> = w.params().iter().map(|p| (p.delta, p.mu)).collect();
            for p in escape_pair_values(obstacles, &shells, &deltas, exec)? {
                if p.value <= 1.0 + DISJOINT_MARGIN {
                    bump[p.from] = true;
                    bump[p.to] = true;
                    first_failure.get_or_insert(format!(
                        "escape region of obstacle {} meets dilated obstacle {}",
                        p.from + 1,
                        p.to + 1
                    ));
                }
            }
        }
        match first_failure {
            None => {
                let violations = validate_with(&w, opts.require_gas, exec);
                if let Some(v) = violations.first() {
                    return Err(Error::TuningFailure(v.to_string()));
                }
                let report = TuningReport::assess(&w, opts.require_gas, attempt, exec)?;
                return Ok(Tuned { workspace: w, report });
            }
            Some(msg) if attempt == opts.max_retries => {
                return Err(Error::TuningFailure(format!(
                    "{msg} after {} refinements",
                    opts.max_retries
                )));
            }
            Some(_) => {
                for (l, b) in levels.iter_mut().zip(bump) {
                    if b {
                        *l += 1;
                    }
                }
            }
        }
    }
    unreachable!("loop returns on its last attempt")
}
