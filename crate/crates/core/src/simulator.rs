//! Fixed-step simulation of the closed loop on hybrid time domains.
//!
//! The state flows with classical RK4 while it stays in the flow set of its
//! mode. A step that leaves the flow set is shortened by bisection to the first
//! point outside it, and the jump map is applied there. In the overlap of the
//! closed flow and jump sets the state keeps flowing.

use serde::{Deserialize, Serialize};

use crate::controller::{control_bound, control_bound_terms, jump_map, kappa, resolve_jump, Gains, HybridState, JumpCandidate, JumpPolicy};
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::obstacle::{in_flow_set, in_workspace, Mode, Workspace};
use crate::parallel::Execution;

/// Tolerance on `minᵢ ‖Eᵢ(x − cᵢ)‖ ≥ 1` for the safety check.
pub const TOL_SAFETY: f64 = 1e-6;
const STALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub step: f64,
    pub boundary_tol: f64,
    pub t_max: f64,
    pub stop_radius: f64,
    /// Defaults to ten jumps per obstacle.
    pub max_jumps: Option<usize>,
    pub policy: JumpPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            boundary_tol: 1e-9,
            t_max: 60.0,
            stop_radius: 1e-2,
            max_jumps: None,
            policy: JumpPolicy::Margin,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::BadParams(format!("step {} must be positive", self.step)));
        }
        if !(self.boundary_tol > 0.0 && self.boundary_tol < self.step) {
            return Err(Error::BadParams(format!(
                "boundary_tol {} must lie in (0, step)",
                self.boundary_tol
            )));
        }
        if !(self.t_max >= 0.0) {
            return Err(Error::BadParams(format!("t_max {} must be nonnegative", self.t_max)));
        }
        if !(self.stop_radius >= 0.0) {
            return Err(Error::BadParams(format!("stop_radius {} must be nonnegative", self.stop_radius)));
        }
        if self.max_jumps == Some(0) {
            return Err(Error::BadParams("max_jumps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn jump_limit(&self, obstacles: usize) -> usize {
        self.max_jumps.unwrap_or(10 * obstacles.max(1))
    }
}

/// One point of the hybrid arc; `i` is 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub j: usize,
    #[serde(with = "crate::serde_util::vector")]
    pub x: Vector,
    pub i: usize,
    pub m: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    /// Jump counter before the jump.
    pub j: usize,
    pub from: (usize, Mode),
    pub to: (usize, Mode),
    pub candidates: Vec<JumpCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Converged,
    TimeLimit,
    ZenoSuspect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub min_clearance: f64,
    pub min_clearance_obstacle: usize,
    pub max_control: f64,
    pub final_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub jumps: Vec<JumpRecord>,
    pub monitors: Monitors,
    pub termination: Termination,
    pub step: f64,
    pub stop_radius: f64,
}

impl Trajectory {
    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }
}

/// One RK4 step of `ẋ = κ(x, i, m)` with `(i, m)` frozen.
pub fn flow_step(w: &Workspace, g: &Gains, s: &HybridState, h: f64) -> Result<Vector> {
    let f = |x: Vector| kappa(w, g, &HybridState::new(x, s.i, s.m));
    let x = &s.x;
    let k1 = f(x.clone())?;
    let k2 = f(x + &k1 * (0.5 * h))?;
    let k3 = f(x + &k2 * (0.5 * h))?;
    let k4 = f(x + &k3 * h)?;
    Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}

/// If a step of length `h` from `s` leaves the flow set of `s`, returns the
/// bisected step length `τ ≤ h` and the first state found outside the flow set
/// (within `boundary_tol` in time).
pub fn detect_transition(
    w: &Workspace,
    g: &Gains,
    s: &HybridState,
    h: f64,
    boundary_tol: f64,
) -> Result<Option<(f64, Vector)>> {
    let inside = |x: &Vector| in_flow_set(w, s.i, s.m, x);
    let x_end = flow_step(w, g, s, h)?;
    if inside(&x_end) {
        return Ok(None);
    }
    if !inside(&s.x) {
        return Err(Error::NoBracket);
    }
    let (mut lo, mut hi) = (0.0, h);
    let mut x_hi = x_end;
    while hi - lo > boundary_tol {
        let mid = 0.5 * (lo + hi);
        let x_mid = flow_step(w, g, s, mid)?;
        if inside(&x_mid) {
            lo = mid;
        } else {
            hi = mid;
            x_hi = x_mid;
        }
    }
    Ok(Some((hi, x_hi)))
}

struct Recorder<'a> {
    w: &'a Workspace,
    g: &'a Gains,
    samples: Vec<Sample>,
    monitors: Monitors,
}

impl<'a> Recorder<'a> {
    fn push(&mut self, t: f64, j: usize, s: &HybridState) -> Result<()> {
        let (clearance, idx) = self.w.min_clearance(&s.x);
        if clearance < self.monitors.min_clearance {
            self.monitors.min_clearance = clearance;
            self.monitors.min_clearance_obstacle = idx;
        }
        let u = kappa(self.w, self.g, s)?.norm();
        self.monitors.max_control = self.monitors.max_control.max(u);
        self.monitors.final_norm = s.x.norm();
        self.samples.push(Sample {
            t,
            j,
            x: s.x.clone(),
            i: s.i,
            m: s.m,
        });
        Ok(())
    }
}

/// Simulates one solution from `x0` with initial mode `m = 0` and index 0.
pub fn simulate(w: &Workspace, g: &Gains, x0: &Vector, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: x0.len(),
        });
    }
    if !in_workspace(w, x0) {
        return Err(Error::UnsafeStart(x0.as_slice().to_vec()));
    }
    let max_jumps = cfg.jump_limit(w.len());
    let mut rec = Recorder {
        w,
        g,
        samples: Vec::new(),
        monitors: Monitors {
            min_clearance: f64::INFINITY,
            min_clearance_obstacle: 0,
            max_control: 0.0,
            final_norm: x0.norm(),
        },
    };
    let mut jumps = Vec::new();
    let mut s = HybridState::new(x0.clone(), 0, Mode::Stabilize);
    let (mut t, mut j) = (0.0f64, 0usize);
    rec.push(t, j, &s)?;

    let termination = loop {
        if s.x.norm() <= cfg.stop_radius {
            break Termination::Converged;
        }
        if !in_flow_set(w, s.i, s.m, &s.x) {
            if jumps.len() >= max_jumps {
                break Termination::ZenoSuspect;
            }
            let candidates = jump_map(w, &s)?;
            let policy = match cfg.policy {
                JumpPolicy::Random { seed } => JumpPolicy::Random {
                    seed: seed.wrapping_add((jumps.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                },
                p => p,
            };
            let pick = resolve_jump(&candidates, &policy);
            jumps.push(JumpRecord {
                t,
                j,
                from: (s.i, s.m),
                to: (pick.i, pick.m),
                candidates,
            });
            s.i = pick.i;
            s.m = pick.m;
            j += 1;
            rec.push(t, j, &s)?;
            continue;
        }
        if t >= cfg.t_max {
            break Termination::TimeLimit;
        }
        let u = kappa(w, g, &s)?;
        if u.norm() < STALL_TOL {
            return Err(Error::NonProgress(s.x.as_slice().to_vec()));
        }
        let h = cfg.step.min(cfg.t_max - t);
        match detect_transition(w, g, &s, h, cfg.boundary_tol)? {
            None => {
                s.x = flow_step(w, g, &s, h)?;
                t = if h == cfg.step { t + h } else { cfg.t_max };
            }
            Some((tau, x)) => {
                s.x = x;
                t += tau;
            }
        }
        rec.push(t, j, &s)?;
    };
    let monitors = rec.monitors;
    Ok(Trajectory {
        samples: rec.samples,
        jumps,
        monitors,
        termination,
        step: cfg.step,
        stop_radius: cfg.stop_radius,
    })
}

/// Simulates every initial condition independently.
pub fn simulate_batch(
    w: &Workspace,
    g: &Gains,
    x0s: &[Vector],
    cfg: &SolverConfig,
    exec: Execution,
) -> Vec<Result<Trajectory>> {
    exec.map(x0s, |x0| simulate(w, g, x0, cfg))
}

/// Result of [`check_trajectory`]. Every field is data; `passed` combines them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub min_clearance: f64,
    pub safe: bool,
    pub final_norm: f64,
    pub converged: bool,
    pub max_norm_increase_stabilizing: f64,
    pub monotone: bool,
    pub avoidance_episodes: usize,
    pub max_avoidance_drift: f64,
    pub jump_count: usize,
    pub jumps_bounded: bool,
    /// Shortest time between consecutive jumps; `None` with fewer than two.
    pub min_jump_gap: Option<f64>,
    pub zeno_free: bool,
    pub max_control: f64,
    pub control_bound: f64,
    pub control_bound_applicable: bool,
    pub control_bound_ok: bool,
    pub hybrid_time_ok: bool,
    pub termination: Termination,
}

impl TrajectoryReport {
    pub fn passed(&self) -> bool {
        self.safe
            && self.converged
            && self.monotone
            && self.jumps_bounded
            && self.zeno_free
            && self.control_bound_ok
            && self.hybrid_time_ok
            && self.termination == Termination::Converged
    }
}

/// Per-episode drift of `‖Eᵢ(x − cᵢ)‖` over each maximal avoidance segment.
pub fn avoidance_drifts(tr: &Trajectory, w: &Workspace) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    let s = &tr.samples;
    while k < s.len() {
        if s[k].m.is_avoidance() {
            let start = k;
            while k + 1 < s.len() && s[k + 1].j == s[start].j {
                k += 1;
            }
            let o = w.obstacle(s[start].i);
            out.push((o.clearance(&s[k].x) - o.clearance(&s[start].x)).abs());
        }
        k += 1;
    }
    out
}

/// Checks safety, convergence, monotonicity, drift, jump bounds, the input
/// bound and the hybrid-time structure of a simulated solution.
pub fn check_trajectory(tr: &Trajectory, w: &Workspace, g: &Gains) -> TrajectoryReport {
    let s = &tr.samples;
    let mut max_increase = f64::NEG_INFINITY;
    let mut time_ok = !s.is_empty() && s[0].j == 0;
    for pair in s.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.j == a.j {
            time_ok &= b.t > a.t || (b.t == a.t && b.x == a.x && b.i == a.i && b.m == a.m);
            if a.m == Mode::Stabilize {
                max_increase = max_increase.max(b.x.norm() - a.x.norm());
            }
        } else {
            time_ok &= b.j == a.j + 1 && b.t == a.t && b.x == a.x;
        }
    }
    let jump_times: Vec<f64> = tr.jumps.iter().map(|r| r.t).collect();
    let min_gap = jump_times.windows(2).map(|p| p[1] - p[0]).reduce(f64::min);
    let drifts = avoidance_drifts(tr, w);
    let (alpha, rb, p) = control_bound_terms(w);
    let bound = control_bound(w, g);
    let applicable = s.first().is_some_and(|s0| s0.x.norm() <= alpha * (rb + p));
    let max_control = tr.monitors.max_control;
    TrajectoryReport {
        min_clearance: tr.monitors.min_clearance,
        safe: tr.monitors.min_clearance >= 1.0 - TOL_SAFETY,
        final_norm: tr.monitors.final_norm,
        converged: tr.monitors.final_norm <= tr.stop_radius,
        max_norm_increase_stabilizing: max_increase.max(0.0),
        monotone: max_increase <= 1e-9,
        avoidance_episodes: drifts.len(),
        max_avoidance_drift: drifts.iter().copied().fold(0.0, f64::max),
        jump_count: tr.jumps.len(),
        jumps_bounded: tr.jumps.len() <= 2 * w.len(),
        min_jump_gap: min_gap,
        zeno_free: min_gap.is_none_or(|g| g >= tr.step) && tr.termination != Termination::ZenoSuspect,
        max_control,
        control_bound: bound,
        control_bound_applicable: applicable,
        control_bound_ok: !applicable || max_control <= bound + 1e-9,
        hybrid_time_ok: time_ok,
        termination: tr.termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::Obstacle;
    use crate::tuning::{auto_tune, TuneOptions};
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn tuned_single() -> Workspace {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        auto_tune(&[o], &[], &TuneOptions::default()).unwrap().workspace
    }

    #[test]
    fn rk4_linear_flow() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        let x0 = v(&[1.0, 2.0]);
        let h = 0.1;
        let x = flow_step(&w, &g, &HybridState::new(x0.clone(), 0, Mode::Stabilize), h).unwrap();
        let exact = &x0 * (-0.25 * h).exp();
        assert!((x - exact).norm() < 1e-8);
    }

    #[test]
    fn pure_decay_without_helmet() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        let tr = simulate(&w, &g, &v(&[0.5, 0.0]), &SolverConfig::default()).unwrap();
        assert_eq!(tr.jump_count(), 0);
        assert_eq!(tr.termination, Termination::Converged);
        let last = tr.samples.last().unwrap();
        assert_abs_diff_eq!(last.x[0], 0.5 * (-0.25 * last.t).exp(), epsilon = 1e-12);
    }

    #[test]
    fn single_obstacle_reference_run() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        let tr = simulate(&w, &g, &v(&[8.0, 0.0]), &SolverConfig::default()).unwrap();
        assert_eq!(tr.jump_count(), 2);
        let rep = check_trajectory(&tr, &w, &g);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.max_avoidance_drift < 1e-6);
    }

    #[test]
    fn unsafe_start_rejected() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        assert!(matches!(
            simulate(&w, &g, &v(&[4.0, 0.0]), &SolverConfig::default()),
            Err(Error::UnsafeStart(_))
        ));
    }

    #[test]
    fn transition_refinement_lands_on_helmet() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        let eps = w.param(0).epsilon;
        // start just outside the ε-shell on the far side
        let x0 = v(&[4.0 + 1.0 / eps + 1e-4, 0.0]);
        let s = HybridState::new(x0, 0, Mode::Stabilize);
        let (tau, x) = detect_transition(&w, &g, &s, 1e-2, 1e-9).unwrap().expect("crossing");
        assert!(tau < 1e-2);
        assert!(w.obstacle(0).shell_residual(eps, &x).abs() <= 1e-6);
        let far = HybridState::new(v(&[0.5, 0.0]), 0, Mode::Stabilize);
        assert!(detect_transition(&w, &g, &far, 1e-2, 1e-9).unwrap().is_none());
    }

    #[test]
    fn injected_fault_is_flagged() {
        let w = tuned_single();
        let g = Gains::uniform(0.25).unwrap();
        let mut tr = simulate(&w, &g, &v(&[8.0, 0.5]), &SolverConfig::default()).unwrap();
        tr.monitors.min_clearance = 0.5;
        assert!(!check_trajectory(&tr, &w, &g).safe);
    }
}
