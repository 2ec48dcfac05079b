//! Sampled property suites over the geometry, the set predicates, the tuning
//! bounds and the feedback law. Each suite reports counts and the worst
//! residual instead of failing, so callers decide what a violation means.

use serde::{Deserialize, Serialize};

use crate::controller::{jump_map, kappa, Gains, HybridState};
use crate::geometry::{
    cone_classify, orthogonal_matrix, parallel_matrix, proj_theta, reflector_matrix, ConeSpec, EllipsoidSpec, Matrix,
    RegionSide, Vector, TOL_SET,
};
use crate::obstacle::{
    helmet_contains, in_f0, in_fm, in_j0, in_jm, in_workspace, j0_indices, Mode, Obstacle, Workspace,
};
use crate::parallel::Execution;
use crate::sampling::{random_spd, random_unit, rng, sample_near_obstacles, sample_where, sample_workspace, workspace_box};
use crate::tuning::{avoidance_points, delta_lower, mu_bar, theta_bar, weak_disjoint, EscapeRegion};
use rand::Rng;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub first_violation: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

/// One checked item: its residual (0 for yes/no checks) and, on failure, a
/// description.
struct Check {
    residual: f64,
    failure: Option<String>,
}

impl Check {
    fn residual(r: f64, tol: f64, what: impl FnOnce() -> String) -> Self {
        Self {
            residual: r,
            failure: if r <= tol { None } else { Some(what()) },
        }
    }

    fn flag(ok: bool, what: impl FnOnce() -> String) -> Self {
        Self {
            residual: 0.0,
            failure: if ok { None } else { Some(what()) },
        }
    }
}

fn collect(name: &str, tolerance: f64, checks: impl IntoIterator<Item = Vec<Check>>) -> SuiteResult {
    let mut out = SuiteResult {
        name: name.to_string(),
        checked: 0,
        violations: 0,
        max_residual: 0.0,
        tolerance,
        first_violation: None,
    };
    for c in checks.into_iter().flatten() {
        out.checked += 1;
        out.max_residual = out.max_residual.max(c.residual);
        if let Some(f) = c.failure {
            out.violations += 1;
            out.first_violation.get_or_insert(f);
        }
    }
    out
}

fn sub_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn max_abs(m: &Matrix) -> f64 {
    m.amax()
}

/// Projection, reflection and parametric-map identities on random directions.
pub fn projection_identities(samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    const TOL: f64 = 1e-12;
    let checks = exec.map_range(samples, |k| {
        let mut r = rng(sub_seed(seed, k));
        let n = r.random_range(2..=5);
        let z = random_unit(n, &mut r) * 10f64.powf(r.random_range(-1.0..1.0));
        let theta = r.random_range(0.0..std::f64::consts::PI);
        let id = Matrix::identity(n, n);
        let par = parallel_matrix(&z).expect("nonzero");
        let perp = orthogonal_matrix(&z).expect("nonzero");
        let rho = reflector_matrix(&z).expect("nonzero");
        let pt = proj_theta(&z, theta).expect("nonzero");
        let res = [
            max_abs(&(&par + &perp - &id)),
            max_abs(&(&perp * &perp - &perp)),
            max_abs(&(&par * &par - &par)),
            max_abs(&(&rho * &rho - &id)),
            max_abs(&(pt - (&rho * 0.5 + &id * (0.5 * (2.0 * theta).cos())))),
        ];
        let worst = res.iter().copied().fold(0.0, f64::max);
        vec![Check::residual(worst, TOL, || format!("z = {:?}, theta = {theta}: residuals {res:?}", z.as_slice()))]
    });
    collect("projection identities", TOL, checks)
}

/// Cone classification is unchanged by positive scaling of the axis and of
/// `x − c`.
pub fn cone_scaling(samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    const TOL: f64 = 1e-12;
    let checks = exec.map_range(samples, |k| {
        let mut r = rng(sub_seed(seed, k));
        let n = r.random_range(2..=4);
        let e = random_spd(n, 0.3, 3.0, &mut r);
        let c = crate::sampling::random_normal(n, &mut r);
        let v = random_unit(n, &mut r);
        let th = r.random_range(0.05..1.5);
        let d = crate::sampling::random_normal(n, &mut r);
        let (a, b) = (10f64.powf(r.random_range(-2.0..2.0)), 10f64.powf(r.random_range(-2.0..2.0)));
        let k1 = ConeSpec::new(c.clone(), v.clone(), th, e.clone()).expect("valid cone");
        let k2 = ConeSpec::new(c.clone(), &v * a, th, e).expect("valid cone");
        let x1 = &c + &d;
        let x2 = &c + &d * b;
        let dr = (k1.residual(&x1) - k2.residual(&x2)).abs();
        let same = cone_classify(&k1, &x1) == cone_classify(&k2, &x2);
        vec![Check::residual(if same { dr } else { f64::INFINITY }, TOL, || {
            format!("axis scale {a}, offset scale {b}: residual change {dr}")
        })]
    });
    collect("cone scaling invariance", TOL, checks)
}

/// Two nappes whose axes are farther apart than the sum of their apertures
/// only meet at the vertex.
pub fn separated_cones(samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    const POINTS: usize = 64;
    let checks = exec.map_range(samples, |k| {
        let mut r = rng(sub_seed(seed, k));
        let n = r.random_range(2..=4);
        let e = random_spd(n, 0.3, 3.0, &mut r);
        let c = crate::sampling::random_normal(n, &mut r) * 3.0;
        let v1 = random_unit(n, &mut r);
        let u = loop {
            let w = random_unit(n, &mut r);
            let w = &w - &v1 * v1.dot(&w);
            if w.norm() > 1e-3 {
                break w.normalize();
            }
        };
        let theta: f64 = r.random_range(0.05..std::f64::consts::PI);
        let v2 = &v1 * theta.cos() + &u * theta.sin();
        let gap = 1e-3;
        let psi1 = r.random::<f64>() * (theta - gap).min(std::f64::consts::FRAC_PI_2);
        let psi2 = r.random::<f64>() * (theta - gap - psi1).min(std::f64::consts::FRAC_PI_2);
        let einv = e.inverse().clone();
        let k1 = ConeSpec::new(c.clone(), &einv * &v1, psi1, e.clone()).expect("valid cone");
        let k2 = ConeSpec::new(c.clone(), &einv * &v2, psi2, e.clone()).expect("valid cone");
        (0..POINTS)
            .map(|_| {
                // half of the directions lie in the plane of the two axes
                let z = if r.random::<bool>() {
                    let phi = r.random_range(-0.2..theta + 0.2);
                    &v1 * phi.cos() + &u * phi.sin() + random_unit(n, &mut r) * 1e-3
                } else {
                    random_unit(n, &mut r)
                };
                let x = &c + &einv * z * r.random_range(1e-3..10.0);
                let both = cone_classify(&k1, &x) != RegionSide::Exterior
                    && cone_classify(&k2, &x) != RegionSide::Exterior
                    && (&x - &c).norm() > 1e-6;
                Check::flag(!both, || {
                    format!("theta = {theta}, psi1 = {psi1}, psi2 = {psi2}: x = {:?} in both cones", x.as_slice())
                })
            })
            .collect()
    });
    collect("separated cones", 0.0, checks)
}

/// Every sampled workspace point lies in the flow or jump set of every mode
/// and obstacle.
pub fn covering(w: &Workspace, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let xs = mixed_samples(w, samples, seed);
    let checks = exec.map(&xs, |x| {
        let mut out = vec![Check::flag(in_f0(w, x) || in_j0(w, x), || {
            format!("x = {:?} in neither F0 nor J0", x.as_slice())
        })];
        for i in 0..w.len() {
            for m in Mode::AVOIDANCE {
                let ok = in_fm(w, i, m, x).unwrap_or(false) || in_jm(w, i, m, x).unwrap_or(false);
                out.push(Check::flag(ok, || {
                    format!("x = {:?} in neither flow nor jump set of ({}, {m})", x.as_slice(), i + 1)
                }));
            }
        }
        out
    });
    collect("flow/jump covering", 0.0, checks)
}

/// The jump map is nonempty on sampled stabilization jump-set states, and on
/// avoidance jump-set states.
pub fn jump_nonempty(w: &Workspace, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let xs = sample_near_obstacles(w, samples, seed, |i| w.param(i).epsilon, |x| in_j0(w, x));
    let mut checks = exec.map(&xs, |x| {
        let s = HybridState::new(x.clone(), 0, Mode::Stabilize);
        vec![Check::flag(jump_map(w, &s).is_ok_and(|c| !c.is_empty()), || {
            format!("empty jump map at x = {:?}", x.as_slice())
        })]
    });
    let ys = sample_near_obstacles(w, samples / 10, sub_seed(seed, 1), |i| w.param(i).delta, |_| true);
    checks.extend(exec.map(&ys, |x| {
        let mut out = Vec::new();
        for i in 0..w.len() {
            for m in Mode::AVOIDANCE {
                if in_jm(w, i, m, x).unwrap_or(false) {
                    let s = HybridState::new(x.clone(), i, m);
                    out.push(Check::flag(jump_map(w, &s).is_ok_and(|c| c.len() == 1), || {
                        format!("bad jump map at ({:?}, {}, {m})", x.as_slice(), i + 1)
                    }));
                }
            }
        }
        out
    }));
    let mut out = collect("jump map nonempty", 0.0, checks);
    if xs.len() < samples {
        out.violations += 1;
        out.first_violation
            .get_or_insert(format!("only {} of {samples} jump-set samples found", xs.len()));
    }
    out
}

/// Avoidance modes keep `‖E(x − c)‖` fixed; stabilization decreases `‖x‖`,
/// and decreases `‖E(x − c)‖` outside `𝓔(c̄, Ē)`.
pub fn controller_properties(w: &Workspace, g: &Gains, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    const TOL: f64 = 1e-12;
    let xs = mixed_samples(w, samples, seed);
    let checks = exec.map(&xs, |x| {
        let mut out = Vec::new();
        for (i, o) in w.obstacles().iter().enumerate() {
            let e = o.shape().matrix();
            let ed = e * (x - o.center());
            for m in Mode::AVOIDANCE {
                let Ok(u) = kappa(w, g, &HybridState::new(x.clone(), i, m)) else {
                    out.push(Check::flag(false, || format!("kappa failed at {:?}", x.as_slice())));
                    continue;
                };
                let scale = ed.norm() * u.norm();
                let r = if scale > 0.0 { (ed.dot(&(e * &u))).abs() / scale } else { 0.0 };
                out.push(Check::residual(r, TOL, || {
                    format!("avoidance ({}, {m}) not tangent at {:?}: {r:e}", i + 1, x.as_slice())
                }));
            }
            // stabilizing field outside 𝓔(c̄, Ē) does not increase ‖E(x − c)‖
            if o.bar_residual(1.0, x) >= 0.0 {
                let rate = -g.k0 * ed.dot(&(e * x));
                let scale = g.k0 * ed.norm() * (e * x).norm();
                let r = if scale > 0.0 { (rate / scale).max(0.0) } else { 0.0 };
                out.push(Check::residual(r, 1e-9, || {
                    format!("distance to obstacle {} grows at {:?}", i + 1, x.as_slice())
                }));
            }
        }
        let u0 = kappa(w, g, &HybridState::new(x.clone(), 0, Mode::Stabilize)).expect("total");
        let rate = x.dot(&u0);
        let expect = -g.k0 * x.norm_squared();
        let r = (rate - expect).abs() / x.norm_squared().max(1e-300);
        out.push(Check::residual(
            if rate < 0.0 { r } else { f64::INFINITY },
            TOL,
            || format!("stabilization does not decrease the norm at {:?}", x.as_slice()),
        ));
        out
    });
    collect("controller properties", TOL, checks)
}

/// Helmet nesting under hysteresis and agreement of the stabilization jump
/// set with the helmets.
pub fn set_consistency(w: &Workspace, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let xs = mixed_samples(w, samples, seed);
    let checks = exec.map(&xs, |x| {
        let mut out = Vec::new();
        let mut any = false;
        for (i, (o, p)) in w.obstacles().iter().zip(w.params()).enumerate() {
            let outer = helmet_contains(o, p.epsilon, p.nu, x).unwrap_or(false);
            let inner = helmet_contains(o, p.delta, p.mu, x).unwrap_or(false);
            any |= outer;
            out.push(Check::flag(!outer || inner, || {
                format!("x = {:?} in helmet(eps, nu) but not helmet(delta, mu) of {}", x.as_slice(), i + 1)
            }));
        }
        out.push(Check::flag(any == in_j0(w, x), || {
            format!("J0 disagrees with the helmets at {:?}", x.as_slice())
        }));
        out
    });
    collect("helmet nesting", 0.0, checks)
}

/// Every predicate agrees after reordering the obstacles.
pub fn permutation_invariance(w: &Workspace, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let mut r = rng(seed);
    let mut perm: Vec<usize> = (0..w.len()).collect();
    for k in (1..perm.len()).rev() {
        perm.swap(k, r.random_range(0..=k));
    }
    let wp = w.permuted(&perm);
    let xs = mixed_samples(w, samples, sub_seed(seed, 7));
    let checks = exec.map(&xs, |x| {
        let mut out = vec![Check::flag(
            in_workspace(w, x) == in_workspace(&wp, x) && in_f0(w, x) == in_f0(&wp, x) && in_j0(w, x) == in_j0(&wp, x),
            || format!("stabilization predicates differ at {:?}", x.as_slice()),
        )];
        let mut a = j0_indices(w, x);
        let mut b: Vec<usize> = j0_indices(&wp, x).into_iter().map(|k| perm[k]).collect();
        a.sort_unstable();
        b.sort_unstable();
        out.push(Check::flag(a == b, || format!("J0 indices differ at {:?}", x.as_slice())));
        for (k, &i) in perm.iter().enumerate() {
            for m in Mode::AVOIDANCE {
                let same = in_fm(w, i, m, x).ok() == in_fm(&wp, k, m, x).ok()
                    && in_jm(w, i, m, x).ok() == in_jm(&wp, k, m, x).ok();
                out.push(Check::flag(same, || format!("mode sets of obstacle {} differ at {:?}", i + 1, x.as_slice())));
            }
        }
        out
    });
    collect("permutation invariance", 0.0, checks)
}

/// Over a grid of admissible `(δ, μ)`: the `μ̄` radicand is positive, the
/// `θ̄` cosine is in `(0, 1)`, and `r(δ, μ)` is monotone.
pub fn tuning_bounds(w: &Workspace, grid: usize, exec: Execution) -> SuiteResult {
    const TOL: f64 = 1e-6;
    let grid = grid.max(2);
    let checks = exec.map(w.obstacles(), |o| {
        let mut out = Vec::new();
        let Ok(dl) = delta_lower(o) else {
            return vec![Check::flag(false, || "Assumption 2 fails".into())];
        };
        let frac = |k: usize| (k as f64 + 0.5) / grid as f64;
        let deltas: Vec<f64> = (0..grid).map(|k| dl + (1.0 - dl) * frac(k)).collect();
        for &d in &deltas {
            let rad = crate::tuning::bounds::mu_bar_radicand(dl, d);
            out.push(Check::flag(rad > 0.0, || format!("mu_bar radicand {rad} at delta {d}")));
            let mb = mu_bar(o, d).unwrap_or(1.0);
            for l in 0..grid {
                let mu = 1.0 + (mb - 1.0) * frac(l);
                let ct = crate::tuning::bounds::cos_theta_bar_raw(dl, d, mu);
                out.push(Check::flag(ct > 0.0 && ct < 1.0, || {
                    format!("cos theta_bar = {ct} at (delta, mu) = ({d}, {mu})")
                }));
            }
        }
        // r(δ, μ) on μ values admissible for every δ of the grid
        let mb0 = mu_bar(o, deltas[0]).unwrap_or(1.0);
        let mus: Vec<f64> = (0..grid).map(|l| 1.0 + (mb0 - 1.0) * frac(l)).collect();
        let radius = |d: f64, mu: f64| EscapeRegion::new(o, d, mu).map(|r| r.radius()).ok();
        let table: Vec<Vec<Option<f64>>> =
            deltas.iter().map(|&d| mus.iter().map(|&mu| radius(d, mu)).collect()).collect();
        for (a, row) in table.iter().enumerate() {
            for (b, &rv) in row.iter().enumerate() {
                let Some(rv) = rv else {
                    out.push(Check::flag(false, || format!("r({}, {}) failed", deltas[a], mus[b])));
                    continue;
                };
                if let Some(Some(next)) = row.get(b + 1) {
                    out.push(Check::residual((next - rv).max(0.0), TOL, || {
                        format!("r increases with mu at delta {}", deltas[a])
                    }));
                }
                if let Some(Some(up)) = table.get(a + 1).map(|r| r[b]) {
                    out.push(Check::residual((rv - up).max(0.0), TOL, || {
                        format!("r decreases with delta at mu {}", mus[b])
                    }));
                }
            }
        }
        out
    });
    collect("tuning bounds and monotonicity", TOL, checks)
}

/// Weak disjointness does not depend on argument order.
pub fn weak_disjoint_symmetry(samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let checks = exec.map_range(samples, |k| {
        let mut r = rng(sub_seed(seed, k));
        let n = r.random_range(2..=4);
        let a = EllipsoidSpec::new(Vector::zeros(n), random_spd(n, 0.3, 3.0, &mut r)).expect("dims");
        let offset = random_unit(n, &mut r) * r.random_range(0.0..6.0);
        let b = EllipsoidSpec::new(offset, random_spd(n, 0.3, 3.0, &mut r)).expect("dims");
        let ab = weak_disjoint(&a, &b);
        let ba = weak_disjoint(&b, &a);
        let ok = matches!((&ab, &ba), (Ok(x), Ok(y)) if x == y);
        vec![Check::flag(ok, || format!("weak_disjoint asymmetric: {ab:?} vs {ba:?}"))]
    });
    collect("weak disjointness symmetry", 0.0, checks)
}

/// Both auxiliary points lie on `𝓒(c, −c, θ, E)`, differ from `c` and are
/// equally far from `c` in the `E` metric.
pub fn avoidance_point_identities(samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    const TOL: f64 = 1e-9;
    let checks = exec.map_range(samples, |k| {
        let mut r = rng(sub_seed(seed, k));
        let n = r.random_range(2..=4);
        let e = random_spd(n, 0.3, 3.0, &mut r);
        let dir = random_unit(n, &mut r);
        let c = &dir * (r.random_range(1.5..10.0) / (e.matrix() * &dir).norm());
        let o = Obstacle::new(c.clone(), e.clone()).expect("valid obstacle");
        let dl = delta_lower(&o).expect("Assumption 2 by construction");
        let delta = 0.5 * (dl + 1.0);
        let mu = 1.0 + 0.5 * (mu_bar(&o, delta).expect("admissible") - 1.0);
        let mut theta = r.random_range(0.02..0.98) * theta_bar(&o, delta, mu).expect("admissible");
        // as in tuning, θ is halved while the rotated direction turns away from c
        let mut points = avoidance_points(&o, theta, None);
        for _ in 0..30 {
            if points.is_ok() {
                break;
            }
            theta *= 0.5;
            points = avoidance_points(&o, theta, None);
        }
        let Ok((p1, pm1)) = points else {
            return vec![Check::flag(false, || format!("avoidance_points failed, theta = {theta}"))];
        };
        let cone = o.cone(-&c, theta).expect("valid cone");
        let em = e.matrix();
        let (n1, n2) = ((em * (&p1 - &c)).norm(), (em * (&pm1 - &c)).norm());
        let res = [cone.residual(&p1).abs(), cone.residual(&pm1).abs(), (n1 - n2).abs() / n1.max(1e-300)];
        let worst = res.iter().copied().fold(0.0, f64::max);
        let distinct = (&p1 - &c).norm() > 1e-9 && (&pm1 - &c).norm() > 1e-9;
        vec![Check::residual(if distinct { worst } else { f64::INFINITY }, TOL, || {
            format!("theta = {theta}: residuals {res:?}")
        })]
    });
    collect("avoidance point identities", TOL, checks)
}

/// No avoidance flow set meets `W_ε = ⋂ᵢ 𝓔≥(cᵢ, εEᵢ)`.
pub fn semiglobal(w: &Workspace, epsilon: f64, samples: usize, seed: u64, exec: Execution) -> SuiteResult {
    let inside_w_eps =
        |x: &Vector| w.obstacles().iter().all(|o| o.shell_residual(epsilon, x) >= -TOL_SET);
    let mut xs = sample_where(&workspace_box(w), samples / 2, seed, 1000 * samples.max(1), inside_w_eps);
    xs.extend(sample_near_obstacles(w, samples - xs.len(), sub_seed(seed, 3), |_| epsilon * 0.9, inside_w_eps));
    let checks = exec.map(&xs, |x| {
        let mut out = Vec::new();
        for i in 0..w.len() {
            for m in Mode::AVOIDANCE {
                out.push(Check::flag(!in_fm(w, i, m, x).unwrap_or(true), || {
                    format!("x = {:?} of W_eps is in the flow set of ({}, {m})", x.as_slice(), i + 1)
                }));
            }
        }
        out
    });
    collect("semiglobal preservation", 0.0, checks)
}

/// Workspace samples, half spread over the bounding box and half concentrated
/// around the obstacles.
fn mixed_samples(w: &Workspace, samples: usize, seed: u64) -> Vec<Vector> {
    let mut xs = sample_workspace(w, samples / 2, seed);
    let near = samples - xs.len();
    xs.extend(sample_near_obstacles(w, near, sub_seed(seed, 2), |i| 0.9 * w.param(i).delta, |_| true));
    xs
}

/// Every suite, as run by the `check` command. `samples` sets the size of the
/// point-sampled suites.
pub fn run_all(w: &Workspace, g: &Gains, samples: usize, seed: u64, exec: Execution) -> Vec<SuiteResult> {
    let small = samples.clamp(1, 1000);
    let min_delta = w.params().iter().map(|p| p.delta).fold(1.0, f64::min);
    vec![
        projection_identities(small, seed, exec),
        cone_scaling(small, seed, exec),
        separated_cones(small, seed, exec),
        covering(w, samples, seed, exec),
        jump_nonempty(w, samples, seed, exec),
        set_consistency(w, samples, seed, exec),
        permutation_invariance(w, small, seed, exec),
        controller_properties(w, g, samples, seed, exec),
        tuning_bounds(w, 4, exec),
        weak_disjoint_symmetry(small, seed, exec),
        avoidance_point_identities(small, seed, exec),
        semiglobal(w, 0.999 * min_delta, samples, seed, exec),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::{auto_tune, TuneOptions};

    fn single() -> Workspace {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        auto_tune(&[o], &[], &TuneOptions::default()).unwrap().workspace
    }

    #[test]
    fn suites_pass_on_single_obstacle() {
        let w = single();
        let g = Gains::uniform(0.25).unwrap();
        for s in run_all(&w, &g, 400, 42, Execution::default()) {
            assert!(s.passed(), "{s:?}");
        }
    }

    #[test]
    fn broken_parameters_are_detected() {
        let mut w = single();
        // shrinking the flow shell below the jump shell breaks nesting
        let mut p = w.params().to_vec();
        p[0].delta = 0.9;
        p[0].epsilon = 0.8;
        w = Workspace::new(w.obstacles().to_vec(), p).unwrap();
        let s = set_consistency(&w, 2000, 42, Execution::Sequential);
        assert!(s.violations > 0);
    }

    #[test]
    fn suites_are_deterministic() {
        let a = projection_identities(50, 9, Execution::default());
        let b = projection_identities(50, 9, Execution::Sequential);
        assert_eq!(a, b);
    }
}
