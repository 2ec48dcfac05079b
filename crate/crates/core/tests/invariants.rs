//! Randomized invariants of the geometry, the control law and closed-loop
//! solutions.

use hybrid_avoidance::controller::{kappa, Gains, HybridState};
use hybrid_avoidance::geometry::{proj_orthogonal, proj_parallel, reflect, SpdMatrix, Vector};
use hybrid_avoidance::obstacle::{in_workspace, Mode, Obstacle};
use hybrid_avoidance::simulator::{check_trajectory, simulate, SolverConfig, Termination};
use hybrid_avoidance::tuning::{auto_tune, TuneOptions};
use proptest::prelude::*;

fn vec_strategy(n: usize, r: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-r..r, n).prop_map(Vector::from_vec)
}

fn nonzero(n: usize) -> impl Strategy<Value = Vector> {
    vec_strategy(n, 10.0).prop_filter("nonzero", |z| z.norm() > 1e-3)
}

/// SPD matrix `R·diag(λ)·Rᵀ` in the plane, with `λ ∈ [0.3, 2]`.
fn spd2() -> impl Strategy<Value = SpdMatrix> {
    (0.3..2.0f64, 0.3..2.0f64, 0.0..std::f64::consts::PI).prop_map(|(a, b, t)| {
        let (s, c) = t.sin_cos();
        let rows = vec![
            vec![a * c * c + b * s * s, (a - b) * s * c],
            vec![(a - b) * s * c, a * s * s + b * c * c],
        ];
        SpdMatrix::from_rows(&rows).unwrap()
    })
}

proptest! {
    #[test]
    fn projections_decompose(z in nonzero(4), x in vec_strategy(4, 10.0)) {
        let par = proj_parallel(&z, &x).unwrap();
        let orth = proj_orthogonal(&z, &x).unwrap();
        let scale = 1.0 + x.norm();
        prop_assert!((&par + &orth - &x).norm() <= 1e-12 * scale);
        prop_assert!(orth.dot(&z).abs() <= 1e-12 * scale * z.norm());
        let r = reflect(&z, &x).unwrap();
        prop_assert!((r.norm() - x.norm()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn spd_inverse_and_square(e in spd2()) {
        let id = e.matrix() * e.inverse();
        prop_assert!((id - nalgebra::DMatrix::<f64>::identity(2, 2)).norm() <= 1e-12);
        prop_assert!((e.matrix() * e.matrix() - e.squared()).norm() <= 1e-12);
        prop_assert!(e.lambda_min() > 0.0 && e.lambda_min() <= e.lambda_max());
    }

    #[test]
    fn avoidance_flow_keeps_level_set(
        e in spd2(),
        angle in 0.0..std::f64::consts::TAU,
        dist in 3.0..8.0f64,
        x in vec_strategy(2, 12.0),
        positive in any::<bool>(),
    ) {
        let c = [dist * angle.cos(), dist * angle.sin()];
        let o = Obstacle::new(Vector::from_column_slice(&c), e).unwrap();
        let tuned = auto_tune(std::slice::from_ref(&o), &[], &TuneOptions::default());
        prop_assume!(tuned.is_ok());
        let w = tuned.unwrap().workspace;
        let d = &x - o.center();
        prop_assume!(d.norm() > 1e-3);
        let m = if positive { Mode::Positive } else { Mode::Negative };
        let u = kappa(&w, &Gains::uniform(0.5).unwrap(), &HybridState::new(x.clone(), 0, m)).unwrap();
        // d/dt ‖E(x − c)‖² / 2 = (E(x − c))ᵀE u
        let rate = (o.shape().matrix() * &d).dot(&(o.shape().matrix() * &u));
        let scale = (o.shape().matrix() * &d).norm() * (o.shape().matrix() * &u).norm();
        prop_assert!(rate.abs() <= 1e-12 * (1.0 + scale));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_obstacle_closed_loop_is_safe(
        e in spd2(),
        angle in 0.0..std::f64::consts::TAU,
        dist in 3.0..8.0f64,
        x0 in vec_strategy(2, 12.0),
    ) {
        let c = [dist * angle.cos(), dist * angle.sin()];
        let o = Obstacle::new(Vector::from_column_slice(&c), e).unwrap();
        let tuned = auto_tune(&[o], &[], &TuneOptions::default());
        prop_assume!(tuned.is_ok());
        let w = tuned.unwrap().workspace;
        prop_assume!(in_workspace(&w, &x0));
        let g = Gains::uniform(0.5).unwrap();
        let cfg = SolverConfig { step: 5e-3, t_max: 80.0, ..SolverConfig::default() };
        let tr = simulate(&w, &g, &x0, &cfg).unwrap();
        let rep = check_trajectory(&tr, &w, &g);
        prop_assert!(rep.min_clearance >= 1.0 - 1e-6, "{rep:?}");
        prop_assert_eq!(rep.termination, Termination::Converged);
        prop_assert!(rep.jump_count <= 2);
        prop_assert!(rep.max_avoidance_drift <= 1e-6);
    }
}
