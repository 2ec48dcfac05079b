//! Small numerical kernels shared by the tuning and control-bound code.

use nalgebra::SymmetricEigen;

use crate::geometry::{Matrix, Vector};

const BISECTION_ITERS: usize = 200;

/// Global minimizer of `wᵀMw + 2bᵀw` over the unit sphere `‖w‖ = 1`, for
/// symmetric `M`. Returns the minimum value and a minimizer.
///
/// Solved through the secular equation `‖(M − λI)⁻¹b‖ = 1` with
/// `λ ≤ λmin(M)`, including the degenerate case where `b` has no component in
/// the lowest eigenspace.
pub fn min_quadratic_on_sphere(m: &Matrix, b: &Vector) -> (f64, Vector) {
    let n = b.len();
    let eig = SymmetricEigen::new(m.clone());
    let lam = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let bt = q.transpose() * b;
    let lmin = lam.min();
    let scale = lam.amax().max(b.norm()).max(1.0);
    let in_min: Vec<bool> = lam.iter().map(|&l| l - lmin <= 1e-12 * scale).collect();
    let bmin = in_min
        .iter()
        .zip(bt.iter())
        .filter(|(m, _)| **m)
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt();

    let coords = |mu: f64, skip_min: bool| -> Vector {
        Vector::from_fn(n, |k, _| {
            if skip_min && in_min[k] {
                0.0
            } else {
                -bt[k] / (lam[k] - mu)
            }
        })
    };
    let solve = |skip_min: bool| -> Vector {
        let mut lo = lmin - b.norm() - 1e-300;
        let mut hi = lmin;
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if coords(mid, skip_min).norm_squared() > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        coords(lo, skip_min)
    };

    let wt = if bmin > 1e-10 * scale {
        solve(false)
    } else {
        let rest = coords(lmin, true);
        let r2 = rest.norm_squared();
        if r2 <= 1.0 {
            let k = in_min.iter().position(|&m| m).expect("nonempty eigenspace");
            let mut w = rest;
            w[k] = (1.0 - r2).sqrt();
            w
        } else {
            solve(true)
        }
    };
    let w = (q * wt).normalize();
    let val = w.dot(&(m * &w)) + 2.0 * b.dot(&w);
    (val, w)
}

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns the best
/// point evaluated, so non-finite values are tolerated.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for (x, fx) in [(a, f(a)), (b, f(b))] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Minimizes `f` over `[a, b]` by scanning `grid` evenly spaced points and
/// refining the best cells with golden-section search.
pub fn scan_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, grid: usize, refine: usize) -> (f64, f64) {
    if b <= a {
        return (a, f(a));
    }
    let grid = grid.max(2);
    let h = (b - a) / (grid - 1) as f64;
    let mut pts: Vec<(f64, f64)> = (0..grid)
        .map(|k| {
            let x = if k + 1 == grid { b } else { a + h * k as f64 };
            (x, f(x))
        })
        .collect();
    let mut best = pts
        .iter()
        .copied()
        .fold((a, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    pts.sort_by(|p, q| p.1.total_cmp(&q.1));
    for &(x, fx) in pts.iter().take(refine) {
        if !fx.is_finite() {
            break;
        }
        let cand = golden_min(&mut f, (x - h).max(a), (x + h).min(b), 1e-13 * (1.0 + x.abs()));
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}
