//! Reproducible sampling: a randomly shifted Halton sequence for workspace
//! coverage and seeded generators for random directions and shape matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Matrix, SpdMatrix, Vector};
use crate::obstacle::{in_workspace, Workspace};

/// Default seed of every sampled check.
pub const DEFAULT_SEED: u64 = 42;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += (k % b) as f64 * f;
        k /= b;
        f *= inv;
    }
    r
}

/// Halton points in `[0, 1)ⁿ` with a Cranley–Patterson rotation drawn from the
/// seed.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sequence supports up to {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            shift: (0..dim).map(|_| rng.random::<f64>()).collect(),
            index: 1,
        }
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let k = self.index;
        self.index += 1;
        Some(
            self.shift
                .iter()
                .zip(PRIMES)
                .map(|(s, p)| (radical_inverse(k, p) + s).fract())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vector,
    pub hi: Vector,
}

impl BoundingBox {
    pub fn point(&self, unit: &[f64]) -> Vector {
        Vector::from_fn(self.lo.len(), |k, _| self.lo[k] + unit[k] * (self.hi[k] - self.lo[k]))
    }

    fn grow(&mut self, lo: &Vector, hi: &Vector) {
        self.lo = self.lo.inf(lo);
        self.hi = self.hi.sup(hi);
    }
}

/// Box holding the origin and every `𝓔(cᵢ, δᵢEᵢ)`, widened by half its extent
/// about its centre.
pub fn workspace_box(w: &Workspace) -> BoundingBox {
    let n = w.dim();
    let mut b = BoundingBox {
        lo: Vector::zeros(n),
        hi: Vector::zeros(n),
    };
    for (o, p) in w.obstacles().iter().zip(w.params()) {
        let hw = o.dilated(p.delta).half_widths();
        b.grow(&(o.center() - &hw), &(o.center() + &hw));
    }
    let mid = (&b.lo + &b.hi) * 0.5;
    let half = (&b.hi - &b.lo) * 0.75;
    BoundingBox {
        lo: &mid - &half,
        hi: &mid + &half,
    }
}

/// Box around `𝓔(c, aE)`.
pub fn ellipsoid_box(center: &Vector, half_widths: &Vector) -> BoundingBox {
    BoundingBox {
        lo: center - half_widths,
        hi: center + half_widths,
    }
}

/// Up to `count` Halton points of `bx` accepted by `keep`, drawing at most
/// `max_draws` candidates.
pub fn sample_where<F: FnMut(&Vector) -> bool>(
    bx: &BoundingBox,
    count: usize,
    seed: u64,
    max_draws: usize,
    mut keep: F,
) -> Vec<Vector> {
    Halton::new(bx.lo.len(), seed)
        .take(max_draws)
        .map(|u| bx.point(&u))
        .filter(|x| keep(x))
        .take(count)
        .collect()
}

/// `count` quasi-random points of the obstacle-free workspace.
pub fn sample_workspace(w: &Workspace, count: usize, seed: u64) -> Vec<Vector> {
    sample_where(&workspace_box(w), count, seed, 1000 * count.max(1), |x| in_workspace(w, x))
}

/// Points of the free workspace drawn from boxes around each `𝓔(cᵢ, aᵢEᵢ)`,
/// where `scale(i)` gives `aᵢ`; `count` is split evenly among the obstacles.
pub fn sample_near_obstacles<F, K>(w: &Workspace, count: usize, seed: u64, scale: F, mut keep: K) -> Vec<Vector>
where
    F: Fn(usize) -> f64,
    K: FnMut(&Vector) -> bool,
{
    let per = count.div_ceil(w.len());
    let mut out = Vec::with_capacity(per * w.len());
    for (i, o) in w.obstacles().iter().enumerate() {
        let bx = ellipsoid_box(o.center(), &o.dilated(scale(i)).half_widths());
        let s = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1));
        out.extend(sample_where(&bx, per, s, 500 * per.max(1), |x| in_workspace(w, x) && keep(x)));
    }
    out.truncate(count);
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_normal(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_unit(n: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let v = random_normal(n, rng);
        let nv = v.norm();
        if nv > 1e-6 {
            return v / nv;
        }
    }
}

/// SPD matrix `QΛQᵀ` with eigenvalues drawn log-uniformly from `[lo, hi]`.
pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> SpdMatrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let q = a.qr().q();
    let lam = Vector::from_fn(n, |_, _| (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp());
    let m = &q * Matrix::from_diagonal(&lam) * q.transpose();
    SpdMatrix::new((&m + m.transpose()) * 0.5).expect("well-conditioned by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::Obstacle;
    use crate::tuning::{auto_tune, TuneOptions};

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn halton_is_seeded_and_uniform() {
        let a: Vec<_> = Halton::new(2, 1).take(4000).collect();
        let b: Vec<_> = Halton::new(2, 1).take(4000).collect();
        assert_eq!(a, b);
        assert_ne!(a, Halton::new(2, 2).take(4000).collect::<Vec<_>>());
        let q = a.iter().filter(|u| u[0] < 0.5 && u[1] < 0.5).count();
        assert!((q as f64 / 4000.0 - 0.25).abs() < 0.01);
    }

    #[test]
    fn workspace_samples_are_free() {
        let o = Obstacle::ball(&[4.0, 0.0]).unwrap();
        let w = auto_tune(&[o], &[], &TuneOptions::default()).unwrap().workspace;
        let bx = workspace_box(&w);
        assert!(bx.lo[0] < 0.0 && bx.hi[0] > 4.0 + 1.0 / 0.75);
        let xs = sample_workspace(&w, 500, 42);
        assert_eq!(xs.len(), 500);
        assert!(xs.iter().all(|x| in_workspace(&w, x)));
    }

    #[test]
    fn random_spd_spectrum() {
        let mut r = rng(3);
        for _ in 0..20 {
            let s = random_spd(3, 0.5, 2.0, &mut r);
            assert!(s.lambda_min() >= 0.5 - 1e-12 && s.lambda_max() <= 2.0 + 1e-12);
        }
    }
}
