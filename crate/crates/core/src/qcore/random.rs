use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::linalg::{ComplexMatrix, ComplexVector};

/// Seeded, reproducible randomness. Independent streams for parallel or
/// per-trial work are derived with [`child`](Self::child).
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Deterministic independent stream; depends only on the root seed and
    /// `index`, not on how much of this stream has been consumed.
    pub fn child(&self, index: u64) -> Self {
        Self::new(splitmix(self.seed ^ splitmix(index.wrapping_add(1))))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Haar-random unit vector in `C^dim`.
    pub fn haar_state(&mut self, dim: usize) -> ComplexVector {
        loop {
            let v = ComplexVector::from_fn(dim, |_, _| self.complex_normal());
            let n = v.norm();
            if n > 1e-12 {
                return v.unscale(n);
            }
        }
    }

    /// Haar-random unitary via QR of a Ginibre matrix with the phases of
    /// `diag(R)` divided out.
    pub fn haar_unitary(&mut self, dim: usize) -> ComplexMatrix {
        let g: ComplexMatrix = DMatrix::from_fn(dim, dim, |_, _| self.complex_normal());
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// `(1/√d) Σ_x (-1)^{f(x)} |x⟩` for a uniformly random `f`.
    pub fn random_phase_state(&mut self, dim: usize) -> ComplexVector {
        let a = 1.0 / (dim as f64).sqrt();
        ComplexVector::from_fn(dim, |_, _| Complex64::new(if self.coin() { -a } else { a }, 0.0))
    }

    /// Index drawn from unnormalized non-negative weights.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.uniform() * total;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                return k;
            }
            u -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::unitarity_residual;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomSource::new(7);
        let mut b = RandomSource::new(7);
        assert_eq!(a.haar_state(5), b.haar_state(5));
    }

    #[test]
    fn children_are_independent_of_parent_consumption() {
        let a = RandomSource::new(3);
        let mut b = RandomSource::new(3);
        b.uniform();
        assert_eq!(a.child(4).next_u64(), b.child(4).next_u64());
        assert_ne!(a.child(4).next_u64(), a.child(5).next_u64());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RandomSource::new(1);
        for d in [1, 2, 5, 16] {
            assert!(unitarity_residual(&rng.haar_unitary(d)) < 1e-12);
        }
    }

    #[test]
    fn haar_first_moment_vanishes() {
        // E[U_00] = 0 and E|U_00|² = 1/d.
        let mut rng = RandomSource::new(11);
        let d = 4;
        let trials = 4000;
        let (mut m1, mut m2) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..trials {
            let u = rng.haar_unitary(d);
            m1 += u[(0, 0)];
            m2 += u[(0, 0)].norm_sqr();
        }
        assert!((m1 / trials as f64).norm() < 0.03);
        assert!((m2 / trials as f64 - 0.25).abs() < 0.02);
    }

    #[test]
    fn phase_state_is_normalized() {
        let mut rng = RandomSource::new(0);
        assert!((rng.random_phase_state(8).norm() - 1.0).abs() < 1e-14);
    }
}
