use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c64, ComplexMatrix, ONE};
use crate::qcore::{check_capacity, RandomSource};

use super::partition::Partition;
use super::tableau::{enumerate_syt, SYTableau};

/// Permutation of `0..n` in one-line notation: `images[j] = π(j)`.
/// Composition `(πσ)(j) = π(σ(j))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Exchanges `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self { images }
    }

    /// The cycle `0 → 1 → … → n−1 → 0`.
    pub fn long_cycle(n: usize) -> Self {
        Self { images: (0..n).map(|j| (j + 1) % n).collect() }
    }

    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            images.swap(i, rng.below(i + 1));
        }
        Self { images }
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                return out;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { images: other.images.iter().map(|&j| self.images[j]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.n()];
        for (j, &i) in self.images.iter().enumerate() {
            images[i] = j;
        }
        Self { images }
    }

    /// Cycle lengths, descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        let mut lens = Vec::new();
        for start in 0..self.n() {
            let (mut j, mut len) = (start, 0);
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
                len += 1;
            }
            if len > 0 {
                lens.push(len);
            }
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Adjacent transpositions `k₁, …, k_m` (each `s_k` exchanging k and k+1,
    /// zero-based) with `π = s_{k₁} s_{k₂} ⋯ s_{k_m}`.
    pub fn adjacent_word(&self) -> Vec<usize> {
        // Bubble-sort the one-line form; swapping positions k, k+1 is right
        // multiplication by s_k, so π s_{j₁} ⋯ s_{j_m} = e.
        let mut w = self.images.clone();
        let mut sorted_by = Vec::new();
        let n = w.len();
        if n < 2 {
            return sorted_by;
        }
        for pass in 0..n {
            for k in 0..(n - 1).saturating_sub(pass) {
                if w[k] > w[k + 1] {
                    w.swap(k, k + 1);
                    sorted_by.push(k);
                }
            }
        }
        sorted_by.reverse();
        sorted_by
    }
}

/// `P(π)|i₁…iₙ⟩ = |i_{π⁻¹(1)}…i_{π⁻¹(n)}⟩` on `(C^d)^{⊗n}`.
pub fn permutation_action(d: usize, pi: &Permutation) -> Result<ComplexMatrix> {
    let n = pi.n();
    let dim = d.pow(n as u32);
    check_capacity(dim * dim)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, row) in permutation_action_indices(d, pi).into_iter().enumerate() {
        m[(row, col)] = ONE;
    }
    Ok(m)
}

/// Image index of each basis state under `P(π)`.
pub fn permutation_action_indices(d: usize, pi: &Permutation) -> Vec<usize> {
    let n = pi.n();
    let dim = d.pow(n as u32);
    let strides: Vec<usize> = (0..n).map(|j| d.pow((n - 1 - j) as u32)).collect();
    (0..dim)
        .map(|x| {
            // slot j's digit moves to slot π(j)
            let mut y = 0;
            for j in 0..n {
                let digit = (x / strides[j]) % d;
                y += digit * strides[pi.apply(j)];
            }
            y
        })
        .collect()
}

/// Young's orthogonal form of the irreducible representation λ, in the
/// basis of standard tableaux ordered as in [`enumerate_syt`].
#[derive(Debug, Clone)]
pub struct YoungRep {
    shape: Partition,
    tableaux: Vec<SYTableau>,
    generators: Vec<ComplexMatrix>,
}

impl YoungRep {
    pub fn new(shape: &Partition) -> Self {
        let tableaux = enumerate_syt(shape);
        let index: HashMap<Vec<Vec<usize>>, usize> =
            tableaux.iter().enumerate().map(|(k, t)| (t.rows().to_vec(), k)).collect();
        let dim = tableaux.len();
        let n = shape.n();
        let generators = (1..n)
            .map(|k| {
                // s_k exchanges entries k and k+1 (1-based)
                let mut m = ComplexMatrix::zeros(dim, dim);
                for (a, t) in tableaux.iter().enumerate() {
                    let axial = (t.content(k + 1) - t.content(k)) as f64;
                    m[(a, a)] = c64(1.0 / axial, 0.0);
                    if let Some(s) = t.swapped(k) {
                        let b = index[s.rows()];
                        m[(b, a)] = c64((1.0 - 1.0 / (axial * axial)).sqrt(), 0.0);
                    }
                }
                m
            })
            .collect();
        Self { shape: shape.clone(), tableaux, generators }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn tableaux(&self) -> &[SYTableau] {
        &self.tableaux
    }

    pub fn dim(&self) -> usize {
        self.tableaux.len()
    }

    /// Matrix of the adjacent transposition exchanging zero-based positions
    /// `k` and `k+1`.
    pub fn adjacent(&self, k: usize) -> &ComplexMatrix {
        &self.generators[k]
    }

    pub fn matrix(&self, pi: &Permutation) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(self.dim(), self.dim());
        for k in pi.adjacent_word() {
            m *= &self.generators[k];
        }
        m
    }

    pub fn character(&self, pi: &Permutation) -> f64 {
        self.matrix(pi).trace().re
    }
}

/// `κ_λ(π)` in Young's orthogonal form.
pub fn young_orthogonal(shape: &Partition, pi: &Permutation) -> Result<ComplexMatrix> {
    if pi.n() != shape.n() {
        return Err(Error::DimensionMismatch { expected: shape.n(), found: pi.n() });
    }
    Ok(YoungRep::new(shape).matrix(pi))
}
