use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, ComplexMatrix, ComplexVector};
use crate::qcore::{check_capacity, RandomSource};

use super::partition::{partitions, Partition};
use super::young::{permutation_action, permutation_action_indices, Permutation, YoungRep};

/// One isotypic block `λ`: rows `offset + S·dim_gl + j` of the transform
/// hold `⟨λ, S, j|` for tableau `S` and GL index `j`.
#[derive(Debug, Clone)]
pub struct SchurBlock {
    pub partition: Partition,
    pub dim_specht: usize,
    pub dim_gl: usize,
    pub offset: usize,
    rep: YoungRep,
}

impl SchurBlock {
    pub fn size(&self) -> usize {
        self.dim_specht * self.dim_gl
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.size()
    }

    pub fn rep(&self) -> &YoungRep {
        &self.rep
    }
}

/// Position of a Schur-basis vector: (block, tableau, GL index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SchurIndex {
    pub block: usize,
    pub tableau: usize,
    pub gl: usize,
}

/// Dense Schur transform on `(C^d)^{⊗n}`. Conjugation by the matrix sends
/// `P(π)` to `⊕_λ κ_λ(π) ⊗ I` and `M^{⊗n}` to `⊕_λ I ⊗ ν_λ(M)`, with
/// `κ_λ` in Young's orthogonal form. The GL basis within each block is an
/// arbitrary but deterministic orthonormal basis.
#[derive(Debug, Clone)]
pub struct SchurTransform {
    n: usize,
    d: usize,
    matrix: ComplexMatrix,
    blocks: Vec<SchurBlock>,
    index_map: Vec<SchurIndex>,
}

pub(crate) fn layout_blocks(n: usize, d: usize) -> (Vec<SchurBlock>, Vec<SchurIndex>) {
    let mut blocks = Vec::new();
    let mut index_map = Vec::new();
    let mut offset = 0;
    for lam in partitions(n).into_iter().filter(|l| l.len() <= d) {
        let rep = YoungRep::new(&lam);
        let (ds, dg) = (rep.dim(), lam.dim_gl(d));
        let b = blocks.len();
        for s in 0..ds {
            for j in 0..dg {
                index_map.push(SchurIndex { block: b, tableau: s, gl: j });
            }
        }
        blocks.push(SchurBlock { partition: lam, dim_specht: ds, dim_gl: dg, offset, rep });
        offset += ds * dg;
    }
    (blocks, index_map)
}

impl SchurTransform {
    pub fn build(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("Schur transform needs n, d ≥ 1".into()));
        }
        let dim = d.checked_pow(n as u32).ok_or(Error::Capacity { requested: usize::MAX, cap: crate::qcore::dim_cap() })?;
        check_capacity(dim.saturating_mul(dim))?;
        let perms = Permutation::all(n);
        let actions: Vec<Vec<usize>> = perms.iter().map(|p| permutation_action_indices(d, p)).collect();
        let factorial = perms.len() as f64;
        let (blocks, index_map) = layout_blocks(n, d);
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for block in &blocks {
            let kappas: Vec<ComplexMatrix> = perms.iter().map(|p| block.rep.matrix(p)).collect();
            let scale = block.dim_specht as f64 / factorial;
            // E_{S,S₀} = (dim λ / n!) Σ_π κ(π)_{S,S₀} P(π)
            let unit = |s: usize| {
                let mut e = ComplexMatrix::zeros(dim, dim);
                for (kappa, act) in kappas.iter().zip(&actions) {
                    let coef = kappa[(s, 0)].re * scale;
                    if coef != 0.0 {
                        for (x, &y) in act.iter().enumerate() {
                            e[(y, x)] += linalg::c64(coef, 0.0);
                        }
                    }
                }
                e
            };
            let seed_projector = unit(0);
            let seeds = linalg::orthonormal_span((0..dim).map(|x| seed_projector.column(x).into_owned()), 1e-9);
            if seeds.len() != block.dim_gl {
                return Err(Error::Construction(format!(
                    "block {} has {} seed vectors, expected {}",
                    block.partition,
                    seeds.len(),
                    block.dim_gl
                )));
            }
            for s in 0..block.dim_specht {
                let transport = if s == 0 { seed_projector.clone() } else { unit(s) };
                for (j, v) in seeds.iter().enumerate() {
                    let w: ComplexVector = &transport * v;
                    let row = block.offset + s * block.dim_gl + j;
                    for x in 0..dim {
                        matrix[(row, x)] = w[x].conj();
                    }
                }
            }
        }
        let residual = linalg::unitarity_residual(&matrix);
        if residual > 1e-9 {
            return Err(Error::Construction(format!("Schur transform not unitary (residual {residual:e})")));
        }
        Ok(Self { n, d, matrix, blocks, index_map })
    }

    pub(crate) fn from_parts(n: usize, d: usize, matrix: ComplexMatrix, index_map: Vec<SchurIndex>) -> Result<Self> {
        let (blocks, expected) = layout_blocks(n, d);
        if expected != index_map {
            return Err(Error::Construction("index map does not match the block layout".into()));
        }
        let dim = d.pow(n as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(Self { n, d, matrix, blocks, index_map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn blocks(&self) -> &[SchurBlock] {
        &self.blocks
    }

    pub fn index_map(&self) -> &[SchurIndex] {
        &self.index_map
    }

    pub fn block_of(&self, lam: &Partition) -> Option<&SchurBlock> {
        self.blocks.iter().find(|b| &b.partition == lam)
    }

    /// `U X U†`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.matrix * x * self.matrix.adjoint()
    }

    /// Frobenius norm of everything outside the λ diagonal blocks of an
    /// already conjugated operator.
    pub fn off_block_residual(&self, conjugated: &ComplexMatrix) -> f64 {
        let mut owner = vec![0; self.dim()];
        for (k, idx) in self.index_map.iter().enumerate() {
            owner[k] = idx.block;
        }
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                if owner[i] != owner[j] {
                    acc += conjugated[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn diagonal_block(&self, conjugated: &ComplexMatrix, block: &SchurBlock) -> ComplexMatrix {
        let r = block.range();
        conjugated.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    /// `ν_λ(M)`: the GL block of `M^{⊗n}` at the first tableau.
    pub fn nu(&self, block: &SchurBlock, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.d || m.ncols() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: m.nrows() });
        }
        let rows = self.matrix.rows(block.offset, block.dim_gl).into_owned();
        let q = tensor_power_matrix(m, self.n);
        Ok(&rows * q * rows.adjoint())
    }

    /// `s_λ(ρ) = tr ν_λ(ρ)`.
    pub fn schur_polynomial(&self, lam: &Partition, rho: &ComplexMatrix) -> Result<f64> {
        let block = self
            .block_of(lam)
            .ok_or_else(|| Error::InvalidArgument(format!("{lam} has more than {} rows", self.d)))?;
        Ok(self.nu(block, rho)?.trace().re)
    }
}

/// `M^{⊗n}`.
pub fn tensor_power_matrix(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut out = m.clone();
    for _ in 1..n {
        out = linalg::kron(&out, m);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurReport {
    pub n: usize,
    pub d: usize,
    pub dimension_sum: usize,
    pub dimension_identity: bool,
    pub unitarity_residual: f64,
    pub max_permutation_off_block: f64,
    pub max_permutation_block_error: f64,
    pub max_gl_off_block: f64,
    pub max_gl_block_error: f64,
    pub max_nu_homomorphism_error: f64,
    pub pass: bool,
}

pub const SCHUR_TOLERANCE: f64 = 1e-9;

/// Checks the block structure on `samples` random permutations and Haar
/// unitaries.
pub fn verify(n: usize, d: usize, samples: usize, rng: &mut RandomSource) -> Result<SchurReport> {
    let st = SchurTransform::build(n, d)?;
    let dimension_sum: usize = partitions(n).iter().map(|l| l.dim_specht() * l.dim_gl(d)).sum();
    let (mut p_off, mut p_blk, mut q_off, mut q_blk, mut hom) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let pi = Permutation::random(n, rng);
        let conj = st.conjugate(&permutation_action(d, &pi)?);
        p_off = p_off.max(st.off_block_residual(&conj));
        for b in st.blocks() {
            let expected = linalg::kron(&b.rep.matrix(&pi), &ComplexMatrix::identity(b.dim_gl, b.dim_gl));
            p_blk = p_blk.max(linalg::frobenius(&(st.diagonal_block(&conj, b) - expected)));
        }
        let (m1, m2) = (rng.haar_unitary(d), rng.haar_unitary(d));
        let conj = st.conjugate(&tensor_power_matrix(&m1, n));
        q_off = q_off.max(st.off_block_residual(&conj));
        for b in st.blocks() {
            let nu1 = st.nu(b, &m1)?;
            let expected = linalg::kron(&ComplexMatrix::identity(b.dim_specht, b.dim_specht), &nu1);
            q_blk = q_blk.max(linalg::frobenius(&(st.diagonal_block(&conj, b) - expected)));
            let lhs = st.nu(b, &(&m1 * &m2))?;
            hom = hom.max(linalg::frobenius(&(lhs - nu1 * st.nu(b, &m2)?)));
        }
    }
    let unitarity = linalg::unitarity_residual(st.matrix());
    let identity_ok = dimension_sum == d.pow(n as u32);
    Ok(SchurReport {
        n,
        d,
        dimension_sum,
        dimension_identity: identity_ok,
        unitarity_residual: unitarity,
        max_permutation_off_block: p_off,
        max_permutation_block_error: p_blk,
        max_gl_off_block: q_off,
        max_gl_block_error: q_blk,
        max_nu_homomorphism_error: hom,
        pass: identity_ok
            && unitarity <= SCHUR_TOLERANCE
            && p_off.max(p_blk).max(q_off).max(q_blk) <= SCHUR_TOLERANCE
            && hom <= 1e-8,
    })
}
