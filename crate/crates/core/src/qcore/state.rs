use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;

use super::layout::{offsets, RegisterLayout};
use super::linalg::{self, ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

const DEFAULT_DIM_CAP: usize = 1 << 24;

/// Maximum number of stored complex entries in any state. Overridable with
/// the `ACORNLAB_DIM_CAP` environment variable (read once).
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("ACORNLAB_DIM_CAP")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

pub fn check_capacity(entries: usize) -> Result<()> {
    let cap = dim_cap();
    if entries > cap {
        return Err(Error::Capacity { requested: entries, cap });
    }
    Ok(())
}

fn checked_product(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b).ok_or(Error::Capacity { requested: usize::MAX, cap: dim_cap() })
}

/// Pure state over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: ComplexVector,
}

impl StateVector {
    pub fn new(layout: RegisterLayout, amps: ComplexVector) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: amps.len() });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        check_capacity(amps.len())?;
        Ok(Self { layout, amps })
    }

    /// Single-register state `name` holding the given amplitudes.
    pub fn from_amplitudes(name: &str, amps: Vec<Complex64>) -> Result<Self> {
        let layout = RegisterLayout::new();
        let mut layout = layout;
        layout.push(name, amps.len(), 1)?;
        Self::new(layout, DVector::from_vec(amps))
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} ≥ {dim}")));
        }
        check_capacity(dim)?;
        let mut amps = ComplexVector::zeros(dim);
        amps[index] = linalg::ONE;
        Ok(Self { layout, amps })
    }

    /// Basis state given one digit per flat subsystem.
    pub fn basis_digits(layout: RegisterLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(d, n)| d >= n) {
            return Err(Error::InvalidArgument(format!("digits {digits:?} do not fit {dims:?}")));
        }
        let index = digits.iter().zip(&dims).fold(0, |acc, (d, n)| acc * n + d);
        Self::basis(layout, index)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut ComplexVector {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.amps.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        self.amps.unscale_mut(n);
        Ok(self)
    }

    pub fn with_layout(self, layout: RegisterLayout) -> Result<Self> {
        Self::new(layout, self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = checked_product(self.dim(), other.dim())?;
        check_capacity(dim)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Self { layout: self.layout.concat(&other.layout), amps })
    }

    /// `|ψ⟩^{⊗n}`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n ≥ 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    pub fn conj(&self) -> Self {
        Self { layout: self.layout.clone(), amps: self.amps.map(|z| z.conj()) }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        check_capacity(checked_product(self.dim(), self.dim())?)?;
        Ok(DensityMatrix { layout: self.layout.clone(), matrix: linalg::outer(&self.amps, &self.amps) })
    }

    /// Reorders flat subsystems: subsystem `j` of the result is subsystem
    /// `order[j]` of `self`. `layout` describes the result and must agree
    /// with the permuted dimensions.
    pub fn permute_subsystems(&self, order: &[usize], layout: RegisterLayout) -> Result<Self> {
        let perm = subsystem_permutation(&self.layout, order, &layout)?;
        let mut amps = ComplexVector::zeros(self.dim());
        for (old, &new) in perm.iter().enumerate() {
            amps[new] = self.amps[old];
        }
        Ok(Self { layout, amps })
    }

    /// Reduced density matrix on the named registers (layout order).
    pub fn reduced_density<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let (kept, keep_off, trace_off, layout) = split_offsets(&self.layout, keep)?;
        let _ = kept;
        let dk = keep_off.len();
        check_capacity(checked_product(dk, dk)?)?;
        // Gather the (keep × traced) coefficient matrix column by column,
        // skipping columns that are identically zero.
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for &t in &trace_off {
            let col: Vec<Complex64> = keep_off.iter().map(|&k| self.amps[k + t]).collect();
            if col.iter().any(|z| *z != ZERO) {
                cols.push(col);
            }
        }
        let mut matrix = ComplexMatrix::zeros(dk, dk);
        for col in &cols {
            for j in 0..dk {
                let cj = col[j].conj();
                if cj == ZERO {
                    continue;
                }
                let mut dst = matrix.column_mut(j);
                for i in 0..dk {
                    dst[i] += col[i] * cj;
                }
            }
        }
        Ok(DensityMatrix { layout, matrix })
    }
}

/// Returns (kept flat subsystems, kept offsets, traced offsets, kept layout).
fn split_offsets<S: AsRef<str>>(
    layout: &RegisterLayout,
    keep: &[S],
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>, RegisterLayout)> {
    let kept = layout.select(keep)?;
    if kept.is_empty() {
        return Err(Error::EmptySelection);
    }
    let dims = layout.dims();
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    let keep_off = offsets(&dims, &kept);
    let trace_off = offsets(&dims, &traced);
    Ok((kept, keep_off, trace_off, layout.restrict(keep)?))
}

/// `perm[old_index] = new_index` for a subsystem reordering.
fn subsystem_permutation(
    from: &RegisterLayout,
    order: &[usize],
    to: &RegisterLayout,
) -> Result<Vec<usize>> {
    let dims = from.dims();
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return Err(Error::InvalidArgument(format!("order {order:?} is not a permutation")));
    }
    for &o in order {
        if o >= dims.len() || seen[o] {
            return Err(Error::InvalidArgument(format!("order {order:?} is not a permutation")));
        }
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    if new_dims != to.dims() {
        return Err(Error::LayoutMismatch(format!(
            "permuted dims {new_dims:?} do not match target layout {:?}",
            to.dims()
        )));
    }
    // offsets(dims, order) enumerates old indices in new-index order.
    let old_in_new_order = offsets(&dims, order);
    let mut perm = vec![0; old_in_new_order.len()];
    for (new, &old) in old_in_new_order.iter().enumerate() {
        perm[old] = new;
    }
    Ok(perm)
}

/// Mixed state over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps a square matrix. Physical validity is checked separately by
    /// [`check_physical`](Self::check_physical).
    pub fn new(layout: RegisterLayout, matrix: ComplexMatrix) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        check_capacity(checked_product(dim, dim)?)?;
        Ok(Self { layout, matrix })
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Result<Self> {
        let dim = layout.total_dim();
        Self::new(layout, linalg::identity(dim).unscale(dim as f64))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn with_layout(self, layout: RegisterLayout) -> Result<Self> {
        Self::new(layout, self.matrix)
    }

    /// Hermitian to `tol`, eigenvalues ≥ −`tol`, trace within `tol` of 1.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        let herm = linalg::hermiticity_residual(&self.matrix);
        if herm > tol {
            return Err(Error::Precondition(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = self.trace();
        if (tr - linalg::ONE).norm() > tol {
            return Err(Error::Precondition(format!("trace {tr} ≠ 1")));
        }
        let min = linalg::hermitian_eigenvalues(&self.matrix).first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::Precondition(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = checked_product(self.dim(), other.dim())?;
        check_capacity(checked_product(dim, dim)?)?;
        Ok(Self {
            layout: self.layout.concat(&other.layout),
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n ≥ 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Trace out every register not named in `keep`.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let (_, keep_off, trace_off, layout) = split_offsets(&self.layout, keep)?;
        let dk = keep_off.len();
        let mut matrix = ComplexMatrix::zeros(dk, dk);
        for j in 0..dk {
            for i in 0..dk {
                let mut acc = ZERO;
                for &t in &trace_off {
                    acc += self.matrix[(keep_off[i] + t, keep_off[j] + t)];
                }
                matrix[(i, j)] = acc;
            }
        }
        Ok(Self { layout, matrix })
    }

    pub fn permute_subsystems(&self, order: &[usize], layout: RegisterLayout) -> Result<Self> {
        let perm = subsystem_permutation(&self.layout, order, &layout)?;
        let dim = self.dim();
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..dim {
                matrix[(perm[i], perm[j])] = self.matrix[(i, j)];
            }
        }
        Ok(Self { layout, matrix })
    }

    /// `U ρ U†` for a unitary on the whole space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(Self { layout: self.layout.clone(), matrix: u * &self.matrix * u.adjoint() })
    }

    /// `U ρ U†` with `U` acting on the listed flat subsystems.
    pub fn apply_local(&self, subs: &[usize], u: &ComplexMatrix) -> Result<Self> {
        let dims = self.layout.dims();
        let local: usize = subs.iter().map(|&s| dims[s]).product();
        if u.nrows() != local || u.ncols() != local {
            return Err(Error::DimensionMismatch { expected: local, found: u.nrows() });
        }
        let mut left = self.matrix.clone();
        for mut col in left.column_iter_mut() {
            apply_local_slice(col.as_mut_slice(), &dims, subs, u, None);
        }
        let mut both = left.adjoint();
        for mut col in both.column_iter_mut() {
            apply_local_slice(col.as_mut_slice(), &dims, subs, u, None);
        }
        Ok(Self { layout: self.layout.clone(), matrix: both.adjoint() })
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_pure(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.matrix * a)).re)
    }
}

/// Applies `op` to the digits of `targets` in a flat amplitude buffer,
/// optionally only where the `control` subsystem (a qubit) reads 1.
pub fn apply_local_slice(
    amps: &mut [Complex64],
    dims: &[usize],
    targets: &[usize],
    op: &ComplexMatrix,
    control: Option<usize>,
) {
    let rest: Vec<usize> = (0..dims.len())
        .filter(|s| !targets.contains(s) && Some(*s) != control)
        .collect();
    let local = offsets(dims, targets);
    let mut bases = offsets(dims, &rest);
    if let Some(c) = control {
        let shift = offsets(dims, &[c])[1];
        bases.iter_mut().for_each(|b| *b += shift);
    }
    let n = local.len();
    let mut buf = vec![ZERO; n];
    for base in bases {
        for (k, &o) in local.iter().enumerate() {
            buf[k] = amps[base + o];
        }
        for (r, &o) in local.iter().enumerate() {
            let mut acc = ZERO;
            for (k, b) in buf.iter().enumerate() {
                acc += op[(r, k)] * b;
            }
            amps[base + o] = acc;
        }
    }
}

/// Applies a basis permutation (`perm[local_in] = local_out`) to the digits
/// of `targets`, optionally controlled on a qubit.
pub fn permute_local_slice(
    amps: &mut [Complex64],
    dims: &[usize],
    targets: &[usize],
    perm: &[usize],
    control: Option<usize>,
) {
    let rest: Vec<usize> = (0..dims.len())
        .filter(|s| !targets.contains(s) && Some(*s) != control)
        .collect();
    let local = offsets(dims, targets);
    let mut bases = offsets(dims, &rest);
    if let Some(c) = control {
        let shift = offsets(dims, &[c])[1];
        bases.iter_mut().for_each(|b| *b += shift);
    }
    let mut buf = vec![ZERO; local.len()];
    for base in bases {
        for (k, &o) in local.iter().enumerate() {
            buf[k] = amps[base + o];
        }
        for (k, &dst) in perm.iter().enumerate() {
            amps[base + local[dst]] = buf[k];
        }
    }
}
