use super::linalg::{self, ComplexMatrix, ComplexVector};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// `½‖a − b‖₁` for Hermitian matrices of equal size.
pub fn trace_distance_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&(a - b)))
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(rho.matrix(), sigma.matrix())
}

/// Trace distance between two pure states: `√(1 − |⟨a|b⟩|²)`.
pub fn pure_trace_distance(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let overlap = a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared());
    Ok((1.0 - overlap).max(0.0).sqrt())
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &ComplexVector, rho: &ComplexMatrix) -> Result<f64> {
    if psi.len() != rho.nrows() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: psi.len() });
    }
    Ok(psi.dotc(&(rho * psi)).re)
}
