use super::linalg::{self, ComplexMatrix, ComplexVector, ONE};
use super::metrics::trace_distance_matrices;
use crate::error::{Error, Result};

/// Linear map on operators in row-major vectorized form:
/// `vec(ρ)[i·d + j] = ρ[i, j]`, so `vec(UρU†) = (U ⊗ Ū) vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
}

pub fn vectorize(rho: &ComplexMatrix) -> ComplexVector {
    let d = rho.nrows();
    ComplexVector::from_fn(d * rho.ncols(), |k, _| rho[(k / d, k % d)])
}

pub fn unvectorize(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

impl Superoperator {
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != d_out * d_out || matrix.ncols() != d_in * d_in {
            return Err(Error::DimensionMismatch { expected: d_out * d_out, found: matrix.nrows() });
        }
        Ok(Self { d_in, d_out, matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { d_in: d, d_out: d, matrix: linalg::identity(d * d) }
    }

    pub fn from_unitary(u: &ComplexMatrix) -> Self {
        let d = u.nrows();
        Self { d_in: d, d_out: d, matrix: linalg::kron(u, &linalg::conjugate(u)) }
    }

    /// Tabulates a linear map by its action on the matrix units `|i⟩⟨j|`.
    pub fn from_map<F>(d_in: usize, d_out: usize, mut map: F) -> Result<Self>
    where
        F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
    {
        let mut matrix = ComplexMatrix::zeros(d_out * d_out, d_in * d_in);
        for i in 0..d_in {
            for j in 0..d_in {
                let mut unit = ComplexMatrix::zeros(d_in, d_in);
                unit[(i, j)] = ONE;
                let out = map(&unit)?;
                if out.nrows() != d_out || out.ncols() != d_out {
                    return Err(Error::DimensionMismatch { expected: d_out, found: out.nrows() });
                }
                matrix.set_column(i * d_in + j, &vectorize(&out));
            }
        }
        Ok(Self { d_in, d_out, matrix })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.d_in || rho.ncols() != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, found: rho.nrows() });
        }
        Ok(unvectorize(&(&self.matrix * vectorize(rho)), self.d_out))
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if first.d_out != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, found: first.d_out });
        }
        Ok(Self { d_in: first.d_in, d_out: self.d_out, matrix: &self.matrix * &first.matrix })
    }

    /// Normalized Choi state `(1/d) Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi_state(&self) -> ComplexMatrix {
        let (di, dout) = (self.d_in, self.d_out);
        let mut choi = ComplexMatrix::zeros(di * dout, di * dout);
        let scale = 1.0 / di as f64;
        for i in 0..di {
            for j in 0..di {
                let col = self.matrix.column(i * di + j);
                for a in 0..dout {
                    for b in 0..dout {
                        choi[(i * dout + a, j * dout + b)] = col[a * dout + b] * scale;
                    }
                }
            }
        }
        choi
    }
}

/// Trace distance between normalized Choi states. This is a lower bound on
/// half the diamond distance.
pub fn channel_distance(a: &Superoperator, b: &Superoperator) -> Result<f64> {
    if a.d_in != b.d_in || a.d_out != b.d_out {
        return Err(Error::DimensionMismatch { expected: a.d_in, found: b.d_in });
    }
    if a.d_in != a.d_out {
        return Err(Error::InvalidArgument("channel_distance needs square superoperators".into()));
    }
    trace_distance_matrices(&a.choi_state(), &b.choi_state())
}
