//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.adjoint()
}

/// Entrywise complex conjugate.
pub fn conjugate(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖U†U − I‖_F`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    frobenius(&(u.adjoint() * u - identity(n)))
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// `e^{-i H t}` for Hermitian `H`.
pub fn exp_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    ));
    &vecs * phases * vecs.adjoint()
}

/// Orthonormal basis (as columns) for the span of `columns`, built by
/// Gram–Schmidt with one re-orthogonalization pass. Columns whose residual
/// falls below `rel_tol` times the largest input norm are dropped.
pub fn orthonormal_span<I>(columns: I, rel_tol: f64) -> Vec<ComplexVector>
where
    I: IntoIterator<Item = ComplexVector>,
{
    let columns: Vec<ComplexVector> = columns.into_iter().collect();
    let scale = columns.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<ComplexVector> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for mut v in columns {
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v.axpy(-overlap, b, ONE);
            }
        }
        let norm = v.norm();
        if norm > rel_tol * scale {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix. Large inputs are first
/// restricted to their column space, which is exact for Hermitian matrices
/// and cheap when the rank is small.
pub fn trace_norm_hermitian(h: &ComplexMatrix) -> f64 {
    let dim = h.nrows();
    if dim <= 64 {
        return hermitian_eigenvalues(h).iter().map(|l| l.abs()).sum();
    }
    let basis = orthonormal_span((0..dim).map(|j| h.column(j).into_owned()), 1e-13);
    if basis.is_empty() {
        return 0.0;
    }
    if basis.len() * 2 > dim {
        return hermitian_eigenvalues(h).iter().map(|l| l.abs()).sum();
    }
    let q = ComplexMatrix::from_columns(&basis);
    let reduced = q.adjoint() * h * &q;
    hermitian_eigenvalues(&reduced).iter().map(|l| l.abs()).sum()
}

/// Householder-style completion: a unitary whose first column is `v`
/// (which must be a unit vector).
pub fn unitary_with_first_column(v: &ComplexVector) -> ComplexMatrix {
    let dim = v.len();
    // Phase-align so the reflection maps e_0 exactly onto v.
    let v0 = v[0];
    let phase = if v0.norm() > 1e-300 { v0 / v0.norm() } else { ONE };
    let mut e0 = ComplexVector::zeros(dim);
    e0[0] = phase;
    let w = &e0 - v;
    let wn = w.norm();
    let reflect = if wn < 1e-14 {
        identity(dim)
    } else {
        let w = w.unscale(wn);
        identity(dim) - outer(&w, &w).scale(2.0)
    };
    // reflect maps phase·e_0 to v; fold the phase into the first column.
    let mut u = reflect;
    let col = u.column(0) * phase;
    u.set_column(0, &col);
    u
}
