//! Dense complex matrices and the Hermitian eigensolver.
//!
//! Everything here works on small (≤ 81×81) dense matrices stored as
//! `nalgebra::DMatrix<Complex64>`. Vectorization is column-stacking, which
//! coincides with nalgebra's column-major storage.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue gap below which two eigenvalues are one cluster.
pub const DEGENERACY_RTOL: f64 = 1e-9;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = ONE;
    v
}

/// `|ψ⟩⟨ψ|`
pub fn outer(psi: &ComplexVector) -> ComplexMatrix {
    psi * psi.adjoint()
}

pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Entrywise comparison with an explicit absolute tolerance.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

/// `max |M − M†|`
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Column-stacking `vec`.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a square `dim × dim` matrix.
pub fn unvectorize(v: &ComplexVector, dim: usize) -> ComplexMatrix {
    assert_eq!(v.len(), dim * dim);
    ComplexMatrix::from_column_slice(dim, dim, v.as_slice())
}

pub fn ensure_square(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// Eigenpairs of a Hermitian matrix: `M·V = V·diag(values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }

    /// `V·diag(f(λ))·V†`
    pub fn map_spectrum<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            scaled.set_column(k, &(self.vectors.column(k) * f(lambda)));
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come out ascending. Each eigenvector is phase-fixed so its
/// first non-negligible entry is real and positive. Inside a degenerate
/// cluster (relative gap below [`DEGENERACY_RTOL`]) vectors are ordered by
/// descending lexicographic comparison of their entries, which maps the
/// identity matrix to `V = I`.
pub fn hermitian_eigendecomposition(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    ensure_square(m, n)?;
    let deviation = hermiticity_error(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut pairs: Vec<(f64, ComplexVector)> =
        (0..n).map(|k| (eig.eigenvalues[k], fix_phase(eig.eigenvectors.column(k).into_owned()))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale = pairs.iter().map(|p| p.0.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end].0 - pairs[end - 1].0).abs() <= DEGENERACY_RTOL * scale {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lex_cmp(&b.1, &a.1));
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(k, v);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix (no convention work).
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn fix_phase(mut v: ComplexVector) -> ComplexVector {
    let norm = v.norm();
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-10 * norm) {
        let phase = z.conj() / z.norm();
        v *= phase;
        // the pivot entry is now real up to rounding; make it exactly so
        if let Some(p) = v.iter_mut().find(|w| w.norm() > 1e-10 * norm) {
            p.im = 0.0;
        }
    }
    v
}

fn lex_cmp(a: &ComplexVector, b: &ComplexVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}
