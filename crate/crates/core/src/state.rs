use crate::error::{Error, Result};
use crate::linalg::{ensure_square, hermitian_eigenvalues, hermiticity_error, trace, ComplexMatrix};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// How far a matrix is from being a density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn of(m: &ComplexMatrix) -> Self {
        DensityDiagnostics {
            hermiticity_error: hermiticity_error(m),
            trace_error: (trace(m) - 1.0).norm(),
            min_eigenvalue: hermitian_eigenvalues(m).first().copied().unwrap_or(0.0),
        }
    }

    pub fn within(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> bool {
        self.hermiticity_error <= herm_tol && self.trace_error <= trace_tol && self.min_eigenvalue >= -pos_tol
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(ComplexMatrix);

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix, matrix.nrows())?;
        let d = DensityDiagnostics::of(&matrix);
        if !d.within(HERMITICITY_TOL, TRACE_TOL, POSITIVITY_TOL) {
            return Err(Error::InvalidDensity(format!(
                "hermiticity error {:.3e}, trace error {:.3e}, min eigenvalue {:.3e}",
                d.hermiticity_error, d.trace_error, d.min_eigenvalue
            )));
        }
        Ok(DensityOperator(matrix))
    }

    /// Wraps an evolved state without re-validating it.
    pub(crate) fn from_evolved(matrix: ComplexMatrix) -> Self {
        DensityOperator(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics::of(&self.0)
    }
}
