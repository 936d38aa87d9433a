//! Eigenvalues of weighted boundary value problems and covariance operators,
//! and infinite products of eigenvalue ratios.

pub mod nystrom;
pub mod ode;
pub mod product;
pub mod shooting;

use serde::Serialize;
use thiserror::Error;

use crate::kernels::KernelError;

pub use nystrom::{nystrom_eigenvalues, nystrom_matrix, nystrom_matrix_right, top_lambdas, DEFAULT_GRID, GRID_SHIFT_TOL};
pub use ode::{OdeOptions, StepFailure};
pub use product::{eigenvalue_product, eigenvalue_product_tol, ProductEstimate, DEFAULT_PRODUCT_TOL, THETA_MATCH_TOL};
pub use shooting::{characteristic_function, eigenvalues_shooting, fundamental_system, CharValue, FundamentalSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Step(#[from] StepFailure),
    #[error("root scan up to ζ = {zeta_max} found {found} roots, Weyl law predicts {expected:.1}")]
    MissedRoot { found: usize, expected: f64, zeta_max: f64 },
    #[error("eigenvalue {k} moves by {shift:e} (relative) between grid sizes; refine the grid")]
    GridTooCoarse { k: usize, shift: f64 },
    #[error("grid of {grid} nodes is too small for {count} eigenvalues (need at least 8 per eigenvalue)")]
    GridTooSmall { grid: usize, count: usize },
    #[error(
        "normalization integrals differ (ϑ1 = {theta1}, ϑ2 = {theta2}); \
         the eigenvalue product diverges"
    )]
    NormalizationMismatch { theta1: f64, theta2: f64 },
    #[error("spectra have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("product extrapolants disagree by {spread:e} (tolerance {tol:e})")]
    NonConvergence { spread: f64, tol: f64 },
    #[error("eigenvalue count must be at least 1")]
    ZeroCount,
    #[error("boundary system has {0} coefficient patterns; too many for the characteristic determinant")]
    TooManyTerms(usize),
    #[error("non-positive operator eigenvalue {0:e}")]
    NotPositive(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shooting,
    Nystrom,
    Analytic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Shooting => "shooting",
            Method::Nystrom => "nystrom",
            Method::Analytic => "analytic",
        }
    }
}

/// Ascending eigenvalues `μ_k = 1/λ_k` with relative error estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub mu: Vec<f64>,
    pub err: Vec<f64>,
    pub method: Method,
    pub theta_norm: f64,
}

impl SpectrumResult {
    /// Exact eigenvalues from a closed form.
    pub fn analytic(mu: Vec<f64>, theta_norm: f64) -> Self {
        let err = vec![0.0; mu.len()];
        SpectrumResult { mu, err, method: Method::Analytic, theta_norm }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Karhunen–Loève eigenvalues `λ_k = scale/μ_k`, descending.
    pub fn lambdas(&self, scale: f64) -> Vec<f64> {
        self.mu.iter().map(|m| scale / m).collect()
    }

    pub fn truncated(&self, k: usize) -> SpectrumResult {
        let k = k.min(self.len());
        SpectrumResult {
            mu: self.mu[..k].to_vec(),
            err: self.err[..k].to_vec(),
            method: self.method,
            theta_norm: self.theta_norm,
        }
    }
}

/// Leading-order model `(πk/ϑ)^{2n}`.
pub fn weyl_tail(n: usize, theta: f64, k: f64) -> f64 {
    (std::f64::consts::PI * k / theta).powi(2 * n as i32)
}

/// Number of eigenvalues below `ζ^{2n}` predicted by [`weyl_tail`].
pub fn weyl_count(theta: f64, zeta: f64) -> f64 {
    zeta * theta / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weyl_values() {
        assert!((weyl_tail(1, 1.0, 10.0) - 986.960440108936).abs() < 1e-9);
        assert!((weyl_tail(2, 1.0, 5.0) - (5.0 * PI).powi(4)).abs() < 1e-9);
        // Wiener μ_k = ((k - 1/2)π)² over the model tends to 1.
        let ratio = |k: f64| ((k - 0.5) * PI).powi(2) / weyl_tail(1, 1.0, k);
        assert!((ratio(10.0) - 0.9025).abs() < 1e-12);
        assert!(1.0 - ratio(1000.0) < 1.0 - ratio(100.0));
        assert!(1.0 - ratio(1000.0) < 1e-3);
    }
}
