//! Sharp small-ball asymptotics and two probability oracles for
//! `‖X‖²_ψ = Σ λ_j ξ_j²`: Laplace inversion of the exact distribution and
//! Monte Carlo.

pub mod asymptotic;
pub mod convergence;
pub mod exact;
pub mod montecarlo;

use serde::Serialize;
use thiserror::Error;

use crate::kernels::KernelError;
use crate::spectrum::SpectrumError;
use crate::theta::ThetaError;

pub use asymptotic::{
    c_n, constants, epsilon_transforms, evaluate_asymptotic, proposition_asymptotic, AsymptoticForm, AsymptoticValue,
    EpsilonTransforms, Transform, K_of, K_tilde_of,
};
pub use convergence::{comparison_convergence, convergence_from_spectra, ConvergenceRow, ConvergenceTable};
pub use exact::{smallball_probability_exact, TailModel};
pub use montecarlo::{monte_carlo_probability, McOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmallBallError {
    #[error("weight is not normalized for order {n}: ∫ψ^(1/2n) = {theta}; normalize it and rescale ε")]
    NotNormalized { theta: f64, n: usize },
    #[error("{0}")]
    UnsupportedSpec(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("no saddle point for r² = {x}")]
    TiltNotFound { x: f64 },
    #[error("radius too small for the eigenvalue tail model (tilt {s:e}); use the asymptotic formula")]
    TooDeep { s: f64 },
    #[error("Laplace inversion failed its self-check (relative difference {diff:e})")]
    InversionUnstable { diff: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Saddlepoint,
    Montecarlo,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub p: f64,
    /// `ln p`, finite even when `p` underflows.
    pub log_p: f64,
    pub err: f64,
    pub method: Method,
    pub tilt: Option<f64>,
    pub truncation: Option<f64>,
}
