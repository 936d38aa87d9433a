//! Probability ratios between two weights on a decreasing ε-grid.

use serde::Serialize;

use super::{smallball_probability_exact, SmallBallError, TailModel};
use crate::model::{BVProblem, Weight};
use crate::spectrum::{eigenvalues_shooting, SpectrumResult};
use crate::theta::{ratio_limit, Route};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub p1: f64,
    pub p2: f64,
    pub ratio: f64,
    /// Relative error of `ratio` from the two inversions.
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `lim P(‖X‖_{ψ1} ≤ ε)/P(‖X‖_{ψ2} ≤ ε)`.
    pub limit: f64,
    pub route: Route,
}

/// Ratios from two precomputed spectra (`λ = scale/μ`), each extended by its
/// Weyl tail.
pub fn convergence_from_spectra(
    s1: &SpectrumResult,
    s2: &SpectrumResult,
    half_order: usize,
    scale: f64,
    eps: &[f64],
) -> Result<Vec<ConvergenceRow>, SmallBallError> {
    let l1 = s1.lambdas(scale);
    let l2 = s2.lambdas(scale);
    let t1 = TailModel::for_spectrum(s1, half_order, scale);
    let t2 = TailModel::for_spectrum(s2, half_order, scale);
    eps.iter()
        .map(|&e| {
            let p1 = smallball_probability_exact(&l1, t1.as_ref(), e)?;
            let p2 = smallball_probability_exact(&l2, t2.as_ref(), e)?;
            let ratio = (p1.log_p - p2.log_p).exp();
            let err = p1.err / p1.p.max(f64::MIN_POSITIVE) + p2.err / p2.p.max(f64::MIN_POSITIVE);
            Ok(ConvergenceRow { eps: e, p1: p1.p, p2: p2.p, ratio, err })
        })
        .collect()
}

/// Shooting spectra of `count` eigenvalues for both weights, exact
/// probabilities on `eps`, and the θ-route limit.
pub fn comparison_convergence(
    problem: &BVProblem,
    scale: f64,
    psi1: &Weight,
    psi2: &Weight,
    eps: &[f64],
    count: usize,
) -> Result<ConvergenceTable, SmallBallError> {
    let limit = ratio_limit(problem, psi1, psi2)?;
    let s1 = eigenvalues_shooting(&problem.with_weight(psi1.clone()), count)?;
    let s2 = if psi1.expr().to_string() == psi2.expr().to_string() { s1.clone() } else { eigenvalues_shooting(&problem.with_weight(psi2.clone()), count)? };
    let rows = convergence_from_spectra(&s1, &s2, problem.n(), scale, eps)?;
    Ok(ConvergenceTable { rows, limit: limit.ratio, route: limit.route })
}
