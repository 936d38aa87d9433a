//! `∏ μ_k^{(1)}/μ_k^{(2)}` from two truncated spectra.

use serde::Serialize;

use super::{SpectrumError, SpectrumResult};

/// Largest admissible difference of the two normalization integrals.
pub const THETA_MATCH_TOL: f64 = 1e-6;

/// Default bound on the relative spread of the two extrapolants.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-2;

/// Fewest eigenvalues for which the tail is extrapolated.
const MIN_TERMS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductEstimate {
    pub value: f64,
    pub err: f64,
    /// Product of all supplied ratios, without tail correction.
    pub partial: f64,
    /// Limit of `log P_K` from Δ² on `K/4, K/2, K`, when defined.
    pub aitken: Option<f64>,
    /// Limit of `log P_K` from the fit `S + a/K + b/K²`.
    pub fit: Option<f64>,
    pub terms: usize,
}

/// Δ² limit of three values whose errors shrink geometrically.
fn aitken(s0: f64, s1: f64, s2: f64) -> Option<f64> {
    let d1 = s1 - s0;
    let d2 = s2 - s1;
    let denom = d2 - d1;
    if d2 == 0.0 {
        return Some(s2);
    }
    if denom == 0.0 || (denom.abs() < 1e-12 * d2.abs()) {
        return None;
    }
    let limit = s2 - d2 * d2 / denom;
    limit.is_finite().then_some(limit)
}

/// Least-squares `S + a/k + b/k²` through `(k, y_k)`, returning `S`.
fn tail_fit(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(k, y) in points {
        let row = [1.0, 1.0 / k, 1.0 / (k * k)];
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&ata);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut num = ata;
    for i in 0..3 {
        num[i][0] = atb[i];
    }
    let s = det3(&num) / d;
    s.is_finite().then_some(s)
}

/// Extrapolated infinite product with the default spread tolerance.
pub fn eigenvalue_product(s1: &SpectrumResult, s2: &SpectrumResult) -> Result<ProductEstimate, SpectrumError> {
    eigenvalue_product_tol(s1, s2, DEFAULT_PRODUCT_TOL)
}

/// Extrapolated infinite product. The limit of the log partial products is
/// taken from a least-squares fit in `1/K` over the last third and checked
/// against Δ² on the geometric indices `K/4, K/2, K`; `err` is their spread
/// plus the propagated eigenvalue errors.
pub fn eigenvalue_product_tol(
    s1: &SpectrumResult,
    s2: &SpectrumResult,
    tol: f64,
) -> Result<ProductEstimate, SpectrumError> {
    if (s1.theta_norm - s2.theta_norm).abs() > THETA_MATCH_TOL {
        return Err(SpectrumError::NormalizationMismatch { theta1: s1.theta_norm, theta2: s2.theta_norm });
    }
    if s1.len() != s2.len() {
        return Err(SpectrumError::LengthMismatch(s1.len(), s2.len()));
    }
    let terms = s1.len();
    if terms == 0 {
        return Err(SpectrumError::ZeroCount);
    }
    let mut logs = Vec::with_capacity(terms);
    let mut acc = 0.0;
    for (a, b) in s1.mu.iter().zip(&s2.mu) {
        if !(*a > 0.0) {
            return Err(SpectrumError::NotPositive(*a));
        }
        if !(*b > 0.0) {
            return Err(SpectrumError::NotPositive(*b));
        }
        acc += (a / b).ln();
        logs.push(acc);
    }
    let data_err: f64 = s1.err.iter().chain(&s2.err).sum();
    let partial = acc;
    if logs.iter().all(|&l| l == 0.0) {
        return Ok(ProductEstimate {
            value: 1.0,
            err: data_err,
            partial: 1.0,
            aitken: Some(0.0),
            fit: Some(0.0),
            terms,
        });
    }
    if terms < MIN_TERMS {
        let spread = (logs[terms - 1] - logs[terms / 2]).abs();
        return Ok(ProductEstimate {
            value: partial.exp(),
            err: partial.exp() * (spread + data_err),
            partial: partial.exp(),
            aitken: None,
            fit: None,
            terms,
        });
    }
    let at = |k: usize| logs[k - 1];
    let q = terms / 4;
    let aitken_limit = aitken(at(q), at(2 * q), at(4 * q));
    let start = terms - terms / 3;
    let points: Vec<(f64, f64)> = (start..=terms).map(|k| (k as f64, at(k))).collect();
    let fit_limit = tail_fit(&points);
    let (log_value, spread) = match (aitken_limit, fit_limit) {
        (Some(a), Some(f)) => (f, (a - f).abs()),
        (None, Some(f)) => (f, (f - partial).abs()),
        (Some(a), None) => (a, (a - partial).abs()),
        (None, None) => (partial, f64::INFINITY),
    };
    let value = log_value.exp();
    let rel_spread = spread.exp_m1().abs();
    if !(rel_spread <= tol) {
        return Err(SpectrumError::NonConvergence { spread: rel_spread, tol });
    }
    Ok(ProductEstimate {
        value,
        err: value * (rel_spread + data_err),
        partial: partial.exp(),
        aitken: aitken_limit,
        fit: fit_limit,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spectrum(mu: Vec<f64>, theta: f64) -> SpectrumResult {
        SpectrumResult::analytic(mu, theta)
    }

    #[test]
    fn identical_spectra_give_one() {
        let s = spectrum((1..=40).map(|k| (k as f64 * PI).powi(2)).collect(), 1.0);
        let p = eigenvalue_product(&s, &s).unwrap();
        assert_eq!(p.value, 1.0);
    }

    #[test]
    fn known_infinite_product() {
        // ∏ (1 − 1/(4k²)) = 2/π.
        let k_max = 200;
        let s1 = spectrum((1..=k_max).map(|k| (k * k) as f64 - 0.25).collect(), 1.0);
        let s2 = spectrum((1..=k_max).map(|k| (k * k) as f64).collect(), 1.0);
        let p = eigenvalue_product(&s1, &s2).unwrap();
        assert!((p.value - 2.0 / PI).abs() < 1e-6, "{}", p.value);
        assert!(p.err < 1e-4);
        assert!((p.partial - 2.0 / PI).abs() > 1e-4);
    }

    #[test]
    fn mismatched_inputs() {
        let a = spectrum(vec![1.0, 2.0], 1.0);
        let b = spectrum(vec![1.0, 2.0], 1.1);
        assert!(matches!(eigenvalue_product(&a, &b), Err(SpectrumError::NormalizationMismatch { .. })));
        let c = spectrum(vec![1.0], 1.0);
        assert!(matches!(eigenvalue_product(&a, &c), Err(SpectrumError::LengthMismatch(2, 1))));
    }

    #[test]
    fn divergent_tail_is_reported() {
        // Ratios tend to 2: log P_K grows linearly and does not converge.
        let s1 = spectrum((1..=60).map(|k| 2.0 * (k * k) as f64).collect(), 1.0);
        let s2 = spectrum((1..=60).map(|k| (k * k) as f64).collect(), 1.0);
        assert!(matches!(eigenvalue_product(&s1, &s2), Err(SpectrumError::NonConvergence { .. })));
    }

    #[test]
    fn fit_recovers_polynomial_tail() {
        let pts: Vec<(f64, f64)> = (10..30).map(|k| (k as f64, 3.0 + 2.0 / k as f64 - 5.0 / (k * k) as f64)).collect();
        assert!((tail_fit(&pts).unwrap() - 3.0).abs() < 1e-10);
        assert!((aitken(1.0 + 0.5, 1.0 + 0.25, 1.0 + 0.125).unwrap() - 1.0).abs() < 1e-15);
    }
}
