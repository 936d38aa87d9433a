//! θ_{±1} perturbation determinants and the limit of small-ball probability
//! ratios between two weights.
//!
//! For a self-adjoint operator of order `2n` and weights `ψ1`, `ψ2` with equal
//! `ϑ = ∫ψ^{1/(2n)}`, the eigenvalue products satisfy
//! `∏ μ_k(ψ1)/μ_k(ψ2) = |θ_{-1}(ψ2)/θ_{-1}(ψ1)|` and the probability ratio
//! `P(‖X‖_{ψ1} ≤ ε)/P(‖X‖_{ψ2} ≤ ε)` tends to the square root of that.
//! The determinant only sees the leading boundary data `(k_ν, α_ν, γ_ν)` and the
//! endpoint values `ψ(0)`, `ψ(1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{det_complex, vandermonde};
use crate::model::{normalization_integral, BCClass, BVProblem, BoundaryCondition, Weight, MAX_HALF_ORDER};

/// Tolerance on `|ϑ(ψ1) − ϑ(ψ2)|`.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Relative zero threshold for θ determinants.
pub const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error(
        "normalization integrals differ (ϑ1 = {theta1}, ϑ2 = {theta2}); \
         the small-ball probabilities then have different logarithmic asymptotics and no finite ratio exists"
    )]
    NormalizationMismatch { theta1: f64, theta2: f64 },
    #[error("θ determinant vanishes (|θ| = {value:e}, threshold {threshold:e})")]
    DegenerateTheta { value: f64, threshold: f64 },
    #[error("half-order {0} outside 1..={MAX_HALF_ORDER}")]
    InvalidHalfOrder(usize),
    #[error("expected {expected} boundary rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("endpoint values must be positive, got ({0}, {1})")]
    NonPositiveEndpoint(f64, f64),
}

/// Leading data of one boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingRow {
    pub k: usize,
    pub alpha: f64,
    pub gamma: f64,
}

impl From<&BoundaryCondition> for LeadingRow {
    fn from(bc: &BoundaryCondition) -> Self {
        LeadingRow { k: bc.k, alpha: bc.alpha, gamma: bc.gamma }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaInput {
    pub n: usize,
    pub rows: Vec<LeadingRow>,
    pub psi0: f64,
    pub psi1: f64,
}

impl ThetaInput {
    pub fn new(n: usize, rows: Vec<LeadingRow>, psi0: f64, psi1: f64) -> Result<Self, ThetaError> {
        if n == 0 || n > MAX_HALF_ORDER {
            return Err(ThetaError::InvalidHalfOrder(n));
        }
        if rows.len() != 2 * n {
            return Err(ThetaError::RowCount { expected: 2 * n, got: rows.len() });
        }
        if !(psi0 > 0.0 && psi1 > 0.0) {
            return Err(ThetaError::NonPositiveEndpoint(psi0, psi1));
        }
        Ok(ThetaInput { n, rows, psi0, psi1 })
    }

    pub fn from_problem(problem: &BVProblem, psi0: f64, psi1: f64) -> Result<Self, ThetaError> {
        let rows = problem.bcs.iter().map(LeadingRow::from).collect();
        ThetaInput::new(problem.n(), rows, psi0, psi1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    DirectDeterminant,
    SeparatedClosedForm,
    NonseparatedClosedForm,
    PeriodicClosedForm,
}

/// Limit of `P(‖X‖_{ψ1} ≤ ε)/P(‖X‖_{ψ2} ≤ ε)` (`ratio`) and of the eigenvalue
/// product `∏ μ_k(ψ1)/μ_k(ψ2)` (`product = ratio²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub ratio: f64,
    pub product: f64,
    pub route: Route,
}

impl ComparisonResult {
    fn from_ratio(ratio: f64, route: Route) -> Self {
        ComparisonResult { ratio, product: ratio * ratio, route }
    }
}

/// `ω_k = exp(ikπ/n)`.
pub fn omega(n: usize, k: usize) -> Complex64 {
    let k = k % (2 * n);
    // Exact values on the axes keep Vandermonde products free of rounding
    // noise where the closed forms expect exact zeros.
    match (4 * k) % (2 * n) == 0 {
        true => match (2 * k / n) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        },
        false => Complex64::from_polar(1.0, k as f64 * PI / n as f64),
    }
}

/// `ω_j^k = ω_1^{jk}`.
fn omega_pow(n: usize, j: usize, k: usize) -> Complex64 {
    omega(n, (j * k) % (2 * n))
}

fn endpoint_exponent(n: usize, k: usize) -> f64 {
    k as f64 / (2 * n) as f64 - (2 * n - 1) as f64 / (4 * n) as f64
}

/// Row-major `2n × 2n` matrix of θ_{sign} and its largest entry modulus.
pub fn theta_matrix(inp: &ThetaInput, sign: i32) -> (Vec<Complex64>, f64) {
    let n = inp.n;
    let size = 2 * n;
    let mut m = Vec::with_capacity(size * size);
    for row in &inp.rows {
        let e = endpoint_exponent(n, row.k);
        let a = row.alpha * inp.psi0.powf(e);
        let g = row.gamma * inp.psi1.powf(e);
        for j in 0..size {
            let coeff = match (sign, j) {
                (1, 0) => g,
                (1, j) if j <= n => a,
                (1, _) => g,
                (_, j) if j < n => a,
                _ => g,
            };
            m.push(omega_pow(n, j, row.k) * coeff);
        }
    }
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (m, max)
}

/// θ_1 (`sign = 1`) or θ_{-1} (`sign = -1`).
pub fn theta_det(inp: &ThetaInput, sign: i32) -> Complex64 {
    let (m, _) = theta_matrix(inp, sign);
    det_complex(m, 2 * inp.n)
}

fn checked_theta(inp: &ThetaInput) -> Result<f64, ThetaError> {
    let (m, max) = theta_matrix(inp, -1);
    let value = det_complex(m, 2 * inp.n).norm();
    let threshold = DEGENERATE_REL * max.powi(2 * inp.n as i32);
    if !(value >= threshold) || value == 0.0 {
        return Err(ThetaError::DegenerateTheta { value, threshold });
    }
    Ok(value)
}

/// Direct-determinant ratio from leading boundary data and endpoint values.
pub fn ratio_from_endpoints(
    n: usize,
    rows: &[LeadingRow],
    psi1: (f64, f64),
    psi2: (f64, f64),
) -> Result<ComparisonResult, ThetaError> {
    let t1 = checked_theta(&ThetaInput::new(n, rows.to_vec(), psi1.0, psi1.1)?)?;
    let t2 = checked_theta(&ThetaInput::new(n, rows.to_vec(), psi2.0, psi2.1)?)?;
    Ok(ComparisonResult::from_ratio((t2 / t1).sqrt(), Route::DirectDeterminant))
}

pub fn check_normalization(n: usize, psi1: &Weight, psi2: &Weight) -> Result<(f64, f64), ThetaError> {
    let theta1 = normalization_integral(psi1, n).value;
    let theta2 = normalization_integral(psi2, n).value;
    if (theta1 - theta2).abs() > NORMALIZATION_TOL {
        return Err(ThetaError::NormalizationMismatch { theta1, theta2 });
    }
    Ok((theta1, theta2))
}

/// `|θ_{-1}(ψ2)/θ_{-1}(ψ1)|^{1/2}` for the boundary conditions of `problem`
/// (its own weight is ignored).
pub fn ratio_limit(problem: &BVProblem, psi1: &Weight, psi2: &Weight) -> Result<ComparisonResult, ThetaError> {
    let n = problem.n();
    check_normalization(n, psi1, psi2)?;
    let rows: Vec<LeadingRow> = problem.bcs.iter().map(LeadingRow::from).collect();
    ratio_from_endpoints(n, &rows, psi1.endpoints(), psi2.endpoints())
}

fn separated_exponent(n: usize, kappa: usize) -> f64 {
    -(n as f64) / 4.0 + 0.125 + kappa as f64 / (4 * n) as f64
}

/// Closed form for boundary conditions separated in their main terms.
pub fn separated_ratio(n: usize, kappa0: usize, kappa1: usize, psi1: (f64, f64), psi2: (f64, f64)) -> ComparisonResult {
    let ratio = (psi2.0 / psi1.0).powf(separated_exponent(n, kappa0))
        * (psi2.1 / psi1.1).powf(separated_exponent(n, kappa1));
    ComparisonResult::from_ratio(ratio, Route::SeparatedClosedForm)
}

/// Separated orders and the non-separated pair `(ℓ, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairData {
    pub ell: usize,
    pub a: f64,
    pub b: f64,
    pub orders0: Vec<usize>,
    pub orders1: Vec<usize>,
}

impl PairData {
    /// The Vandermonde products `(𝓜1, 𝓜2)`.
    pub fn vandermonde_products(&self, n: usize) -> (Complex64, Complex64) {
        let w = |k: usize| omega(n, k);
        let partner = 2 * n - self.ell - 1;
        let at0 = |last: usize| {
            let mut xs: Vec<Complex64> = self.orders0.iter().map(|&k| w(k)).collect();
            xs.push(w(last));
            vandermonde(&xs)
        };
        let at1 = |first: usize| {
            let mut xs = vec![w(first)];
            xs.extend(self.orders1.iter().map(|&k| w(k)));
            vandermonde(&xs)
        };
        (at0(self.ell) * at1(partner), at0(partner) * at1(self.ell))
    }

    fn bracket(&self, n: usize, m1: Complex64, m2: Complex64, psi: (f64, f64)) -> Result<f64, ThetaError> {
        let e = (2 * n) as f64 - 2.0 * self.ell as f64 - 1.0;
        let r = (psi.1 / psi.0).powf(e / (4 * n) as f64);
        let t1 = m1 * (self.a * self.a * r);
        let t2 = m2 * (self.b * self.b / r);
        let value = (t1 + t2).norm();
        let threshold = DEGENERATE_REL * (t1.norm() + t2.norm());
        if !(value > threshold) {
            return Err(ThetaError::DegenerateTheta { value, threshold });
        }
        Ok(value)
    }
}

/// Closed form for one non-separated pair
/// `a v^{(ℓ)}(0) + b v^{(ℓ)}(1)`, `b v^{(2n-ℓ-1)}(0) + a v^{(2n-ℓ-1)}(1)`
/// with the remaining conditions separated.
pub fn nonseparated_ratio(
    n: usize,
    pair: &PairData,
    psi1: (f64, f64),
    psi2: (f64, f64),
) -> Result<ComparisonResult, ThetaError> {
    let kappa0: usize = pair.orders0.iter().sum();
    let kappa1: usize = pair.orders1.iter().sum();
    let base = ((n - 1) * (2 * n - 1)) as f64 / (8 * n) as f64;
    let e0 = kappa0 as f64 / (4 * n) as f64 - base;
    let e1 = kappa1 as f64 / (4 * n) as f64 - base;
    let (m1, m2) = pair.vandermonde_products(n);
    let b1 = pair.bracket(n, m1, m2, psi1)?;
    let b2 = pair.bracket(n, m1, m2, psi2)?;
    let ratio = (psi2.0 / psi1.0).powf(e0) * (psi2.1 / psi1.1).powf(e1) * (b2 / b1).sqrt();
    Ok(ComparisonResult::from_ratio(ratio, Route::NonseparatedClosedForm))
}

fn periodic_nodes(n: usize, psi: (f64, f64)) -> Vec<Complex64> {
    let r0 = psi.0.powf(1.0 / (2 * n) as f64);
    let r1 = psi.1.powf(1.0 / (2 * n) as f64);
    (0..2 * n).map(|j| omega(n, j) * if j < n { r0 } else { r1 }).collect()
}

/// Closed form for conditions periodic in their main terms.
pub fn periodic_ratio(n: usize, psi1: (f64, f64), psi2: (f64, f64)) -> ComparisonResult {
    let pre = (psi1.0 * psi1.1 / (psi2.0 * psi2.1)).powf((2 * n - 1) as f64 / 8.0);
    let v1 = vandermonde(&periodic_nodes(n, psi1)).norm();
    let v2 = vandermonde(&periodic_nodes(n, psi2)).norm();
    ComparisonResult::from_ratio(pre * (v2 / v1).sqrt(), Route::PeriodicClosedForm)
}

/// Closed-form route for a classified system; `None` for `General`.
pub fn closed_form_ratio(
    n: usize,
    class: &BCClass,
    psi1: (f64, f64),
    psi2: (f64, f64),
) -> Option<Result<ComparisonResult, ThetaError>> {
    match class {
        BCClass::Separated { kappa0, kappa1, .. } => Some(Ok(separated_ratio(n, *kappa0, *kappa1, psi1, psi2))),
        BCClass::OneNonSeparatedPair { ell, a, b, orders0, orders1, .. } => {
            let pair = PairData { ell: *ell, a: *a, b: *b, orders0: orders0.clone(), orders1: orders1.clone() };
            Some(nonseparated_ratio(n, &pair, psi1, psi2))
        }
        BCClass::Periodic => Some(Ok(periodic_ratio(n, psi1, psi2))),
        BCClass::General => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rows(spec: &[(usize, f64, f64)]) -> Vec<LeadingRow> {
        spec.iter().map(|&(k, alpha, gamma)| LeadingRow { k, alpha, gamma }).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega(1, 1), Complex64::new(-1.0, 0.0));
        assert_eq!(omega(2, 1), Complex64::new(0.0, 1.0));
        assert_eq!(omega(2, 3), Complex64::new(0.0, -1.0));
        for n in 1..=5 {
            for k in 0..2 * n {
                let z = omega(n, k);
                assert!((z.norm() - 1.0).abs() < 1e-15);
                assert!((z - Complex64::from_polar(1.0, k as f64 * PI / n as f64)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn wiener_theta_unit_weight() {
        let wiener = rows(&[(0, 1.0, 0.0), (1, 0.0, 1.0)]);
        let inp = ThetaInput::new(1, wiener.clone(), 1.0, 1.0).unwrap();
        let t = theta_det(&inp, -1);
        assert!((t - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        // |θ_1| = |θ_{-1}|.
        assert!((theta_det(&inp, 1).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wiener_theta_power_weight_matches_separated_form() {
        let wiener = rows(&[(0, 1.0, 0.0), (1, 0.0, 1.0)]);
        let inp = ThetaInput::new(1, wiener.clone(), 16.0, 1.0 / 16.0).unwrap();
        // α̃_1 = 16^{-1/4}, γ̃_2 = (1/16)^{1/4}.
        assert!((theta_det(&inp, -1).norm() - 0.25).abs() < 1e-15);
        let direct = ratio_from_endpoints(1, &wiener, (16.0, 1.0 / 16.0), (1.0, 1.0)).unwrap();
        let closed = separated_ratio(1, 0, 1, (16.0, 1.0 / 16.0), (1.0, 1.0));
        assert!((direct.ratio - 2.0).abs() < 1e-14);
        assert!((direct.product - 4.0).abs() < 1e-13);
        assert!((closed.ratio - 2.0).abs() < 1e-14);
        assert_eq!(direct.route, Route::DirectDeterminant);
        assert_eq!(closed.route, Route::SeparatedClosedForm);
    }

    #[test]
    fn theta_relation_holds() {
        // |θ_1| = |θ_{-1}| for several systems.
        let systems = [
            (1, rows(&[(0, 1.0, 0.0), (0, 0.0, 1.0)])),
            (2, rows(&[(0, 1.0, 0.0), (1, 1.0, 0.0), (2, 0.0, 1.0), (3, 0.0, 1.0)])),
            (2, rows(&[(0, 1.0, 0.0), (1, 2.0, 0.5), (2, 0.5, 2.0), (3, 0.0, 1.0)])),
            (2, rows(&[(0, 1.0, -1.0), (1, 1.0, -1.0), (2, 1.0, -1.0), (3, 1.0, -1.0)])),
        ];
        for (n, r) in systems {
            let inp = ThetaInput::new(n, r, 2.7, 0.4).unwrap();
            let (a, b) = (theta_det(&inp, 1).norm(), theta_det(&inp, -1).norm());
            assert!(rel(a, b) < 1e-12, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn identical_weights_give_unit_ratio() {
        let p = catalog::wiener().unwrap();
        let w = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let r = ratio_limit(&p, &w, &w).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-15);
        assert_eq!(r.product, r.ratio * r.ratio);
    }

    #[test]
    fn wiener_ratio_limit_is_two() {
        let p = catalog::wiener().unwrap();
        let w1 = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let r = ratio_limit(&p, &w1, &Weight::unit()).unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-12);
        assert!((r.product - 4.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_mismatch() {
        let p = catalog::wiener().unwrap();
        let err = ratio_limit(&p, &Weight::unit(), &Weight::constant(16.0).unwrap()).unwrap_err();
        match err {
            ThetaError::NormalizationMismatch { theta1, theta2 } => {
                assert!((theta1 - 1.0).abs() < 1e-12);
                assert!((theta2 - 4.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_theta_detected() {
        // Two identical conditions at zero.
        let r = rows(&[(0, 1.0, 0.0), (0, 1.0, 0.0)]);
        let err = ratio_from_endpoints(1, &r, (1.0, 1.0), (2.0, 2.0)).unwrap_err();
        assert!(matches!(err, ThetaError::DegenerateTheta { .. }));
    }

    #[test]
    fn symmetric_separated_collapse() {
        // ψ1(0) = ψ1(1) = p, ψ2(0) = ψ2(1) = q, κ0 = κ1 = κ.
        for n in 1..=3usize {
            for kappa in 0..2 * n {
                let (p, q) = (1.7, 0.3);
                let r = separated_ratio(n, kappa, kappa, (p, p), (q, q));
                let e = 2.0 * (-(n as f64) / 4.0 + 0.125) + (2 * kappa) as f64 / (4 * n) as f64;
                assert!(rel(r.ratio, (q / p).powf(e)) < 1e-14);
            }
        }
        // Against the determinant for a system with κ0 = κ1 = 1, n = 2.
        let r = rows(&[(0, 1.0, 0.0), (1, 1.0, 0.0), (0, 0.0, 1.0), (1, 0.0, 1.0)]);
        let direct = ratio_from_endpoints(2, &r, (1.7, 1.7), (0.3, 0.3)).unwrap();
        let closed = separated_ratio(2, 1, 1, (1.7, 1.7), (0.3, 0.3));
        assert!(rel(direct.ratio, closed.ratio) < 1e-12);
    }

    #[test]
    fn pair_bracket_for_n_one() {
        // n = 1, ℓ = 0: 𝓜1 = 𝓜2 = 1 and the bracket is a²[(ψ1/ψ0)^{1/4} + (ψ0/ψ1)^{1/4}] when a = b.
        let pair = PairData { ell: 0, a: 1.5, b: 1.5, orders0: vec![], orders1: vec![] };
        let (m1, m2) = pair.vandermonde_products(1);
        assert_eq!(m1, Complex64::new(1.0, 0.0));
        assert_eq!(m2, Complex64::new(1.0, 0.0));
        let psi = (3.0, 0.5);
        let b = pair.bracket(1, m1, m2, psi).unwrap();
        let expected = 2.25 * ((psi.1 / psi.0).powf(0.25) + (psi.0 / psi.1).powf(0.25));
        assert!(rel(b, expected) < 1e-14);
        let closed = nonseparated_ratio(1, &pair, psi, (1.2, 1.9)).unwrap();
        let direct = ratio_from_endpoints(1, &rows(&[(0, 1.5, 1.5), (1, 1.5, 1.5)]), psi, (1.2, 1.9)).unwrap();
        assert!(rel(closed.ratio, direct.ratio) < 1e-12);
    }

    #[test]
    fn pair_n_two_matches_determinant() {
        // k_1 = 0 at zero, k'_1 = 3 at one, pair orders ℓ = 1 and 2.
        let pair = PairData { ell: 1, a: 0.7, b: -1.3, orders0: vec![0], orders1: vec![3] };
        let r = rows(&[(0, 1.0, 0.0), (1, 0.7, -1.3), (2, -1.3, 0.7), (3, 0.0, 1.0)]);
        for (psi1, psi2) in [((2.0, 0.5), (1.0, 1.0)), ((0.3, 4.1), (2.2, 0.9))] {
            let closed = nonseparated_ratio(2, &pair, psi1, psi2).unwrap();
            let direct = ratio_from_endpoints(2, &r, psi1, psi2).unwrap();
            assert!(rel(closed.ratio, direct.ratio) < 1e-10, "{closed:?} vs {direct:?}");
        }
    }

    #[test]
    fn periodic_matches_determinant() {
        for n in 1..=3usize {
            let r: Vec<LeadingRow> = (0..2 * n).map(|k| LeadingRow { k, alpha: 1.0, gamma: -1.0 }).collect();
            for (psi1, psi2) in [((16.0, 1.0 / 16.0), (1.0, 1.0)), ((0.2, 3.0), (5.0, 0.7))] {
                let closed = periodic_ratio(n, psi1, psi2);
                let direct = ratio_from_endpoints(n, &r, psi1, psi2).unwrap();
                assert!(rel(closed.ratio, direct.ratio) < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn periodic_homogeneity() {
        // ψ1 ≡ p, ψ2 ≡ q at the endpoints: 𝒱 is homogeneous of degree n(2n−1) in
        // the node radius (p or q)^{1/(2n)}, so the ratio is (q/p)^{(2n−1)/4 − (2n−1)/4} · …
        for n in 1..=3usize {
            let (p, q) = (2.5, 0.4);
            let r = periodic_ratio(n, (p, p), (q, q));
            let degree = (n * (2 * n - 1)) as f64;
            let vand = (q / p).powf(degree / (2 * n) as f64 / 2.0);
            let pre = (p * p / (q * q)).powf((2 * n - 1) as f64 / 8.0);
            assert!(rel(r.ratio, pre * vand) < 1e-13);
        }
    }

    #[test]
    fn periodic_n_one_against_direct() {
        let p = catalog::periodic_laplacian(1).unwrap();
        let rows: Vec<LeadingRow> = p.bcs.iter().map(LeadingRow::from).collect();
        let closed = periodic_ratio(1, (16.0, 1.0 / 16.0), (1.0, 1.0));
        let direct = ratio_from_endpoints(1, &rows, (16.0, 1.0 / 16.0), (1.0, 1.0)).unwrap();
        assert!(rel(closed.ratio, direct.ratio) < 1e-10);
    }

    #[test]
    fn ratios_depend_only_on_endpoints() {
        let p = catalog::wiener().unwrap();
        // Same endpoints and ϑ, different interiors.
        let w1 = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let closed = closed_form_ratio(1, &p.classify(), w1.endpoints(), (1.0, 1.0)).unwrap().unwrap();
        let again = closed_form_ratio(1, &p.classify(), w1.endpoints(), (1.0, 1.0)).unwrap().unwrap();
        assert_eq!(closed.ratio.to_bits(), again.ratio.to_bits());
    }
}
