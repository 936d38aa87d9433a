//! Sharp small-ball asymptotics of the catalog processes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::SmallBallError;
use crate::kernels::{Family, ProcessSpec};
use crate::linalg::vandermonde;
use crate::model::{normalization_integral, Weight};

/// Tolerance on `∫ψ^{1/(2n)} = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// `(z_n, 𝒟_n)` with `z_n = e^{iπ/n}` and `𝒟_n = (2n−1)/(2n sin(π/2n))`.
pub fn constants(n: usize) -> (Complex64, f64) {
    let nf = n as f64;
    let z = if n == 1 { Complex64::new(-1.0, 0.0) } else { Complex64::from_polar(1.0, PI / nf) };
    (z, (2.0 * nf - 1.0) / (2.0 * nf * (PI / (2.0 * nf)).sin()))
}

/// `c_n = 2√π Γ(n)/Γ(n−1/2) = 2·4^{n−1}((n−1)!)²/(2n−2)!`.
pub fn c_n(n: usize) -> f64 {
    let mut c = 2.0;
    for j in 1..n {
        // Ratio of consecutive terms: 4 j² / ((2j−1)(2j)).
        let jf = j as f64;
        c *= 4.0 * jf * jf / ((2.0 * jf - 1.0) * (2.0 * jf));
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonTransforms {
    pub eps_n: f64,
    pub eps_tilde_n: f64,
    pub eps_hat_n: f64,
    pub c_n: f64,
}

pub fn epsilon_transforms(eps: f64, n: usize) -> EpsilonTransforms {
    let nf = n as f64;
    let s = (PI / (2.0 * nf)).sin();
    let p = 1.0 / (2.0 * nf - 1.0);
    let c = c_n(n);
    EpsilonTransforms {
        eps_n: (eps * (2.0 * nf * s).sqrt()).powf(p),
        eps_tilde_n: (eps * (nf * s).sqrt()).powf(p),
        eps_hat_n: (eps * (2.0 * nf / c * s).sqrt()).powf(p),
        c_n: c,
    }
}

/// `𝒦 = Σ (2ν+1) β_ν`, `ν` counted from 1.
#[allow(non_snake_case)]
pub fn K_of(betas: &[u8]) -> usize {
    betas.iter().enumerate().map(|(i, &b)| (2 * (i + 1) + 1) * b as usize).sum()
}

/// `𝒦̃ = Σ (2ν+3) β_ν`.
#[allow(non_snake_case)]
pub fn K_tilde_of(betas: &[u8]) -> usize {
    betas.iter().enumerate().map(|(i, &b)| (2 * (i + 1) + 3) * b as usize).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Eps,
    EpsTilde,
    EpsHat,
}

impl Transform {
    pub fn apply(self, eps: f64, n: usize) -> f64 {
        let t = epsilon_transforms(eps, n);
        match self {
            Transform::Eps => t.eps_n,
            Transform::EpsTilde => t.eps_tilde_n,
            Transform::EpsHat => t.eps_hat_n,
        }
    }
}

/// `P(‖X‖_ψ ≤ ε) ~ endpoint_correction · C · E^γ · exp(−D/(2E²))` with
/// `E = transform(ε)`. `endpoint_correction` is the ψ-dependent factor
/// divided by its value at `ψ ≡ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticForm {
    pub proposition: u8,
    pub prefactor: f64,
    pub gamma: f64,
    pub rate: f64,
    pub transform: Transform,
    pub order: usize,
    pub endpoint_correction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub log_value: f64,
}

impl AsymptoticForm {
    fn new(proposition: u8, order: usize, transform: Transform, gamma: f64, block: f64, endpoint: f64) -> Self {
        let (_, d) = constants(order);
        AsymptoticForm {
            proposition,
            prefactor: block / (PI * d).sqrt(),
            gamma,
            rate: d,
            transform,
            order,
            endpoint_correction: endpoint,
        }
    }
}

pub fn evaluate_asymptotic(a: &AsymptoticForm, eps: f64) -> AsymptoticValue {
    let e = a.transform.apply(eps, a.order);
    let log_value =
        a.endpoint_correction.ln() + a.prefactor.ln() + a.gamma * e.ln() - a.rate / (2.0 * e * e);
    AsymptoticValue { value: log_value.exp(), log_value }
}

fn powers(z: Complex64, exps: &[i64]) -> Vec<Complex64> {
    exps.iter().map(|&k| z.powi(k as i32)).collect()
}

/// Exponents `ν − (2ν + shift) β_ν`.
fn k_exponents(betas: &[u8], shift: i64) -> Vec<i64> {
    betas
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let nu = i as i64 + 1;
            nu - (2 * nu + shift) * b as i64
        })
        .collect()
}

/// `|A (ψ0/ψ1)^q + B (ψ1/ψ0)^q|^{-1/2}` with `A = ∏|1+z^{k}|²`,
/// `B = ∏|1+z^{top−k}|²`.
fn pair_bracket(z: Complex64, ks: &[i64], top: i64, q: f64, psi0: f64, psi1: f64) -> f64 {
    let a: f64 = ks.iter().map(|&k| (1.0 + z.powi(k as i32)).norm_sqr()).product();
    let b: f64 = ks.iter().map(|&k| (1.0 + z.powi((top - k) as i32)).norm_sqr()).product();
    let r = psi0 / psi1;
    (a * r.powf(q) + b * r.powf(-q)).abs().powf(-0.5)
}

fn check_normalized(w: &Weight, n: usize) -> Result<(), SmallBallError> {
    let theta = normalization_integral(w, n).value;
    if (theta - 1.0).abs() > NORMALIZATION_TOL {
        return Err(SmallBallError::NotNormalized { theta, n });
    }
    Ok(())
}

fn unsupported(spec: &ProcessSpec) -> SmallBallError {
    SmallBallError::UnsupportedSpec(format!(
        "no asymptotic formula for {} with {} integrations, {} centerings{}",
        spec.family,
        spec.m(),
        spec.centerings,
        if spec.center_last { " and final centering" } else { "" }
    ))
}

/// The asymptotic formula of the catalog proposition matching `spec`.
pub fn proposition_asymptotic(spec: &ProcessSpec, psi: &Weight) -> Result<AsymptoticForm, SmallBallError> {
    spec.validate()?;
    let m = spec.m();
    let betas = &spec.betas;
    let (p0, p1) = psi.endpoints();
    let plain = spec.centerings == 0 && !spec.center_last;
    let mf = m as f64;
    let form = match &spec.family {
        Family::Wiener if plain => {
            let n = m + 1;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let mut pts = vec![Complex64::new(1.0, 0.0)];
            pts.extend(powers(z, &k_exponents(betas, 1)));
            let big_k = K_of(betas) as f64;
            let block = (2.0 * mf + 2.0).powf(mf / 2.0 + 1.0) / vandermonde(&pts).norm();
            let endpoint = (p1 / p0).powf(-(mf + 1.0) / 8.0 + big_k / (4.0 * (mf + 1.0)));
            AsymptoticForm::new(1, n, Transform::Eps, 1.0, block, endpoint)
        }
        Family::Bridge if plain => {
            let n = m + 1;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let pts = powers(z, &k_exponents(betas, 1));
            let big_k = K_of(betas) as f64;
            let block = (2.0 * mf + 2.0).powf((mf + 1.0) / 2.0) * (2.0 * (PI / (2.0 * mf + 2.0)).sin()).sqrt()
                / vandermonde(&pts).norm();
            let q = 4.0 * (mf + 1.0);
            let endpoint =
                p0.powf((mf + 1.0) / 8.0 - big_k / q) * p1.powf((big_k + 1.0) / q - (mf + 1.0) / 8.0);
            AsymptoticForm::new(2, n, Transform::Eps, 0.0, block, endpoint)
        }
        Family::ConditionalIntegratedWiener(mc) if plain && m == 0 => {
            let mc = *mc;
            let n = mc + 1;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let pts: Vec<Complex64> = (0..=mc).map(|j| z.powi(j as i32)).collect();
            let mcf = mc as f64;
            let mut log_fact = 0.0;
            for j in 0..=mc {
                log_fact += ln_factorial(j) - ln_factorial(mc + 1 + j);
            }
            let block = (2.0 * mcf + 2.0).powf(mcf / 2.0 + 1.0) * (0.5 * log_fact).exp() / vandermonde(&pts).norm();
            let endpoint = (p0 * p1).powf(0.125);
            AsymptoticForm::new(3, n, Transform::Eps, -(mcf * (mcf + 2.0)), block, endpoint)
        }
        Family::OrnsteinUhlenbeck | Family::Slepian if plain => {
            let n = m + 1;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let pts = powers(z, &k_exponents(betas, 1));
            let big_k = K_of(betas) as f64;
            let mut block = (2.0 * mf + 2.0).powf((mf + 1.0) / 2.0)
                * 2.0
                * std::f64::consts::E.sqrt()
                * (PI / (2.0 * mf + 2.0)).sin().sqrt()
                / vandermonde(&pts).norm();
            let q = 4.0 * (mf + 1.0);
            let endpoint =
                p0.powf((mf + 1.0) / 8.0 - (big_k + 1.0) / q) * p1.powf(big_k / q - (mf + 1.0) / 8.0);
            let prop = if spec.family == Family::Slepian {
                block *= (2.0 / std::f64::consts::E).sqrt();
                5
            } else {
                4
            };
            AsymptoticForm::new(prop, n, Transform::EpsTilde, 2.0, block, endpoint)
        }
        Family::Matern(n) if plain && m == 0 => {
            let n = *n;
            check_normalized(psi, n)?;
            let nf = n as f64;
            let (z, _) = constants(n);
            let pts: Vec<Complex64> = (0..n).map(|j| z.powi(j as i32)).collect();
            let log_root = 0.5 * ((nf * nf + nf + 1.0) * 2f64.ln() + (nf + 1.0) * nf.ln() + nf);
            let block = log_root.exp() / vandermonde(&pts).norm();
            let endpoint = (p0 * p1).powf(-nf / 8.0);
            AsymptoticForm::new(6, n, Transform::EpsHat, nf * nf + 1.0, block, endpoint)
        }
        Family::Bogolyubov { omega, .. } if plain => {
            let n = m + 1;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let ks = k_exponents(betas, 1);
            let top = 2 * m as i64 + 1;
            let q = 1.0 / (4.0 * (mf + 1.0));
            let big_k = K_of(betas) as f64;
            let unit = pair_bracket(z, &ks, top, q, 1.0, 1.0);
            let block = 2f64.powf(mf + 2.0) * (mf + 1.0).powf(mf + 1.0) * (omega / 2.0).sinh() * unit
                / vandermonde(&powers(z, &ks)).norm();
            let endpoint = (p0 / p1).powf(mf * (mf + 2.0) / (8.0 * (mf + 1.0)) - big_k / (4.0 * (mf + 1.0)))
                * pair_bracket(z, &ks, top, q, p0, p1)
                / unit;
            AsymptoticForm::new(7, n, Transform::Eps, 1.0, block, endpoint)
        }
        Family::Bridge if spec.centerings == 1 && !spec.center_last => {
            let n = m + 2;
            check_normalized(psi, n)?;
            let (z, _) = constants(n);
            let ks = k_exponents(betas, -1);
            let top = 1;
            let d = mf + 2.0;
            let q = 1.0 / (4.0 * d);
            let kt = K_tilde_of(betas) as f64;
            let unit = pair_bracket(z, &ks, top, q, 1.0, 1.0);
            let block = (2.0 * d).powf(d / 2.0) * (2.0 * (3.0 * PI / (2.0 * d)).sin()).sqrt() * unit
                / vandermonde(&powers(z, &ks)).norm();
            let endpoint = p0.powf((mf * mf - 3.0) / (8.0 * d) - kt / (4.0 * d))
                * p1.powf(kt / (4.0 * d) - (mf * mf + 8.0 * mf + 3.0) / (8.0 * d))
                * pair_bracket(z, &ks, top, q, p0, p1)
                / unit;
            AsymptoticForm::new(8, n, Transform::Eps, -2.0, block, endpoint)
        }
        Family::Bridge if spec.center_last && m == 0 => {
            let mc = spec.centerings;
            let n = mc + 1;
            check_normalized(psi, n)?;
            let mcf = mc as f64;
            let (z, _) = constants(n);
            let periodic = |a: f64, b: f64| -> f64 {
                let (ra, rb) = (a.powf(1.0 / (2.0 * n as f64)), b.powf(1.0 / (2.0 * n as f64)));
                let pts: Vec<Complex64> =
                    (0..2 * n).map(|j| z.powi(j as i32) * if j < n { ra } else { rb }).collect();
                vandermonde(&pts).norm().powf(-0.5)
            };
            let unit = periodic(1.0, 1.0);
            let block = (2.0 * mcf + 2.0).powf((mcf + 2.0) / 2.0) * unit;
            let endpoint = (p0 * p1).powf((2.0 * mcf + 1.0) / 8.0) * periodic(p0, p1) / unit;
            AsymptoticForm::new(9, n, Transform::Eps, -(2.0 * mcf + 1.0), block, endpoint)
        }
        _ => return Err(unsupported(spec)),
    };
    Ok(form)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn constants_and_transforms() {
        let (z1, d1) = constants(1);
        assert_eq!(z1, Complex64::new(-1.0, 0.0));
        assert!((d1 - 0.5).abs() < 1e-15);
        assert!((constants(2).1 - 3.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let t = epsilon_transforms(0.3, 1);
        assert!((t.eps_n - 0.3 * 2f64.sqrt()).abs() < 1e-15);
        assert!((t.c_n - 2.0).abs() < 1e-15);
        for n in 1..=8 {
            let oracle = 2.0 * PI.sqrt() * gamma(n as f64) / gamma(n as f64 - 0.5);
            assert!((c_n(n) - oracle).abs() < 1e-12 * oracle);
        }
    }

    #[test]
    fn k_sums() {
        assert_eq!(K_of(&[0, 0, 0]), 0);
        assert_eq!(K_of(&[1]), 3);
        assert_eq!(K_tilde_of(&[1, 1]), 12);
    }

    #[test]
    fn wiener_prefactor() {
        let spec = ProcessSpec::new(Family::Wiener);
        let a = proposition_asymptotic(&spec, &Weight::unit()).unwrap();
        // C·ε_1 = (4/√π)·ε.
        let c = a.prefactor * 2f64.sqrt();
        assert!((c - 4.0 / PI.sqrt()).abs() < 1e-12);
        let v = evaluate_asymptotic(&a, 0.1);
        let oracle = 4.0 / PI.sqrt() * 0.1 * (-12.5f64).exp();
        assert!((v.value - oracle).abs() < 1e-12 * oracle);
        assert!((v.value - 8.41e-7).abs() < 0.01e-7);
        let w = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let b = proposition_asymptotic(&spec, &w).unwrap();
        assert!((b.endpoint_correction - 2.0).abs() < 1e-12);
        assert!((evaluate_asymptotic(&b, 0.1).value - 1.68e-6).abs() < 0.01e-6);
    }

    #[test]
    fn slepian_is_scaled_ou() {
        let w = Weight::unit();
        let ou = proposition_asymptotic(&ProcessSpec::new(Family::OrnsteinUhlenbeck), &w).unwrap();
        let sl = proposition_asymptotic(&ProcessSpec::new(Family::Slepian), &w).unwrap();
        let r = evaluate_asymptotic(&sl, 0.2).value / evaluate_asymptotic(&ou, 0.2).value;
        assert!((r - (2.0 / std::f64::consts::E).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matern_one_matches_ou() {
        let w = Weight::parse("exp(2*t - 1)").unwrap();
        let ou = proposition_asymptotic(&ProcessSpec::new(Family::OrnsteinUhlenbeck), &w);
        assert!(matches!(ou, Err(SmallBallError::NotNormalized { .. })));
        let (w, _) = crate::model::normalize_weight(&w, 1).unwrap();
        let ou = proposition_asymptotic(&ProcessSpec::new(Family::OrnsteinUhlenbeck), &w).unwrap();
        let ma = proposition_asymptotic(&ProcessSpec::new(Family::Matern(1)), &w).unwrap();
        for eps in [0.05, 0.1, 0.3] {
            let (a, b) = (evaluate_asymptotic(&ou, eps), evaluate_asymptotic(&ma, eps));
            assert!((a.log_value - b.log_value).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_wiener_ratio_matches_separated_theta() {
        // The ψ-dependence of Prop. 1 at m = 0 equals the θ-route ratio.
        let w = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let r = crate::theta::separated_ratio(1, 0, 1, w.endpoints(), (1.0, 1.0));
        let a = proposition_asymptotic(&ProcessSpec::new(Family::Wiener), &w).unwrap();
        assert!((a.endpoint_correction - r.ratio).abs() < 1e-12);
    }

    #[test]
    fn reversal_swaps_betas() {
        // t ↦ 1−t maps β to 1−β and ψ(t) to ψ(1−t).
        for m in 1..=3usize {
            for mask in 0..(1u32 << m) {
                let betas: Vec<u8> = (0..m).map(|i| ((mask >> i) & 1) as u8).collect();
                let flipped: Vec<u8> = betas.iter().map(|b| 1 - b).collect();
                let cases = [
                    (Family::Bogolyubov { omega: 1.5, covariance: None }, 0, m + 1),
                    (Family::Bridge, 1, m + 2),
                ];
                for (family, centerings, n) in cases {
                    let spec = |b: &[u8]| {
                        ProcessSpec::new(family.clone()).with_betas(b.to_vec()).with_centerings(centerings, false)
                    };
                    for text in [("1", "1"), ("(1+t)^2", "(2-t)^2")] {
                        let w = |s: &str| crate::model::normalize_weight(&Weight::parse(s).unwrap(), n).unwrap().0;
                        let a = proposition_asymptotic(&spec(&betas), &w(text.0)).unwrap();
                        let b = proposition_asymptotic(&spec(&flipped), &w(text.1)).unwrap();
                        let (va, vb) = (evaluate_asymptotic(&a, 0.01), evaluate_asymptotic(&b, 0.01));
                        assert!((va.log_value - vb.log_value).abs() < 1e-10, "{family:?} {betas:?} {text:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_chain() {
        let spec = ProcessSpec::new(Family::Wiener).with_centerings(2, false);
        assert!(matches!(proposition_asymptotic(&spec, &Weight::unit()), Err(SmallBallError::UnsupportedSpec(_))));
    }
}
