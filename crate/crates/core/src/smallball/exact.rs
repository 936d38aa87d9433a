//! `P(Σ λ_j ξ_j² ≤ r²)` by numerical inversion of the Laplace transform.
//!
//! With `L(s) = ∏(1+2sλ_j)^{-1/2}`,
//! `P = (1/2πi) ∫ L(s) e^{s r²} ds/s` along any contour crossing the real
//! axis at `c > 0` (and `P − 1` for `c < 0`). The contour is the parabola
//! `s = c + iy − a y²` through the saddle point, which makes the integrand
//! decay like a Gaussian in `y`; it is integrated by the trapezoidal rule.

use num_complex::Complex64;
use serde::Serialize;

use super::{Method, ProbabilityEstimate, SmallBallError};
use crate::spectrum::SpectrumResult;

/// Terms below this fraction of the peak end the trapezoidal sum.
const TRUNCATION: f64 = 1e-17;
/// Largest accepted relative difference between step `h` and `2h`.
const SELF_CHECK: f64 = 1e-6;
const MAX_POINTS: usize = 2_000_000;
const MAX_TAIL_TERMS: usize = 5_000_000;

/// Eigenvalues `λ_j = amplitude/(j + shift)^{2n}` for `j > start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailModel {
    pub amplitude: f64,
    pub shift: f64,
    pub half_order: usize,
    pub start: usize,
}

impl TailModel {
    /// Weyl amplitude `scale·(ϑ/π)^{2n}`, shift matched to the last eigenvalue.
    pub fn weyl(lambdas: &[f64], half_order: usize, theta: f64, scale: f64) -> Option<TailModel> {
        let last = *lambdas.last()?;
        let p = 2 * half_order;
        let amplitude = scale * (theta / std::f64::consts::PI).powi(p as i32);
        let k = lambdas.len();
        let shift = (amplitude / last).powf(1.0 / p as f64) - k as f64;
        Some(TailModel { amplitude, shift, half_order, start: k })
    }

    /// Amplitude and shift from a least-squares fit of `log λ_j` over the
    /// upper half of the spectrum. Needs at least 8 eigenvalues.
    pub fn fitted(lambdas: &[f64], half_order: usize) -> Option<TailModel> {
        let k = lambdas.len();
        if k < 8 || lambdas.iter().any(|l| !(*l > 0.0)) {
            return None;
        }
        let p = (2 * half_order) as f64;
        let pts: Vec<(f64, f64)> = (k / 2..=k).map(|j| (j as f64, lambdas[j - 1].ln())).collect();
        // For fixed shift the best log-amplitude is a mean; returns (residual, log A).
        let fit = |d: f64| {
            let la = pts.iter().map(|(j, l)| l + p * (j + d).ln()).sum::<f64>() / pts.len() as f64;
            let r = pts.iter().map(|(j, l)| (l - la + p * (j + d).ln()).powi(2)).sum::<f64>();
            (r, la)
        };
        let (mut a, mut b) = (0.5 - (k / 2) as f64, k as f64);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if fit(c).0 < fit(d).0 {
                b = d;
            } else {
                a = c;
            }
        }
        let shift = 0.5 * (a + b);
        let amplitude = fit(shift).1.exp();
        Some(TailModel { amplitude, shift, half_order, start: k })
    }

    /// Tail of a spectrum whose `λ = scale/μ`: Weyl amplitude for
    /// differential-operator spectra, a fitted one for kernel spectra.
    pub fn for_spectrum(s: &SpectrumResult, half_order: usize, scale: f64) -> Option<TailModel> {
        let lambdas = s.lambdas(scale);
        match s.method {
            crate::spectrum::Method::Nystrom => TailModel::fitted(&lambdas, half_order),
            _ => TailModel::weyl(&lambdas, half_order, s.theta_norm, scale),
        }
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.amplitude / (j as f64 + self.shift).powi(2 * self.half_order as i32)
    }

    pub fn scaled(&self, c: f64) -> TailModel {
        TailModel { amplitude: self.amplitude * c, ..*self }
    }

    /// First index summed explicitly is `start + 1`; from `cut` on the sum is
    /// replaced by an integral expanded in powers of `2sλ`.
    fn cut(&self, s_abs: f64) -> usize {
        let need = self.needed_cut(s_abs);
        let lo = self.start + 65;
        if need.is_finite() && need > lo as f64 {
            (need.ceil() as usize).min(self.start + MAX_TAIL_TERMS)
        } else {
            lo
        }
    }

    fn needed_cut(&self, s_abs: f64) -> f64 {
        let p = 2.0 * self.half_order as f64;
        (20.0 * 2.0 * s_abs * self.amplitude).powf(1.0 / p) - self.shift + 1.0
    }

    /// Whether the tail expansion converges at `|s| = s_abs`.
    pub fn covers(&self, s_abs: f64) -> bool {
        self.needed_cut(s_abs) <= (self.start + MAX_TAIL_TERMS) as f64
    }

    /// `Σ_{j≥cut} λ_j^p` as `∫_{u0}^∞ λ(u)^p du` with `u0 = cut − 1/2` plus the
    /// first two midpoint Euler–Maclaurin corrections.
    fn power_integral(&self, cut: usize, power: usize) -> f64 {
        let q = (2 * self.half_order * power) as f64;
        let u0 = cut as f64 - 0.5 + self.shift;
        let v = self.amplitude.powi(power as i32) * u0.powf(1.0 - q);
        v * (1.0 / (q - 1.0) - q / (24.0 * u0 * u0) + 7.0 * q * (q + 1.0) * (q + 2.0) / (5760.0 * u0.powi(4)))
    }

    /// `Σ_{j>start} log(1 + 2sλ_j)`.
    pub fn log_sum(&self, s: Complex64) -> Complex64 {
        let cut = self.cut(s.norm());
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.start + 1..cut {
            acc += (1.0 + 2.0 * s * self.lambda(j)).ln();
        }
        // log(1+x) = Σ (−1)^{p+1} x^p / p.
        let mut term = Complex64::new(1.0, 0.0);
        for p in 1..=40 {
            term *= 2.0 * s;
            let c = self.power_integral(cut, p);
            let add = term * c * if p % 2 == 1 { 1.0 } else { -1.0 } / p as f64;
            acc += add;
            if add.norm() < 1e-18 * acc.norm().max(1e-300) {
                break;
            }
        }
        acc
    }

    /// `(Σ λ_j/(1+2sλ_j), Σ 2λ_j²/(1+2sλ_j)²)` over `j > start`, real `s`.
    pub fn moments(&self, s: f64) -> (f64, f64) {
        let cut = self.cut(s.abs());
        let (mut m1, mut m2) = (0.0, 0.0);
        for j in self.start + 1..cut {
            let l = self.lambda(j);
            let d = 1.0 + 2.0 * s * l;
            m1 += l / d;
            m2 += 2.0 * l * l / (d * d);
        }
        // λ/(1+2sλ) = Σ (−2s)^{p−1} λ^p; 2λ²/(1+2sλ)² = 2 Σ p (−2s)^{p−1} λ^{p+1}.
        let mut f = 1.0;
        for p in 1..=40 {
            let a1 = f * self.power_integral(cut, p);
            let a2 = 2.0 * p as f64 * f * self.power_integral(cut, p + 1);
            m1 += a1;
            m2 += a2;
            if a1.abs() < 1e-18 * m1.abs() && a2.abs() < 1e-18 * m2.abs() {
                break;
            }
            f *= -2.0 * s;
        }
        (m1, m2)
    }

    /// `Σ_{j>start} λ_j`.
    pub fn mean(&self) -> f64 {
        self.moments(0.0).0
    }
}

/// Cumulant data of `Σλ_jξ_j²` at real or complex `s`.
struct Cumulants<'a> {
    lambdas: &'a [f64],
    tail: Option<&'a TailModel>,
}

impl Cumulants<'_> {
    /// `log L(s) = −½ Σ log(1+2sλ)`.
    fn log_laplace(&self, s: Complex64) -> Complex64 {
        let mut acc: Complex64 = self.lambdas.iter().map(|&l| (1.0 + 2.0 * s * l).ln()).sum();
        if let Some(t) = self.tail {
            acc += t.log_sum(s);
        }
        -0.5 * acc
    }

    /// `(−d/ds log L, d²/ds² log L)` at real `s`.
    fn moments(&self, s: f64) -> (f64, f64) {
        let (mut m1, mut m2) = self.tail.map(|t| t.moments(s)).unwrap_or((0.0, 0.0));
        for &l in self.lambdas {
            let d = 1.0 + 2.0 * s * l;
            m1 += l / d;
            m2 += 2.0 * l * l / (d * d);
        }
        (m1, m2)
    }
}

fn validate(lambdas: &[f64], r: f64) -> Result<(), SmallBallError> {
    if lambdas.is_empty() {
        return Err(SmallBallError::InvalidInput("eigenvalue list is empty".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(SmallBallError::InvalidInput(format!("eigenvalues must be positive and finite, got {l}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(SmallBallError::InvalidInput(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// Solves `Σ λ_j/(1+2sλ_j) = x` on `(−1/(2λ_max), ∞)`.
fn tilt(c: &Cumulants, x: f64, lmax: f64) -> Result<f64, SmallBallError> {
    let lo_bound = -0.5 / lmax;
    let g = |s: f64| c.moments(s).0 - x;
    let (mut lo, mut hi);
    if g(0.0) > 0.0 {
        lo = 0.0;
        hi = 1.0 / lmax;
        while g(hi) > 0.0 {
            if c.tail.is_some_and(|t| !t.covers(2.0 * hi)) {
                return Err(SmallBallError::TooDeep { s: hi });
            }
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(SmallBallError::TiltNotFound { x });
            }
        }
    } else {
        hi = 0.0;
        // Approach the singularity geometrically.
        let mut gap = 0.5 * (-lo_bound);
        lo = lo_bound + gap;
        while g(lo) < 0.0 {
            hi = lo;
            gap *= 0.5;
            lo = lo_bound + gap;
            if gap < 1e-300 {
                return Err(SmallBallError::TiltNotFound { x });
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trapezoidal sum of `Im[f(s(y)) s'(y)]/π` over `y ≥ 0` with step `h`,
/// relative to `exp(log_peak)`.
fn contour_sum(c: &Cumulants, x: f64, c0: f64, a: f64, h: f64, log_peak: f64) -> Result<f64, SmallBallError> {
    let term = |y: f64| -> Complex64 {
        let s = Complex64::new(c0 - a * y * y, y);
        let ds = Complex64::new(-2.0 * a * y, 1.0);
        let log_f = c.log_laplace(s) + s * x - s.ln() - log_peak;
        log_f.exp() * ds
    };
    let mut acc = 0.5 * term(0.0).im;
    let mut k = 1usize;
    loop {
        let t = term(k as f64 * h);
        acc += t.im;
        if t.norm() < TRUNCATION {
            break;
        }
        k += 1;
        if k > MAX_POINTS {
            return Err(SmallBallError::InversionUnstable { diff: f64::NAN });
        }
    }
    Ok(h * acc / std::f64::consts::PI)
}

/// `P(Σ λ_j ξ_j² ≤ r²)` with optional model eigenvalues beyond the list.
pub fn smallball_probability_exact(
    lambdas: &[f64],
    tail: Option<&TailModel>,
    r: f64,
) -> Result<ProbabilityEstimate, SmallBallError> {
    validate(lambdas, r)?;
    let cum = Cumulants { lambdas, tail };
    let x = r * r;
    let lmax = lambdas.iter().copied().fold(0.0, f64::max).max(tail.map_or(0.0, |t| t.lambda(t.start + 1)));
    let u = 0.5 / lmax;
    let s_star = tilt(&cum, x, lmax)?;
    // Keep the crossing point away from the pole at 0 and the first branch point.
    let mut c0 = s_star.max(-0.5 * u);
    if c0.abs() < 0.25 * u {
        c0 = 0.25 * u;
    }
    let (_, k2) = cum.moments(c0);
    let width = 1.0 / k2.sqrt();
    let a = 1.0 / (40.0 * x * width * width);
    let strip = c0.abs().min(c0 + u).min(0.5 / a);
    let h0 = (0.25 * width).min(strip / 8.0);
    let log_peak = (cum.log_laplace(Complex64::new(c0, 0.0)) + c0 * x).re - c0.abs().ln();
    let fine = contour_sum(&cum, x, c0, a, h0, log_peak)?;
    let coarse = contour_sum(&cum, x, c0, a, 2.0 * h0, log_peak)?;
    let (value, err) = if c0 > 0.0 {
        let log_p = fine.abs().ln() + log_peak;
        let scale = log_peak.exp();
        if !(fine > 0.0) {
            return Err(SmallBallError::InversionUnstable { diff: (fine - coarse).abs() / fine.abs() });
        }
        (LogValue { log: log_p, linear: fine * scale }, (fine - coarse).abs() * scale)
    } else {
        let scale = log_peak.exp();
        let p = 1.0 + fine * scale;
        (LogValue { log: p.ln(), linear: p }, (fine - coarse).abs() * scale)
    };
    let rel = err / value.linear.abs().max(f64::MIN_POSITIVE);
    let rel = if value.linear == 0.0 { ((fine - coarse) / fine).abs() } else { rel };
    if !(rel <= SELF_CHECK) || !(value.linear >= -SELF_CHECK && value.linear <= 1.0 + SELF_CHECK) {
        return Err(SmallBallError::InversionUnstable { diff: rel });
    }
    Ok(ProbabilityEstimate {
        p: value.linear.clamp(0.0, 1.0),
        log_p: value.log,
        err,
        method: Method::Saddlepoint,
        tilt: Some(s_star),
        truncation: None,
    })
}

struct LogValue {
    log: f64,
    linear: f64,
}
