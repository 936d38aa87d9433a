//! Adaptive Dormand–Prince 5(4) integrator.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepFailure {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    /// Absolute floor relative to each block's max-norm.
    pub atol: f64,
    pub max_steps: usize,
    /// The state is split into consecutive blocks of this length; errors are
    /// measured relative to each block's max-norm.
    pub block: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-300, max_steps: 5_000_000, block: usize::MAX }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut [f64], opts: &OdeOptions) -> Result<OdeStats, StepFailure>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y.len();
    let block = opts.block.min(dim).max(1);
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let mut t = t0;
    f(t, y, &mut k[0]);
    let mut h = dir * initial_step(y, &k[0], span.abs(), opts.rtol);
    let mut err_prev: f64 = 1e-4;

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(StepFailure::TooManySteps(opts.max_steps));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let stage = |tmp: &mut [f64], y: &[f64], k: &[Vec<f64>; 7], coeffs: &[(usize, f64)]| {
            for i in 0..dim {
                let mut acc = 0.0;
                for &(j, a) in coeffs {
                    acc += a * k[j][i];
                }
                tmp[i] = y[i] + h * acc;
            }
        };
        stage(&mut tmp, y, &k, &[(0, A21)]);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&mut tmp, y, &k, &[(0, A31), (1, A32)]);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&mut tmp, y, &k, &[(0, A41), (1, A42), (2, A43)]);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&mut tmp, y, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&mut tmp, y, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        f(t + h, &tmp, &mut k[5]);
        stage(&mut ynew, y, &k, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        f(t + h, &ynew, &mut k[6]);

        let mut err: f64 = 0.0;
        for b in (0..dim).step_by(block) {
            let end = (b + block).min(dim);
            let scale = (b..end).map(|i| y[i].abs().max(ynew[i].abs())).fold(0.0, f64::max);
            let tol = opts.atol + opts.rtol * scale;
            for i in b..end {
                let e = h
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                err = err.max(e.abs() / tol);
            }
        }
        if !err.is_finite() {
            if ynew.iter().any(|v| !v.is_finite()) && h.abs() < 1e-300 {
                return Err(StepFailure::NonFinite(t));
            }
            h *= 0.1;
            stats.rejected += 1;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            stats.accepted += 1;
            // PI step control.
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h.abs() < 1e-14 * t.abs().max(span.abs()) {
            return Err(StepFailure::StepUnderflow { t, h });
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure::NonFinite(t1));
    }
    Ok(stats)
}

fn initial_step(y: &[f64], dy: &[f64], span: f64, rtol: f64) -> f64 {
    let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dnorm = dy.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = if dnorm > 0.0 && ynorm > 0.0 { 0.01 * ynorm / dnorm } else { 1e-6 * span };
    (h * rtol.powf(0.2) / 1e-2f64.powf(0.2)).min(span).max(1e-12 * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = -ω² y over many periods.
        let w = 40.0;
        let mut y = [1.0, 0.0];
        let stats = integrate(|_, y, d| {
            d[0] = y[1];
            d[1] = -w * w * y[0];
        }, 0.0, 1.0, &mut y, &OdeOptions::default())
        .unwrap();
        assert!((y[0] - (w as f64).cos()).abs() < 1e-10, "{}", y[0]);
        assert!((y[1] + w * (w as f64).sin()).abs() < 1e-8);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn exponential_growth_relative_accuracy() {
        let mut y = [1.0];
        integrate(|_, y, d| d[0] = 30.0 * y[0], 0.0, 1.0, &mut y, &OdeOptions::default()).unwrap();
        assert!((y[0] / 30f64.exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn backwards_and_time_dependent() {
        let mut y = [0.0];
        integrate(|t, _, d| d[0] = t.cos(), 1.0, 0.0, &mut y, &OdeOptions::default()).unwrap();
        assert!((y[0] + 1f64.sin()).abs() < 1e-12);
    }
}
