//! Characteristic determinant of `Ly = ζ^{2n}ψy`, `U_ν(y) = 0` and its roots.
//!
//! The fundamental matrix grows like `exp(ζ ψ^{1/(2n)} t)` for `n ≥ 2`, so the
//! determinant is assembled from exterior powers of the fundamental matrix
//! (Cauchy–Binet over the boundary matrix `[B0 | B1]`). Each exterior power is
//! integrated directly with its leading growth rate divided out, and the terms
//! are combined on a common logarithmic scale.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::linalg::{binomial, det_real, subset_rank, subsets};
use crate::model::{normalization_integral, BVProblem, Expr};

use super::ode::{integrate, OdeOptions};
use super::{weyl_count, Method, SpectrumError, SpectrumResult};

/// Relative tolerance of the root refinement in `ζ`.
pub const ROOT_TOL: f64 = 1e-12;

/// Values and derivatives at `t = 1` of the solutions with
/// `φ_j^{(k)}(0) = δ_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSystem {
    pub n: usize,
    pub zeta: f64,
    /// Row-major `2n × 2n`; entry `(i, j)` is `φ_j^{(i)}(1)`.
    pub at_one: Vec<f64>,
}

impl FundamentalSystem {
    pub fn get(&self, derivative: usize, solution: usize) -> f64 {
        self.at_one[derivative * 2 * self.n + solution]
    }
}

/// `F(ζ) = value · exp(log_scale)`, up to a positive factor that does not
/// move roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    pub value: f64,
    pub log_scale: f64,
}

/// Finite-difference spacing for a derivative of order `d`.
fn fd_step(d: usize) -> f64 {
    if d == 1 {
        1e-6
    } else {
        f64::EPSILON.powf(1.0 / (d as f64 + 2.0))
    }
}

fn derivative(expr: &Expr, d: usize, t: f64) -> f64 {
    if d == 0 {
        return expr.eval_unchecked(t);
    }
    let h = fd_step(d);
    let half = 0.5 * d as f64 * h;
    let centre = t.clamp(half, 1.0 - half);
    let mut acc = 0.0;
    for j in 0..=d {
        let c = binomial(d, j) as f64 * if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * expr.eval_unchecked(centre + (j as f64 - 0.5 * d as f64) * h);
    }
    acc / h.powi(d as i32)
}

/// Coefficients of `y^{(2n)} = Σ_c a_c y^{(c)}` apart from the spectral term.
struct LowerOrder {
    n: usize,
    constant: Option<Vec<f64>>,
    p: Vec<Expr>,
}

impl LowerOrder {
    fn new(n: usize, p: &[Expr]) -> Self {
        let constant = p.iter().all(Expr::is_constant).then(|| {
            let mut l = vec![0.0; 2 * n];
            for (m, pm) in p.iter().enumerate() {
                l[2 * m] = pm.eval_unchecked(0.0);
            }
            l
        });
        LowerOrder { n, constant, p: p.to_vec() }
    }

    /// `Σ_m C(m, c−m) p_m^{(2m−c)}(t)` for `c = 0..2n`.
    fn fill(&self, t: f64, out: &mut [f64]) {
        if let Some(l) = &self.constant {
            out.copy_from_slice(l);
            return;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for (m, pm) in self.p.iter().enumerate() {
            if pm.is_constant() {
                out[2 * m] += pm.eval_unchecked(0.0);
                continue;
            }
            for c in m..=2 * m {
                out[c] += binomial(m, c - m) as f64 * derivative(pm, 2 * m - c, t);
            }
        }
        debug_assert_eq!(out.len(), 2 * self.n);
    }
}

/// Derivative links of the `k`-th exterior power of the companion system.
struct CompoundLinks {
    dim: usize,
    /// `(target, source)` for the superdiagonal.
    up: Vec<(usize, usize)>,
    /// `(target, source, column of the last row, sign)`.
    last: Vec<(usize, usize, usize, f64)>,
}

impl CompoundLinks {
    fn new(order: usize, k: usize) -> Self {
        let sets = subsets(order, k);
        let top = order - 1;
        let mut up = Vec::new();
        let mut last = Vec::new();
        for (target, rows) in sets.iter().enumerate() {
            for &r in rows {
                if r < top {
                    if rows.contains(&(r + 1)) {
                        continue;
                    }
                    let mut src = rows.clone();
                    let pos = src.iter().position(|&x| x == r).expect("member");
                    src[pos] = r + 1;
                    up.push((target, subset_rank(order, &src)));
                } else {
                    for l in 0..order {
                        if l != top && rows.contains(&l) {
                            continue;
                        }
                        let mut src: Vec<usize> = rows.iter().copied().filter(|&x| x != top).collect();
                        let between = src.iter().filter(|&&x| x > l).count();
                        src.push(l);
                        src.sort_unstable();
                        let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
                        last.push((target, subset_rank(order, &src), l, sign));
                    }
                }
            }
        }
        CompoundLinks { dim: sets.len(), up, last }
    }
}

/// One term `coef · s^{power} · minor(Φ̂)[rows, cols]` of the Cauchy–Binet sum.
#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    power: i32,
    rows: usize,
    col: usize,
}

const MAX_TERMS: usize = 200_000;

struct Shooter<'a> {
    problem: &'a BVProblem,
    n: usize,
    lower: LowerOrder,
    theta: f64,
    /// Terms grouped by exterior degree `k`.
    terms: BTreeMap<usize, Vec<Term>>,
    links: BTreeMap<usize, CompoundLinks>,
    rtol: f64,
}

/// Sum of the `k` largest of `−sin(jπ/n)`, `j = 0..2n`.
fn growth_rate(n: usize, k: usize) -> f64 {
    let mut rates: Vec<f64> = (0..2 * n).map(|j| -(j as f64 * PI / n as f64).sin()).collect();
    rates.sort_by(|a, b| b.total_cmp(a));
    rates[..k].iter().sum::<f64>().max(0.0)
}

impl<'a> Shooter<'a> {
    fn new(problem: &'a BVProblem) -> Result<Self, SpectrumError> {
        let n = problem.n();
        let order = 2 * n;
        let theta = normalization_integral(&problem.weight, n).value;
        let b0: Vec<Vec<f64>> = problem.bcs.iter().map(|bc| (0..order).map(|j| bc.coeff_at_zero(j)).collect()).collect();
        let b1: Vec<Vec<f64>> = problem.bcs.iter().map(|bc| (0..order).map(|j| bc.coeff_at_one(j)).collect()).collect();
        let nz0: Vec<usize> = (0..order).filter(|&j| b0.iter().any(|r| r[j] != 0.0)).collect();
        let nz1: Vec<usize> = (0..order).filter(|&j| b1.iter().any(|r| r[j] != 0.0)).collect();
        let count: usize = (0..=order).map(|a| binomial(nz0.len(), a) * binomial(nz1.len(), order - a)).sum();
        if count > MAX_TERMS {
            return Err(SpectrumError::TooManyTerms(count));
        }
        let mut terms: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
        for a in 0..=order.min(nz0.len()) {
            let k = order - a;
            if k > nz1.len() {
                continue;
            }
            for p0 in subsets(nz0.len(), a) {
                let s0: Vec<usize> = p0.iter().map(|&i| nz0[i]).collect();
                let cols: Vec<usize> = (0..order).filter(|j| !s0.contains(j)).collect();
                let sign0: usize = s0.iter().enumerate().map(|(i, &s)| i + s).sum();
                for p1 in subsets(nz1.len(), k) {
                    let s1: Vec<usize> = p1.iter().map(|&i| nz1[i]).collect();
                    let mut m = Vec::with_capacity(order * order);
                    for row in 0..order {
                        m.extend(s0.iter().map(|&j| b0[row][j]));
                        m.extend(s1.iter().map(|&j| b1[row][j]));
                    }
                    let d = det_real(m, order);
                    if d == 0.0 {
                        continue;
                    }
                    let coef = if sign0 % 2 == 0 { d } else { -d };
                    let power = s1.iter().sum::<usize>() as i32 - cols.iter().sum::<usize>() as i32;
                    terms.entry(k).or_default().push(Term {
                        coef,
                        power,
                        rows: subset_rank(order, &s1),
                        col: subset_rank(order, &cols),
                    });
                }
            }
        }
        let links = terms
            .keys()
            .filter(|&&k| k > 0 && k < order)
            .map(|&k| (k, CompoundLinks::new(order, k)))
            .collect();
        Ok(Shooter { problem, n, lower: LowerOrder::new(n, &problem.op.p), theta, terms, links, rtol: 1e-12 })
    }

    /// Minors `Φ̂[·, col]` at `t = 1` of the `k`-th exterior power for the
    /// requested columns, with the growth `exp(ζ g_k ∫ψ^{1/2n})` divided out.
    fn compound_columns(&self, k: usize, cols: &[usize], zeta: f64, shifted: bool) -> Result<Vec<f64>, SpectrumError> {
        let n = self.n;
        let order = 2 * n;
        let links = &self.links[&k];
        let dim = links.dim;
        let s = zeta.max(1.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let z2n = zeta.powi(order as i32);
        let inv = 1.0 / (2 * n) as f64;
        let g = if shifted { zeta * growth_rate(n, k) } else { 0.0 };
        let weight = &self.problem.weight;
        let constant_weight = weight.is_constant().then(|| weight.eval(0.0));
        let scale_pows: Vec<f64> = (0..order).map(|c| s.powi(c as i32 - order as i32)).collect();
        let mut lower = vec![0.0; order];
        let mut b = vec![0.0; order];

        let mut y = vec![0.0; dim * cols.len()];
        for (j, &c) in cols.iter().enumerate() {
            y[j * dim + c] = 1.0;
        }
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let psi = constant_weight.unwrap_or_else(|| weight.eval(t));
            self.lower.fill(t, &mut lower);
            for c in 0..order {
                let spectral = if c == 0 { z2n * psi } else { 0.0 };
                b[c] = s * sign * (spectral - lower[c]) * scale_pows[c];
            }
            let shift = g * psi.powf(inv);
            for col in 0..cols.len() {
                let off = col * dim;
                let (yc, dc) = (&y[off..off + dim], &mut dy[off..off + dim]);
                for i in 0..dim {
                    dc[i] = -shift * yc[i];
                }
                for &(tgt, src) in &links.up {
                    dc[tgt] += s * yc[src];
                }
                for &(tgt, src, l, sg) in &links.last {
                    dc[tgt] += sg * b[l] * yc[src];
                }
            }
        };
        let opts = OdeOptions { rtol: self.rtol, block: dim, ..OdeOptions::default() };
        integrate(rhs, 0.0, 1.0, &mut y, &opts)?;
        Ok(y)
    }

    fn evaluate(&self, zeta: f64) -> Result<CharValue, SpectrumError> {
        let order = 2 * self.n;
        let ln_s = zeta.max(1.0).ln();
        let mut parts: Vec<(f64, f64)> = Vec::new();
        for (&k, terms) in &self.terms {
            let shift = zeta * growth_rate(self.n, k) * self.theta;
            if k == 0 || k == order {
                for t in terms {
                    parts.push((t.coef.signum(), t.coef.abs().ln() + t.power as f64 * ln_s));
                }
                continue;
            }
            let mut cols: Vec<usize> = terms.iter().map(|t| t.col).collect();
            cols.sort_unstable();
            cols.dedup();
            let y = self.compound_columns(k, &cols, zeta, true)?;
            let dim = self.links[&k].dim;
            for t in terms {
                let j = cols.binary_search(&t.col).expect("column present");
                let log = t.coef.abs().ln() + t.power as f64 * ln_s + shift;
                parts.push((t.coef.signum() * y[j * dim + t.rows], log));
            }
        }
        let log_scale = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if !log_scale.is_finite() {
            return Ok(CharValue { value: 0.0, log_scale: 0.0 });
        }
        let value = parts.iter().map(|&(v, l)| v * (l - log_scale).exp()).sum();
        Ok(CharValue { value, log_scale })
    }
}

/// Solutions with canonical initial data, integrated to `t = 1`.
pub fn fundamental_system(problem: &BVProblem, zeta: f64) -> Result<FundamentalSystem, SpectrumError> {
    let n = problem.n();
    let order = 2 * n;
    let mut shooter = Shooter::new(problem)?;
    shooter.links.entry(1).or_insert_with(|| CompoundLinks::new(order, 1));
    let cols: Vec<usize> = (0..order).collect();
    let y = shooter.compound_columns(1, &cols, zeta, false)?;
    let s = zeta.max(1.0);
    let mut at_one = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            at_one[i * order + j] = y[j * order + i] * s.powi(i as i32 - j as i32);
        }
    }
    Ok(FundamentalSystem { n, zeta, at_one })
}

/// `F(ζ) = det[U_ν(φ_j)]` on a logarithmic scale.
pub fn characteristic_function(problem: &BVProblem, zeta: f64) -> Result<CharValue, SpectrumError> {
    Shooter::new(problem)?.evaluate(zeta)
}

fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, rtol: f64) -> Result<(f64, f64), SpectrumError>
where
    F: FnMut(f64) -> Result<f64, SpectrumError>,
{
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb == 0.0 {
            return Ok((b, 0.0));
        }
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rtol * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol {
            return Ok((b, (c - b).abs() / b.abs()));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b)?;
    }
    Ok((b, (c - b).abs() / b.abs()))
}

/// First `count` eigenvalues `μ_k = ζ_k^{2n}` from sign changes of `F` on a
/// grid of spacing `π/(4ϑ)`, refined by Brent's method. Double eigenvalues
/// (periodic conditions) produce no sign change and end in `MissedRoot`.
pub fn eigenvalues_shooting(problem: &BVProblem, count: usize) -> Result<SpectrumResult, SpectrumError> {
    if count == 0 {
        return Err(SpectrumError::ZeroCount);
    }
    let n = problem.n();
    let shooter = Shooter::new(problem)?;
    let theta = shooter.theta;
    let h = PI / (4.0 * theta);
    let zeta_max = (count as f64 + 2.0) * PI / theta;
    let f = |z: f64| shooter.evaluate(z).map(|v| v.value);

    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut z_prev = 0.37 * h;
    let mut f_prev = f(z_prev)?;
    let mut z_end = z_prev;
    let mut j = 1usize;
    loop {
        let z = (j as f64 + 0.37) * h;
        if z > zeta_max && roots.len() >= count {
            break;
        }
        if z > 2.0 * zeta_max {
            break;
        }
        let fz = f(z)?;
        if f_prev == 0.0 {
            roots.push((z_prev, 0.0));
        } else if fz != 0.0 && fz.signum() != f_prev.signum() {
            roots.push(brent(f, z_prev, z, f_prev, fz, ROOT_TOL)?);
        }
        z_end = z;
        z_prev = z;
        f_prev = fz;
        j += 1;
    }
    let expected = weyl_count(theta, z_end);
    if roots.len() < count || (roots.len() as f64 - expected).abs() > n as f64 {
        return Err(SpectrumError::MissedRoot { found: roots.len(), expected, zeta_max: z_end });
    }
    roots.truncate(count);
    let order = 2 * n as i32;
    let mu = roots.iter().map(|r| r.0.powi(order)).collect();
    let err = roots.iter().map(|r| order as f64 * (r.1 + 10.0 * shooter.rtol)).collect();
    Ok(SpectrumResult { mu, err, method: Method::Shooting, theta_norm: theta })
}
