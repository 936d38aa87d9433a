//! Covariance kernels sampled on a Gauss–Legendre grid, and the transforms
//! that build integrated, centered and conditioned processes from them.

mod process;
mod transforms;

use std::fmt::Write as _;
use std::sync::Arc;

use faer::{Mat, Side};
use thiserror::Error;

use crate::model::{Expr, Weight};
use crate::quadrature::CompositeRule;

pub use process::{build_process, Family, ProcessSpec};
pub use transforms::{
    center_kernel, condition_kernel, condition_on_nodes, cumulative_integral, integrate_columns, integrate_kernel,
    integrate_rows, Conditioning, CONDITION_LIMIT,
};

/// Default number of Gauss–Legendre nodes.
pub const DEFAULT_NODES: usize = 1024;

/// Symmetry tolerance of a valid kernel.
pub const SYMMETRY_TOL: f64 = 1e-14;

/// Most negative admissible eigenvalue, relative to the largest.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("family {0} has no covariance formula; supply one")]
    UnsupportedFamily(String),
    #[error("conditioning matrix is singular (condition number {cond:e} > {limit:e})")]
    SingularConditioning { cond: f64, limit: f64 },
    #[error("invalid process specification: {0}")]
    InvalidSpec(String),
    #[error("kernels live on different grids")]
    GridMismatch,
    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),
    #[error("covariance expression is not finite at lag {0}")]
    NonFinite(f64),
}

/// Composite Gauss–Legendre nodes on `[0, 1]` with the endpoints appended as
/// zero-weight nodes. Index 0 is `t = 0`, the last index is `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rule: CompositeRule,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Grid {
    /// `interior` Gauss–Legendre nodes (a positive multiple of 8).
    pub fn new(interior: usize) -> Arc<Grid> {
        let rule = CompositeRule::with_nodes(interior);
        let mut nodes = Vec::with_capacity(interior + 2);
        let mut weights = Vec::with_capacity(interior + 2);
        nodes.push(0.0);
        weights.push(0.0);
        nodes.extend_from_slice(&rule.nodes);
        weights.extend_from_slice(&rule.weights);
        nodes.push(1.0);
        weights.push(0.0);
        Arc::new(Grid { rule, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of quadrature (non-endpoint) nodes.
    pub fn interior_len(&self) -> usize {
        self.rule.len()
    }

    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Symmetric covariance matrix on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub grid: Arc<Grid>,
    /// Row-major `len × len`.
    pub values: Vec<f64>,
    pub label: String,
}

impl Kernel {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<Grid>, label: impl Into<String>, f: F) -> Kernel {
        let n = grid.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(grid.nodes[i], grid.nodes[j]);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Kernel { grid, values, label: label.into() }
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim() + j]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (self.values[i * n + j] + self.values[j * n + i]);
                self.values[i * n + j] = v;
                self.values[j * n + i] = v;
            }
        }
    }

    fn relabel(mut self, step: &str) -> Kernel {
        self.label = format!("{}|{}", self.label, step);
        self
    }

    /// Eigenvalues (ascending) of `√w K √w` over the quadrature nodes, i.e.
    /// the spectrum of the covariance operator.
    pub fn operator_eigenvalues(&self) -> Result<Vec<f64>, KernelError> {
        let g = &self.grid;
        let m = g.interior_len();
        let sw: Vec<f64> = g.weights[1..=m].iter().map(|w| w.sqrt()).collect();
        let a = Mat::<f64>::from_fn(m, m, |i, j| sw[i] * self.at(i + 1, j + 1) * sw[j]);
        a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| KernelError::Eigen(format!("{e:?}")))
    }

    /// Smallest operator eigenvalue relative to the largest.
    pub fn psd_margin(&self) -> Result<f64, KernelError> {
        let ev = self.operator_eigenvalues()?;
        let top = ev.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
        Ok(ev[0] / top)
    }

    /// Grid row, then one row per matrix row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, vals: &mut dyn Iterator<Item = f64>| {
            let parts: Vec<String> = vals.map(|v| format!("{v:.16e}")).collect();
            out.push_str(&parts.join(","));
            out.push('\n');
        };
        let _ = writeln!(out, "# {}", self.label);
        row(&mut out, &mut self.grid.nodes.iter().copied());
        for i in 0..self.dim() {
            row(&mut out, &mut (0..self.dim()).map(|j| self.at(i, j)));
        }
        out
    }
}

/// Covariance formulas of the base processes.
pub fn base_kernel(family: &Family, grid: Arc<Grid>) -> Result<Kernel, KernelError> {
    match family {
        Family::Wiener => Ok(Kernel::from_fn(grid, "wiener", f64::min)),
        Family::Bridge => Ok(Kernel::from_fn(grid, "bridge", |t, s| t.min(s) - t * s)),
        Family::OrnsteinUhlenbeck => Ok(Kernel::from_fn(grid, "ou", |t, s| (-(t - s).abs()).exp())),
        Family::Slepian => Ok(Kernel::from_fn(grid, "slepian", |t, s| 1.0 - (t - s).abs())),
        Family::Matern(n) => {
            if *n == 0 {
                return Err(KernelError::InvalidSpec("Matérn order must be at least 1".into()));
            }
            let coeffs = matern_coefficients(*n);
            Ok(Kernel::from_fn(grid, format!("matern({n})"), move |t, s| matern(&coeffs, (t - s).abs())))
        }
        Family::Bogolyubov { omega, covariance } => {
            if !(*omega > 0.0) {
                return Err(KernelError::InvalidSpec(format!("Bogolyubov ω must be positive, got {omega}")));
            }
            let w = *omega;
            match covariance {
                None => {
                    let denom = 2.0 * w * (0.5 * w).sinh();
                    Ok(Kernel::from_fn(grid, format!("bogolyubov({w})"), move |t, s| {
                        (w * ((t - s).abs() - 0.5)).cosh() / denom
                    }))
                }
                Some(expr) => {
                    let k = Kernel::from_fn(grid, format!("bogolyubov({w};{expr})"), |t, s| {
                        expr.eval_unchecked((t - s).abs())
                    });
                    match k.values.iter().position(|v| !v.is_finite()) {
                        Some(p) => {
                            let d = k.dim();
                            Err(KernelError::NonFinite((k.grid.nodes[p / d] - k.grid.nodes[p % d]).abs()))
                        }
                        None => Ok(k),
                    }
                }
            }
        }
        Family::ConditionalIntegratedWiener(_) => {
            Err(KernelError::InvalidSpec("conditional integrated Wiener is built by build_process".into()))
        }
    }
}

/// `(n−1)!/(2n−2)! · (n+k−1)!/(k!(n−k−1)!)` for the power `(2d)^{n−k−1}`.
fn matern_coefficients(n: usize) -> Vec<f64> {
    let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    let pre = fact(n - 1) / fact(2 * n - 2);
    (0..n).map(|k| pre * fact(n + k - 1) / (fact(k) * fact(n - k - 1))).collect()
}

fn matern(coeffs: &[f64], d: f64) -> f64 {
    let n = coeffs.len();
    let sum: f64 = coeffs.iter().enumerate().map(|(k, c)| c * (2.0 * d).powi((n - k - 1) as i32)).sum();
    (-d).exp() * sum
}

/// Entrywise `K(t, s)·√(ψ(t)ψ(s))`.
pub fn apply_weight(k: &Kernel, w: &Weight) -> Kernel {
    let root: Vec<f64> = k.grid.nodes.iter().map(|&t| w.eval(t).sqrt()).collect();
    let n = k.dim();
    let mut values = k.values.clone();
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] *= root[i] * root[j];
        }
    }
    Kernel { grid: k.grid.clone(), values, label: k.label.clone() }.relabel(&format!("weight({})", w.expr()))
}

/// Parses a Bogolyubov covariance given as a function of the lag, written in
/// the variable `t`.
pub fn lag_covariance(text: &str) -> Result<Expr, crate::model::ExprError> {
    Expr::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid> {
        Grid::new(64)
    }

    #[test]
    fn base_values() {
        let g = grid();
        let w = base_kernel(&Family::Wiener, g.clone()).unwrap();
        assert_eq!(w.at(0, g.last()), 0.0);
        let k = Kernel::from_fn(g.clone(), "x", f64::min);
        assert_eq!(k.values, w.values);
        assert_eq!(f64::min(0.3, 0.7), 0.3);
        let s = base_kernel(&Family::Slepian, g.clone()).unwrap();
        assert_eq!(s.at(0, g.last()), 0.0);
        assert_eq!(s.at(3, 3), 1.0);
    }

    #[test]
    fn matern_one_is_ou() {
        let g = grid();
        let m = base_kernel(&Family::Matern(1), g.clone()).unwrap();
        let ou = base_kernel(&Family::OrnsteinUhlenbeck, g).unwrap();
        let diff = m.values.iter().zip(&ou.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-15);
    }

    #[test]
    fn matern_two_closed_form() {
        // (1 + d) e^{-d}.
        let c = matern_coefficients(2);
        for d in [0.0, 0.3, 1.0] {
            assert!((matern(&c, d) - (1.0 + d) * (-d as f64).exp()).abs() < 1e-15);
        }
        // (3 + 3d + d²) e^{-d} / 3.
        let c = matern_coefficients(3);
        let d: f64 = 0.7;
        assert!((matern(&c, d) - (3.0 + 3.0 * d + d * d) * (-d).exp() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bogolyubov_default_and_custom() {
        let g = grid();
        let fam = Family::Bogolyubov { omega: 2.0, covariance: None };
        let k = base_kernel(&fam, g.clone()).unwrap();
        // Periodic: K(0, s) = K(1, s).
        for j in 0..g.len() {
            assert!((k.at(0, j) - k.at(g.last(), j)).abs() < 1e-14);
        }
        let expr = lag_covariance("cosh(2*(t-0.5))/(4*sinh(1))").unwrap();
        let custom = base_kernel(&Family::Bogolyubov { omega: 2.0, covariance: Some(expr) }, g).unwrap();
        let diff = k.values.iter().zip(&custom.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
        assert!(base_kernel(&Family::Bogolyubov { omega: -1.0, covariance: None }, grid()).is_err());
    }

    #[test]
    fn weighting() {
        let g = grid();
        let k = base_kernel(&Family::Bridge, g).unwrap();
        assert_eq!(apply_weight(&k, &Weight::unit()).values, k.values);
        let k4 = apply_weight(&k, &Weight::constant(4.0).unwrap());
        let e1 = k.operator_eigenvalues().unwrap();
        let e4 = k4.operator_eigenvalues().unwrap();
        for (a, b) in e1.iter().zip(&e4).rev().take(10) {
            assert!((4.0 * a - b).abs() < 1e-13);
        }
        let kw = apply_weight(&base_kernel(&Family::Wiener, k.grid.clone()).unwrap(), &Weight::parse("(0.5+1.5*t)^(-4)").unwrap());
        let top = *kw.operator_eigenvalues().unwrap().last().unwrap();
        assert!(top.is_finite() && top > 0.0);
    }

    #[test]
    fn csv_layout() {
        let k = base_kernel(&Family::Wiener, Grid::new(8)).unwrap();
        let csv = k.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2 + k.dim());
        assert!(lines[0].starts_with("# wiener"));
        assert_eq!(lines[1].split(',').count(), k.dim());
        let v: f64 = lines[2 + k.grid.last()].split(',').last().unwrap().parse().unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn base_kernels_are_psd() {
        for fam in [Family::Wiener, Family::Bridge, Family::OrnsteinUhlenbeck, Family::Slepian, Family::Matern(3)] {
            let k = base_kernel(&fam, grid()).unwrap();
            assert!(k.max_asymmetry() <= SYMMETRY_TOL);
            assert!(k.psd_margin().unwrap() >= -PSD_TOL, "{fam:?}");
        }
    }
}
