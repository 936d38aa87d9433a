use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::transforms::{center_kernel, condition_kernel, integrate_columns, integrate_kernel, integrate_rows, Conditioning};
use super::{base_kernel, Grid, Kernel, KernelError};
use crate::model::Expr;

/// Base process of a [`ProcessSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Wiener,
    Bridge,
    /// `m`-times integrated Wiener process conditioned on `W_j(1) = 0`, `j ≤ m`.
    ConditionalIntegratedWiener(usize),
    OrnsteinUhlenbeck,
    Slepian,
    Matern(usize),
    /// `covariance` is a function of the lag `|t − s|` written in `t`; `None`
    /// selects `cosh(ω(|t−s|−1/2)) / (2ω sinh(ω/2))`.
    Bogolyubov { omega: f64, covariance: Option<Expr> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Wiener => "wiener",
            Family::Bridge => "bridge",
            Family::ConditionalIntegratedWiener(_) => "conditional-wiener",
            Family::OrnsteinUhlenbeck => "ou",
            Family::Slepian => "slepian",
            Family::Matern(_) => "matern",
            Family::Bogolyubov { .. } => "bogolyubov",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::ConditionalIntegratedWiener(m) => write!(f, "conditional-wiener({m})"),
            Family::Matern(n) => write!(f, "matern({n})"),
            Family::Bogolyubov { omega, .. } => write!(f, "bogolyubov({omega})"),
            other => f.write_str(other.name()),
        }
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A base process followed by `centerings` rounds of center-then-integrate,
/// then one integration per entry of `betas` (lower limit 0 or 1), then an
/// optional final centering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessSpec {
    pub family: Family,
    pub betas: Vec<u8>,
    pub centerings: usize,
    pub center_last: bool,
}

impl ProcessSpec {
    pub fn new(family: Family) -> Self {
        ProcessSpec { family, betas: Vec::new(), centerings: 0, center_last: false }
    }

    pub fn with_betas(mut self, betas: Vec<u8>) -> Self {
        self.betas = betas;
        self
    }

    pub fn with_centerings(mut self, centerings: usize, center_last: bool) -> Self {
        self.centerings = centerings;
        self.center_last = center_last;
        self
    }

    pub fn m(&self) -> usize {
        self.betas.len()
    }

    /// Half the order of the differential operator whose Green function is
    /// the covariance; eigenvalues decay like `k^{-2n}`.
    pub fn half_order(&self) -> usize {
        let base = match &self.family {
            Family::ConditionalIntegratedWiener(m) => m + 1,
            Family::Matern(n) => *n,
            _ => 1,
        };
        base + self.centerings + self.betas.len()
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if self.betas.iter().any(|&b| b > 1) {
            return Err(KernelError::InvalidSpec("every β must be 0 or 1".into()));
        }
        match &self.family {
            Family::Matern(0) => Err(KernelError::InvalidSpec("Matérn order must be at least 1".into())),
            Family::Bogolyubov { omega, .. } if !(*omega > 0.0) => {
                Err(KernelError::InvalidSpec(format!("Bogolyubov ω must be positive, got {omega}")))
            }
            _ => Ok(()),
        }
    }
}

/// Covariance of `W_m` conditioned on `W_j(1) = 0` for `j = 0..=m`.
fn conditional_integrated_wiener(m: usize, grid: Arc<Grid>) -> Result<Kernel, KernelError> {
    let base = base_kernel(&super::Family::Wiener, grid)?;
    let last = base.grid.last();
    // mixed[a][b] = Cov(W_a(t), W_b(s)).
    let mut by_t = vec![base];
    for a in 1..=m {
        by_t.push(integrate_columns(&by_t[a - 1], 0)?);
    }
    let mut mixed: Vec<Vec<Kernel>> = Vec::with_capacity(m + 1);
    for row in by_t {
        let mut rows = vec![row];
        for b in 1..=m {
            rows.push(integrate_rows(&rows[b - 1], 0)?);
        }
        mixed.push(rows);
    }
    let mut target = mixed[m][m].clone();
    target.symmetrize();
    let cross = (0..=m).map(|b| (0..target.dim()).map(|i| mixed[m][b].at(i, last)).collect()).collect();
    let gram = (0..=m).map(|a| (0..=m).map(|b| mixed[a][b].at(last, last)).collect()).collect();
    let mut out = condition_kernel(&target, &Conditioning { cross, gram })?;
    out.label = format!("conditional-wiener({m})");
    Ok(out)
}

/// Applies the transform chain of `spec` to its base covariance.
pub fn build_process(spec: &ProcessSpec, grid: Arc<Grid>) -> Result<Kernel, KernelError> {
    spec.validate()?;
    let mut k = match &spec.family {
        Family::ConditionalIntegratedWiener(m) => conditional_integrated_wiener(*m, grid)?,
        family => base_kernel(family, grid)?,
    };
    for _ in 0..spec.centerings {
        k = integrate_kernel(&center_kernel(&k), 0)?;
    }
    for &b in &spec.betas {
        k = integrate_kernel(&k, b)?;
    }
    if spec.center_last {
        k = center_kernel(&k);
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_integrated() {
        let g = Grid::new(128);
        let w = build_process(&ProcessSpec::new(Family::Wiener), g.clone()).unwrap();
        assert_eq!(w.at(3, 9), g.nodes[3].min(g.nodes[9]));
        let w1 = build_process(&ProcessSpec::new(Family::Wiener).with_betas(vec![1]), g.clone()).unwrap();
        assert!((w1.at(0, 0) - 1.0 / 3.0).abs() < 1e-13);
        assert!(build_process(&ProcessSpec::new(Family::Wiener).with_betas(vec![2]), g).is_err());
    }

    #[test]
    fn centered_integrated_bridge_is_psd() {
        let g = Grid::new(128);
        let spec = ProcessSpec::new(Family::Bridge).with_centerings(1, false);
        let k = build_process(&spec, g).unwrap();
        assert!(k.psd_margin().unwrap() >= -1e-10);
        assert!(k.at(0, 0).abs() < 1e-15);
        // B_{1}(1) = ∫ B̄ = 0.
        let l = k.grid.last();
        assert!(k.at(l, l).abs() < 1e-11, "{:e}", k.at(l, l));
    }

    #[test]
    fn conditional_integrated_wiener() {
        let g = Grid::new(128);
        let k = build_process(&ProcessSpec::new(Family::ConditionalIntegratedWiener(1)), g.clone()).unwrap();
        let l = g.last();
        assert!(k.at(l, l).abs() < 1e-12);
        assert!(k.psd_margin().unwrap() >= -1e-10);
        // 𝔹_0 is the bridge.
        let b0 = build_process(&ProcessSpec::new(Family::ConditionalIntegratedWiener(0)), g.clone()).unwrap();
        let br = build_process(&ProcessSpec::new(Family::Bridge), g).unwrap();
        let diff = b0.values.iter().zip(&br.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}
