use std::sync::{Arc, OnceLock};

use super::expr::{Expr, ExprError};
use super::ModelError;
use crate::quadrature::{CompositeRule, Estimate};

/// Smallest admissible weight sample.
pub const WEIGHT_FLOOR: f64 = 1e-10;

/// Nodes of the shared model quadrature grid.
pub const MODEL_GRID_NODES: usize = 2048;

/// Relative agreement required between the cached endpoint values and the
/// expression evaluated at the endpoints.
const ENDPOINT_TOL: f64 = 1e-12;

pub fn model_rule() -> Arc<CompositeRule> {
    static RULE: OnceLock<Arc<CompositeRule>> = OnceLock::new();
    RULE.get_or_init(|| Arc::new(CompositeRule::with_nodes(MODEL_GRID_NODES))).clone()
}

/// Positive weight function on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Weight {
    expr: Expr,
    samples: Vec<f64>,
    psi0: f64,
    psi1: f64,
    smoothness_order: u32,
    rule: Arc<CompositeRule>,
}

impl Weight {
    pub fn parse(text: &str) -> Result<Weight, ModelError> {
        Weight::new(Expr::parse(text)?)
    }

    pub fn constant(value: f64) -> Result<Weight, ModelError> {
        Weight::new(Expr::constant(value))
    }

    /// Unit weight.
    pub fn unit() -> Weight {
        Weight::constant(1.0).expect("unit weight is valid")
    }

    pub fn new(expr: Expr) -> Result<Weight, ModelError> {
        Weight::with_smoothness(expr, u32::MAX)
    }

    /// `smoothness_order` is the declared `m` with `ψ ∈ W_∞^m`. It is recorded
    /// but cannot be verified.
    pub fn with_smoothness(expr: Expr, smoothness_order: u32) -> Result<Weight, ModelError> {
        let rule = model_rule();
        let samples = rule
            .nodes
            .iter()
            .map(|&t| expr.eval(t))
            .collect::<Result<Vec<f64>, ExprError>>()?;
        let psi0 = expr.eval(0.0)?;
        let psi1 = expr.eval(1.0)?;
        let min = samples.iter().copied().chain([psi0, psi1]).fold(f64::INFINITY, f64::min);
        if !(min >= WEIGHT_FLOOR) {
            return Err(ModelError::WeightNotPositive { min });
        }
        let w = Weight { expr, samples, psi0, psi1, smoothness_order, rule };
        debug_assert!(w.endpoints_consistent());
        Ok(w)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn psi1(&self) -> f64 {
        self.psi1
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.psi0, self.psi1)
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    pub fn rule(&self) -> &CompositeRule {
        &self.rule
    }

    /// `ψ(t)` without domain checks. Valid for `t ∈ [0, 1]` because
    /// construction evaluated the expression on a dense grid.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.expr.eval_unchecked(t)
    }

    pub fn is_constant(&self) -> bool {
        self.expr.is_constant()
    }

    pub fn scaled(&self, c: f64) -> Result<Weight, ModelError> {
        if c == 1.0 {
            return Ok(self.clone());
        }
        Weight::with_smoothness(self.expr.scaled(c), self.smoothness_order)
    }

    fn endpoints_consistent(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= ENDPOINT_TOL * a.abs().max(b.abs());
        close(self.psi0, self.eval(0.0)) && close(self.psi1, self.eval(1.0))
    }
}

/// `ϑ = ∫₀¹ ψ^{1/(2n)}` on the model grid, with the half-resolution error
/// estimate.
pub fn normalization_integral(w: &Weight, n: usize) -> Estimate {
    assert!(n >= 1);
    let p = 1.0 / (2 * n) as f64;
    let rule = w.rule();
    let value: f64 = w.samples.iter().zip(&rule.weights).map(|(s, wt)| s.powf(p) * wt).sum();
    let err = rule
        .half_resolution()
        .map(|coarse| (coarse.integrate(|t| w.eval(t).powf(p)) - value).abs())
        .unwrap_or(0.0);
    Estimate { value, err }
}

/// Rescales `ψ` to `c·ψ` with `∫(cψ)^{1/(2n)} = 1`, returning `c = ϑ^{-2n}`.
/// Norms map as `‖X‖_{cψ} = √c ‖X‖_ψ`.
pub fn normalize_weight(w: &Weight, n: usize) -> Result<(Weight, f64), ModelError> {
    let theta = normalization_integral(w, n).value;
    let c = theta.powi(-(2 * n as i32));
    if (c - 1.0).abs() <= 1e-14 {
        return Ok((w.clone(), 1.0));
    }
    Ok((w.scaled(c)?, c))
}
