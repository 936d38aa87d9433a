//! Operators, boundary conditions and weights.

pub mod expr;
mod weight;

use thiserror::Error;

pub use expr::{parse_expression, Expr, ExprError};
pub use weight::{
    model_rule, normalization_integral, normalize_weight, Weight, MODEL_GRID_NODES, WEIGHT_FLOOR,
};

/// Largest supported half-order.
pub const MAX_HALF_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("weight must stay above {floor:e} on [0, 1]; minimum sample is {min:e}", floor = WEIGHT_FLOOR)]
    WeightNotPositive { min: f64 },
    #[error("half-order n must satisfy 1 <= n <= {MAX_HALF_ORDER}, got {0}")]
    InvalidHalfOrder(usize),
    #[error("operator of half-order {n} needs {n} coefficients, got {got}")]
    CoefficientCount { n: usize, got: usize },
    #[error("problem of half-order {n} needs {} boundary conditions, got {got}", 2 * n)]
    ConditionCount { n: usize, got: usize },
    #[error("boundary condition order {k} exceeds 2n-1 = {max}")]
    ConditionOrder { k: usize, max: usize },
    #[error("boundary condition of order {0} has both leading coefficients zero")]
    ZeroLeading(usize),
    #[error("lower-order coefficient arrays must have length {expected}, got {got}")]
    LowerLength { expected: usize, got: usize },
}

/// `U(v) = α v^{(k)}(0) + Σ_{j<k} α_j v^{(j)}(0) + γ v^{(k)}(1) + Σ_{j<k} γ_j v^{(j)}(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pub k: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub alpha_lower: Vec<f64>,
    pub gamma_lower: Vec<f64>,
}

impl BoundaryCondition {
    pub fn new(k: usize, alpha: f64, gamma: f64) -> Result<Self, ModelError> {
        Self::with_lower(k, alpha, gamma, vec![0.0; k], vec![0.0; k])
    }

    pub fn with_lower(
        k: usize,
        alpha: f64,
        gamma: f64,
        alpha_lower: Vec<f64>,
        gamma_lower: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if alpha == 0.0 && gamma == 0.0 {
            return Err(ModelError::ZeroLeading(k));
        }
        for len in [alpha_lower.len(), gamma_lower.len()] {
            if len != k {
                return Err(ModelError::LowerLength { expected: k, got: len });
            }
        }
        Ok(BoundaryCondition { k, alpha, gamma, alpha_lower, gamma_lower })
    }

    /// `v^{(k)}(0) = 0`.
    pub fn at_zero(k: usize) -> Self {
        Self::new(k, 1.0, 0.0).expect("valid")
    }

    /// `v^{(k)}(1) = 0`.
    pub fn at_one(k: usize) -> Self {
        Self::new(k, 0.0, 1.0).expect("valid")
    }

    /// Coefficient of `v^{(j)}(0)`.
    pub fn coeff_at_zero(&self, j: usize) -> f64 {
        match j.cmp(&self.k) {
            std::cmp::Ordering::Less => self.alpha_lower[j],
            std::cmp::Ordering::Equal => self.alpha,
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    /// Coefficient of `v^{(j)}(1)`.
    pub fn coeff_at_one(&self, j: usize) -> f64 {
        match j.cmp(&self.k) {
            std::cmp::Ordering::Less => self.gamma_lower[j],
            std::cmp::Ordering::Equal => self.gamma,
            std::cmp::Ordering::Greater => 0.0,
        }
    }
}

/// `Lv = (-1)^n v^{(2n)} + Σ_m (p_m v^{(m)})^{(m)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub n: usize,
    pub p: Vec<Expr>,
}

impl OperatorSpec {
    pub fn new(n: usize, p: Vec<Expr>) -> Result<Self, ModelError> {
        if n == 0 || n > MAX_HALF_ORDER {
            return Err(ModelError::InvalidHalfOrder(n));
        }
        if p.len() != n {
            return Err(ModelError::CoefficientCount { n, got: p.len() });
        }
        Ok(OperatorSpec { n, p })
    }

    /// `(-1)^n v^{(2n)}` with all lower coefficients zero.
    pub fn pure(n: usize) -> Result<Self, ModelError> {
        Self::new(n, vec![Expr::constant(0.0); n])
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }
}

/// Eigenvalue problem `Ly = μψy`, `U_ν(y) = 0`.
#[derive(Debug, Clone)]
pub struct BVProblem {
    pub op: OperatorSpec,
    pub bcs: Vec<BoundaryCondition>,
    pub weight: Weight,
}

impl BVProblem {
    pub fn new(op: OperatorSpec, bcs: Vec<BoundaryCondition>, weight: Weight) -> Result<Self, ModelError> {
        let n = op.n;
        if bcs.len() != 2 * n {
            return Err(ModelError::ConditionCount { n, got: bcs.len() });
        }
        if let Some(bc) = bcs.iter().find(|bc| bc.k > 2 * n - 1) {
            return Err(ModelError::ConditionOrder { k: bc.k, max: 2 * n - 1 });
        }
        Ok(BVProblem { op, bcs, weight })
    }

    pub fn n(&self) -> usize {
        self.op.n
    }

    pub fn with_weight(&self, weight: Weight) -> BVProblem {
        BVProblem { op: self.op.clone(), bcs: self.bcs.clone(), weight }
    }

    pub fn classify(&self) -> BCClass {
        classify_boundary_conditions(self.n(), &self.bcs)
    }
}

/// Shape of the leading terms of a boundary-condition system.
#[derive(Debug, Clone, PartialEq)]
pub enum BCClass {
    Separated {
        kappa0: usize,
        kappa1: usize,
        orders0: Vec<usize>,
        orders1: Vec<usize>,
    },
    OneNonSeparatedPair {
        ell: usize,
        a: f64,
        b: f64,
        kappa0: usize,
        kappa1: usize,
        orders0: Vec<usize>,
        orders1: Vec<usize>,
    },
    Periodic,
    General,
}

impl BCClass {
    pub fn name(&self) -> &'static str {
        match self {
            BCClass::Separated { .. } => "separated",
            BCClass::OneNonSeparatedPair { .. } => "one-nonseparated-pair",
            BCClass::Periodic => "periodic",
            BCClass::General => "general",
        }
    }
}

fn nearly_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

/// Classifies by leading coefficients only; the result does not depend on
/// the order of `bcs`.
pub fn classify_boundary_conditions(n: usize, bcs: &[BoundaryCondition]) -> BCClass {
    if bcs.len() != 2 * n {
        return BCClass::General;
    }
    let mut zero_side = Vec::new();
    let mut one_side = Vec::new();
    let mut mixed = Vec::new();
    for bc in bcs {
        match (bc.alpha != 0.0, bc.gamma != 0.0) {
            (true, false) => zero_side.push(bc.k),
            (false, true) => one_side.push(bc.k),
            (true, true) => mixed.push(bc),
            (false, false) => return BCClass::General,
        }
    }
    zero_side.sort_unstable();
    one_side.sort_unstable();

    if mixed.len() == 2 * n {
        let mut orders: Vec<usize> = mixed.iter().map(|bc| bc.k).collect();
        orders.sort_unstable();
        let template = orders.iter().enumerate().all(|(i, &k)| i == k);
        if template && mixed.iter().all(|bc| nearly_equal(bc.alpha, -bc.gamma)) {
            return BCClass::Periodic;
        }
    }

    if mixed.is_empty() {
        return BCClass::Separated {
            kappa0: zero_side.iter().sum(),
            kappa1: one_side.iter().sum(),
            orders0: zero_side,
            orders1: one_side,
        };
    }

    if mixed.len() == 2 && zero_side.len() == n - 1 && one_side.len() == n - 1 {
        let (first, second) = if mixed[0].k <= mixed[1].k {
            (mixed[0], mixed[1])
        } else {
            (mixed[1], mixed[0])
        };
        let ell = first.k;
        let partner = 2 * n - ell - 1;
        let cross = first.alpha * second.alpha;
        let straight = first.gamma * second.gamma;
        let excluded = |k: &usize| *k == ell || *k == partner;
        if second.k == partner
            && (cross - straight).abs() <= 1e-12 * (cross.abs() + straight.abs())
            && !zero_side.iter().any(excluded)
            && !one_side.iter().any(excluded)
        {
            return BCClass::OneNonSeparatedPair {
                ell,
                a: first.alpha,
                b: first.gamma,
                kappa0: zero_side.iter().sum(),
                kappa1: one_side.iter().sum(),
                orders0: zero_side,
                orders1: one_side,
            };
        }
    }
    BCClass::General
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bc(k: usize, a: f64, g: f64) -> BoundaryCondition {
        BoundaryCondition::new(k, a, g).unwrap()
    }

    #[test]
    fn wiener_is_separated() {
        let class = classify_boundary_conditions(1, &[BoundaryCondition::at_zero(0), BoundaryCondition::at_one(1)]);
        assert_eq!(
            class,
            BCClass::Separated { kappa0: 0, kappa1: 1, orders0: vec![0], orders1: vec![1] }
        );
    }

    #[test]
    fn periodic_template() {
        let class = classify_boundary_conditions(1, &[bc(0, 1.0, -1.0), bc(1, 1.0, -1.0)]);
        assert_eq!(class, BCClass::Periodic);
        let bcs: Vec<_> = (0..4).map(|k| bc(k, -2.0, 2.0)).collect();
        assert_eq!(classify_boundary_conditions(2, &bcs), BCClass::Periodic);
    }

    #[test]
    fn one_pair_template() {
        let class = classify_boundary_conditions(1, &[bc(0, 2.0, 1.0), bc(1, 1.0, 2.0)]);
        assert_eq!(
            class,
            BCClass::OneNonSeparatedPair {
                ell: 0,
                a: 2.0,
                b: 1.0,
                kappa0: 0,
                kappa1: 0,
                orders0: vec![],
                orders1: vec![]
            }
        );
        // Second row may be any multiple of (b, a).
        let class = classify_boundary_conditions(1, &[bc(1, 3.0, 6.0), bc(0, 2.0, 1.0)]);
        assert!(matches!(class, BCClass::OneNonSeparatedPair { ell: 0, .. }));
    }

    #[test]
    fn falls_to_general() {
        // Pair not cross-matched.
        assert_eq!(classify_boundary_conditions(1, &[bc(0, 2.0, 1.0), bc(1, 2.0, 1.0)]), BCClass::General);
        // Pair orders do not add to 2n - 1.
        let bcs = [bc(0, 1.0, 1.0), bc(0, 1.0, 1.0), bc(1, 1.0, 0.0), bc(3, 0.0, 1.0)];
        assert_eq!(classify_boundary_conditions(2, &bcs), BCClass::General);
        // Separated order collides with the pair.
        let bcs = [bc(1, 1.0, 1.0), bc(2, 1.0, 1.0), bc(1, 1.0, 0.0), bc(3, 0.0, 1.0)];
        assert_eq!(classify_boundary_conditions(2, &bcs), BCClass::General);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(BoundaryCondition::new(1, 0.0, 0.0), Err(ModelError::ZeroLeading(1)));
        assert!(OperatorSpec::new(0, vec![]).is_err());
        assert!(OperatorSpec::new(2, vec![Expr::constant(0.0)]).is_err());
        let op = OperatorSpec::pure(1).unwrap();
        assert!(BVProblem::new(op.clone(), vec![BoundaryCondition::at_zero(0)], Weight::unit()).is_err());
        assert!(BVProblem::new(op, vec![BoundaryCondition::at_zero(0), BoundaryCondition::at_one(2)], Weight::unit()).is_err());
    }

    fn arb_system() -> impl Strategy<Value = (usize, Vec<BoundaryCondition>)> {
        (1usize..=3).prop_flat_map(|n| {
            let row = (0..2 * n, -2i32..=2, -2i32..=2).prop_filter_map("non-zero leading", |(k, a, g)| {
                BoundaryCondition::new(k, a as f64, g as f64).ok()
            });
            (Just(n), prop::collection::vec(row, 2 * n))
        })
    }

    proptest! {
        #[test]
        fn classification_is_permutation_invariant(
            (n, bcs) in arb_system(),
            seed in any::<u64>(),
        ) {
            let base = classify_boundary_conditions(n, &bcs);
            let mut shuffled = bcs.clone();
            // Deterministic Fisher–Yates from the seed.
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(classify_boundary_conditions(n, &shuffled), base);
        }
    }
}
