//! Boundary value problems whose Green functions are covariances of classical
//! processes. All systems are in normalized form.

use crate::kernels::{Family, ProcessSpec};
use crate::model::{BVProblem, BoundaryCondition, Expr, ModelError, OperatorSpec, Weight, MAX_HALF_ORDER};

/// A problem together with the factor `c` in `covariance = c · Green function`.
#[derive(Debug, Clone)]
pub struct GreenProcess {
    pub name: String,
    pub problem: BVProblem,
    pub scale: f64,
}

fn separated(n: usize, at_zero: &[usize], at_one: &[usize]) -> Result<BVProblem, ModelError> {
    let bcs = at_zero
        .iter()
        .map(|&k| BoundaryCondition::at_zero(k))
        .chain(at_one.iter().map(|&k| BoundaryCondition::at_one(k)))
        .collect();
    BVProblem::new(OperatorSpec::pure(n)?, bcs, Weight::unit())
}

/// `-y'' = μψy`, `y(0) = y'(1) = 0`.
pub fn wiener() -> Result<BVProblem, ModelError> {
    separated(1, &[0], &[1])
}

/// `-y'' = μψy`, `y(0) = y(1) = 0`.
pub fn bridge() -> Result<BVProblem, ModelError> {
    separated(1, &[0], &[0])
}

/// `-y'' + y = μψy`, `y'(0) - y(0) = 0`, `y'(1) + y(1) = 0`.
/// The covariance `e^{-|t-s|}` is twice its Green function.
pub fn ornstein_uhlenbeck() -> Result<BVProblem, ModelError> {
    let bcs = vec![
        BoundaryCondition::with_lower(1, 1.0, 0.0, vec![-1.0], vec![0.0])?,
        BoundaryCondition::with_lower(1, 0.0, 1.0, vec![0.0], vec![1.0])?,
    ];
    BVProblem::new(OperatorSpec::new(1, vec![Expr::constant(1.0)])?, bcs, Weight::unit())
}

/// `-y'' = μψy`, `y'(0) - y(0) - y(1) = 0`, `y'(1) + y(0) + y(1) = 0`.
/// The covariance `1 - |t-s|` is twice its Green function.
pub fn slepian() -> Result<BVProblem, ModelError> {
    let bcs = vec![
        BoundaryCondition::with_lower(1, 1.0, 0.0, vec![-1.0], vec![-1.0])?,
        BoundaryCondition::with_lower(1, 0.0, 1.0, vec![1.0], vec![1.0])?,
    ];
    BVProblem::new(OperatorSpec::pure(1)?, bcs, Weight::unit())
}

/// Orders of the conditions at zero for the `m`-times integrated Wiener
/// process with lower limits `betas`; the conditions at one have orders
/// `2m + 1 - k`.
pub fn integrated_wiener_orders(betas: &[u8]) -> Vec<usize> {
    let m = betas.len();
    let mut orders: Vec<usize> = betas
        .iter()
        .enumerate()
        .map(|(i, &b)| if b == 0 { m - (i + 1) } else { m + 2 + i })
        .collect();
    orders.push(m);
    orders
}

/// `(-1)^{m+1} y^{(2m+2)} = μψy` with the conditions of the `m`-times
/// integrated Wiener process.
pub fn integrated_wiener(betas: &[u8]) -> Result<BVProblem, ModelError> {
    let n = betas.len() + 1;
    if n > MAX_HALF_ORDER {
        return Err(ModelError::InvalidHalfOrder(n));
    }
    let at_zero = integrated_wiener_orders(betas);
    let at_one: Vec<usize> = at_zero.iter().map(|k| 2 * n - 1 - k).collect();
    separated(n, &at_zero, &at_one)
}

/// `-y'' + ω²y = μψy` with periodic conditions.
pub fn bogolyubov(omega: f64) -> Result<BVProblem, ModelError> {
    let bcs = vec![BoundaryCondition::new(0, 1.0, -1.0)?, BoundaryCondition::new(1, 1.0, -1.0)?];
    BVProblem::new(OperatorSpec::new(1, vec![Expr::constant(omega * omega)])?, bcs, Weight::unit())
}

/// `(-1)^n y^{(2n)}` with `y^{(k)}(0) = y^{(k)}(1)`, `k < 2n`. Not positive
/// definite; used for θ-determinant work only.
pub fn periodic_laplacian(n: usize) -> Result<BVProblem, ModelError> {
    let bcs = (0..2 * n).map(|k| BoundaryCondition::new(k, 1.0, -1.0)).collect::<Result<_, _>>()?;
    BVProblem::new(OperatorSpec::pure(n)?, bcs, Weight::unit())
}

/// Names accepted by [`green_process`].
pub const GREEN_PROCESSES: [&str; 4] = ["wiener", "bridge", "ou", "slepian"];

pub fn green_process(name: &str) -> Option<GreenProcess> {
    let (problem, scale) = match name {
        "wiener" => (wiener(), 1.0),
        "bridge" => (bridge(), 1.0),
        "ou" => (ornstein_uhlenbeck(), 2.0),
        "slepian" => (slepian(), 2.0),
        _ => return None,
    };
    Some(GreenProcess { name: name.to_string(), problem: problem.ok()?, scale })
}

/// The boundary value problem of `spec`, when it is a catalog process with
/// simple eigenvalues (periodic problems are left to the kernel route).
pub fn problem_for_spec(spec: &ProcessSpec) -> Option<GreenProcess> {
    let plain = spec.centerings == 0 && !spec.center_last;
    if !plain {
        return None;
    }
    let untransformed = spec.betas.is_empty();
    let (problem, scale) = match &spec.family {
        Family::Wiener => (integrated_wiener(&spec.betas), 1.0),
        Family::Bridge if untransformed => (bridge(), 1.0),
        Family::OrnsteinUhlenbeck if untransformed => (ornstein_uhlenbeck(), 2.0),
        Family::Slepian if untransformed => (slepian(), 2.0),
        _ => return None,
    };
    Some(GreenProcess { name: spec.family.name().to_string(), problem: problem.ok()?, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BCClass;

    #[test]
    fn integrated_wiener_orders_match_sums() {
        // κ0 = 𝒦 + m(m+1)/2 and κ1 = (m+1)(3m+2)/2 - 𝒦.
        for betas in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 1], vec![1, 0, 1]] {
            let m = betas.len();
            let k: usize = betas.iter().enumerate().map(|(i, &b)| (2 * (i + 1) + 1) * b as usize).sum();
            let p = integrated_wiener(&betas).unwrap();
            match p.classify() {
                BCClass::Separated { kappa0, kappa1, .. } => {
                    assert_eq!(kappa0, k + m * (m + 1) / 2);
                    assert_eq!(kappa1, (m + 1) * (3 * m + 2) / 2 - k);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn catalog_classes() {
        assert!(matches!(wiener().unwrap().classify(), BCClass::Separated { kappa0: 0, kappa1: 1, .. }));
        assert!(matches!(bridge().unwrap().classify(), BCClass::Separated { kappa0: 0, kappa1: 0, .. }));
        assert!(matches!(ornstein_uhlenbeck().unwrap().classify(), BCClass::Separated { kappa0: 1, kappa1: 1, .. }));
        assert!(matches!(slepian().unwrap().classify(), BCClass::Separated { kappa0: 1, kappa1: 1, .. }));
        assert_eq!(bogolyubov(1.0).unwrap().classify(), BCClass::Periodic);
        assert_eq!(periodic_laplacian(3).unwrap().classify(), BCClass::Periodic);
        assert!(green_process("nope").is_none());
        assert_eq!(green_process("ou").unwrap().scale, 2.0);
    }

    #[test]
    fn spec_problems_match_kernels() {
        use crate::kernels::{build_process, Grid};
        use crate::spectrum::{eigenvalues_shooting, top_lambdas};
        let specs = [
            ProcessSpec::new(Family::Wiener).with_betas(vec![0]),
            ProcessSpec::new(Family::Wiener).with_betas(vec![1]),
            ProcessSpec::new(Family::Wiener).with_betas(vec![1, 0]),
            ProcessSpec::new(Family::OrnsteinUhlenbeck),
            ProcessSpec::new(Family::Slepian),
        ];
        for spec in specs {
            let g = problem_for_spec(&spec).unwrap();
            assert_eq!(g.problem.n(), spec.half_order());
            let shoot = eigenvalues_shooting(&g.problem, 5).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
            let kern = build_process(&spec, Grid::new(512)).unwrap();
            let lambdas = top_lambdas(&kern, &Weight::unit(), 5).unwrap();
            for (mu, l) in shoot.mu.iter().zip(&lambdas) {
                assert!((g.scale / mu - l).abs() < 1e-7 * l, "{spec:?}: {} vs {l}", g.scale / mu);
            }
        }
        let centered = ProcessSpec::new(Family::Bridge).with_centerings(1, false);
        assert!(problem_for_spec(&centered).is_none());
        assert!(problem_for_spec(&ProcessSpec::new(Family::Bogolyubov { omega: 1.5, covariance: None })).is_none());
    }
}
