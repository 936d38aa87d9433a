//! Seeded Monte Carlo estimate of `P(Σ λ_j ξ_j² ≤ ε²)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{Method, ProbabilityEstimate, SmallBallError, TailModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOptions {
    /// Leading eigenvalues sampled with their own normal variable. The rest,
    /// and the tail model if any, enter through their mean.
    pub explicit: usize,
    /// Samples per batch; batch `b` draws from stream `b` of the seeded generator.
    pub batch: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { explicit: 128, batch: 1 << 16 }
    }
}

/// Empirical fraction with binomial standard error. `truncation` is the mean
/// contribution of the eigenvalues that were not sampled.
pub fn monte_carlo_probability(
    lambdas: &[f64],
    tail: Option<&TailModel>,
    eps: f64,
    samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<ProbabilityEstimate, SmallBallError> {
    if samples == 0 {
        return Err(SmallBallError::InvalidInput("sample count must be at least 1".into()));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(SmallBallError::InvalidInput("eigenvalues must be non-negative and finite".into()));
    }
    if !(eps > 0.0) {
        return Err(SmallBallError::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let cut = opts.explicit.min(lambdas.len());
    let sampled = &lambdas[..cut];
    let shift: f64 = lambdas[cut..].iter().sum::<f64>() + tail.map_or(0.0, |t| t.mean());
    let limit = eps * eps - shift;
    let batch = opts.batch.max(1);
    let mut hits = 0usize;
    let mut done = 0usize;
    let mut stream = 0u64;
    while done < samples {
        let size = batch.min(samples - done);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        for _ in 0..size {
            let mut q = 0.0;
            for &l in sampled {
                let z: f64 = StandardNormal.sample(&mut rng);
                q += l * z * z;
            }
            if q <= limit {
                hits += 1;
            }
        }
        done += size;
        stream += 1;
    }
    let p = hits as f64 / samples as f64;
    Ok(ProbabilityEstimate {
        p,
        log_p: p.ln(),
        err: (p * (1.0 - p) / samples as f64).sqrt(),
        method: Method::Montecarlo,
        tilt: None,
        truncation: Some(shift),
    })
}
