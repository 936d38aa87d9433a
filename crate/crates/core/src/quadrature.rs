//! Gauss–Legendre rules on `[0, 1]`.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[0, 1]`: `panels` equal panels with
/// `order` nodes each.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub panels: usize,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Reference nodes on `[0, 1]` for a single panel.
    pub ref_nodes: Vec<f64>,
    pub ref_weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(panels: usize, order: usize) -> Self {
        assert!(panels >= 1 && order >= 1);
        let (x, w) = gauss_legendre(order);
        let ref_nodes: Vec<f64> = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let ref_weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * h;
            for (u, wu) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(a + h * u);
                weights.push(h * wu);
            }
        }
        CompositeRule { panels, order, nodes, weights, ref_nodes, ref_weights }
    }

    /// Rule with `total` nodes split into panels of eight.
    pub fn with_nodes(total: usize) -> Self {
        let order = 8;
        assert!(total % order == 0 && total > 0, "node count must be a positive multiple of 8");
        CompositeRule::new(total / order, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_width(&self) -> f64 {
        1.0 / self.panels as f64
    }

    pub fn integrate_samples(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.nodes.len());
        samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| f(x) * w).sum()
    }

    pub fn half_resolution(&self) -> Option<CompositeRule> {
        (self.panels >= 2).then(|| CompositeRule::new(self.panels / 2, self.order))
    }
}

/// Quadrature result with an error estimate taken from a half-resolution
/// rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

pub fn integrate_with_estimate<F: FnMut(f64) -> f64>(rule: &CompositeRule, mut f: F) -> Estimate {
    let value = rule.integrate(&mut f);
    let err = rule
        .half_resolution()
        .map(|coarse| (coarse.integrate(&mut f) - value).abs())
        .unwrap_or(0.0);
    Estimate { value, err }
}

/// Barycentric weights for interpolation through `xs`.
pub fn barycentric_weights(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|j| {
            let prod: f64 = (0..xs.len()).filter(|&k| k != j).map(|k| xs[j] - xs[k]).product();
            1.0 / prod
        })
        .collect()
}

/// Values of the Lagrange basis polynomials through `xs` at `x`.
pub fn lagrange_basis(xs: &[f64], bw: &[f64], x: f64, out: &mut [f64]) {
    if let Some(j) = xs.iter().position(|&xj| xj == x) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[j] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for j in 0..xs.len() {
        let c = bw[j] / (x - xs[j]);
        out[j] = c;
        denom += c;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// Row vector `r` with `∫_a^b p(u) du = Σ r_j p(xs_j)` for every polynomial
/// `p` of degree `< xs.len()`.
pub fn interpolatory_integral(xs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let m = xs.len();
    let bw = barycentric_weights(xs);
    let (gx, gw) = gauss_legendre(m.max(1));
    let mut row = vec![0.0; m];
    let mut basis = vec![0.0; m];
    let half = 0.5 * (b - a);
    for (g, w) in gx.iter().zip(&gw) {
        let u = a + half * (g + 1.0);
        lagrange_basis(xs, &bw, u, &mut basis);
        for j in 0..m {
            row[j] += half * w * basis[j];
        }
    }
    row
}
