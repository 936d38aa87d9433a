//! Nyström discretization of `λ f(t) = ∫ G(t,s) √(ψ(t)ψ(s)) f(s) ds`.

use std::sync::Arc;

use faer::{Mat, Side};

use super::{Method, SpectrumError, SpectrumResult};
use crate::kernels::{apply_weight, Grid, Kernel, KernelError};
use crate::quadrature::{barycentric_weights, gauss_legendre, lagrange_basis};
use crate::model::{normalization_integral, Weight};

/// Default number of quadrature nodes.
pub const DEFAULT_GRID: usize = 1024;

/// Largest admissible relative eigenvalue shift between a grid and its half.
pub const GRID_SHIFT_TOL: f64 = 1e-4;

/// Symmetric matrix `W^{-1/2} B W^{-1/2}` over the interior nodes, where
/// `B_ij = ∫∫ L_i(t) K(t,s) ψ-weighted L_j(s)` for the panel Lagrange basis.
/// Off the diagonal panel blocks this is `√(w_i ψ_i) K_ij √(w_j ψ_j)`; on them
/// the inner integral is split at `t_i` so the diagonal kink of `K` does not
/// limit the quadrature order.
pub fn nystrom_matrix(kern: &Kernel, w: &Weight) -> Mat<f64> {
    let kw = apply_weight(kern, w);
    let g = &kw.grid;
    let m = g.interior_len();
    let sw: Vec<f64> = g.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = Mat::from_fn(m, m, |i, j| sw[i + 1] * kw.at(i + 1, j + 1) * sw[j + 1]);
    let order = g.rule.order;
    for p in 0..g.rule.panels {
        let start = 1 + p * order;
        let c = diagonal_block(&kw, start);
        for r in 0..order {
            for q in 0..order {
                let (i, j) = (start + r, start + q);
                let bij = g.weights[i] * c[r * order + q];
                let bji = g.weights[j] * c[q * order + r];
                a[(i - 1, j - 1)] = 0.5 * (bij + bji) / (sw[i] * sw[j]);
            }
        }
    }
    a
}

/// `c[r][q] = ∫_panel K(t_r, s) L_q(s) ds` for the panel starting at grid
/// index `start`, with `K(t_r, ·)` interpolated one-sidedly on each side of
/// `t_r`.
fn diagonal_block(k: &Kernel, start: usize) -> Vec<f64> {
    let g = &k.grid;
    let order = g.rule.order;
    let last = g.last();
    let x = &g.nodes;
    let h = g.rule.panel_width();
    let p = (start - 1) / order;
    let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
    let px = &x[start..start + order];
    let pbw = barycentric_weights(px);
    let (gx, gw) = gauss_legendre(2 * order);
    let mut c = vec![0.0; order * order];
    let mut basis = vec![0.0; order];
    let mut side = vec![0.0; order];
    for r in 0..order {
        let i = start + r;
        let ti = x[i];
        let left: Vec<usize> = (i.saturating_sub(order - 1)..=i).collect();
        let right: Vec<usize> = (i..=(i + order - 1).min(last)).collect();
        for (lo, hi, ids) in [(a, ti, &left), (ti, b, &right)] {
            if hi <= lo {
                continue;
            }
            let sx: Vec<f64> = ids.iter().map(|&j| x[j]).collect();
            let sbw = barycentric_weights(&sx);
            let half = 0.5 * (hi - lo);
            for (u, wq) in gx.iter().zip(&gw) {
                let s = lo + half * (u + 1.0);
                lagrange_basis(&sx, &sbw, s, &mut side[..sx.len()]);
                let kv: f64 = ids.iter().zip(&side).map(|(&j, l)| l * k.at(i, j)).sum();
                lagrange_basis(px, &pbw, s, &mut basis);
                for q in 0..order {
                    c[r * order + q] += half * wq * kv * basis[q];
                }
            }
        }
    }
    c
}

/// Non-symmetric form `B W^{-1}` of [`nystrom_matrix`]; it is similar to the
/// symmetric one and has the same eigenvalues.
pub fn nystrom_matrix_right(kern: &Kernel, w: &Weight) -> Mat<f64> {
    let a = nystrom_matrix(kern, w);
    let g = &kern.grid;
    let m = g.interior_len();
    Mat::from_fn(m, m, |i, j| a[(i, j)] * (g.weights[i + 1] / g.weights[j + 1]).sqrt())
}

/// The `count` largest eigenvalues of the weighted operator, descending.
pub fn top_lambdas(kern: &Kernel, w: &Weight, count: usize) -> Result<Vec<f64>, SpectrumError> {
    let a = nystrom_matrix(kern, w);
    let ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| SpectrumError::Kernel(KernelError::Eigen(format!("{e:?}"))))?;
    Ok(ev.iter().rev().take(count).copied().collect())
}

/// `μ_k = 1/λ_k` for the `count` largest eigenvalues of the kernel produced by
/// `source` on a grid of `grid` nodes, with errors from the half-size grid.
/// `half_order` only determines the reported `ϑ = ∫ψ^{1/(2n)}`.
pub fn nystrom_eigenvalues<S>(
    source: S,
    w: &Weight,
    count: usize,
    grid: usize,
    half_order: usize,
) -> Result<SpectrumResult, SpectrumError>
where
    S: Fn(Arc<Grid>) -> Result<Kernel, KernelError>,
{
    if count == 0 {
        return Err(SpectrumError::ZeroCount);
    }
    if grid < 8 * count || grid % 16 != 0 {
        return Err(SpectrumError::GridTooSmall { grid, count });
    }
    let fine = top_lambdas(&source(Grid::new(grid))?, w, count)?;
    let coarse = top_lambdas(&source(Grid::new(grid / 2))?, w, count)?;
    let mut err = Vec::with_capacity(count);
    for (k, (f, c)) in fine.iter().zip(&coarse).enumerate() {
        if !(*f > 0.0) {
            return Err(SpectrumError::NotPositive(*f));
        }
        let shift = ((f - c) / f).abs();
        if shift > GRID_SHIFT_TOL {
            return Err(SpectrumError::GridTooCoarse { k: k + 1, shift });
        }
        err.push(shift);
    }
    Ok(SpectrumResult {
        mu: fine.iter().map(|l| 1.0 / l).collect(),
        err,
        method: Method::Nystrom,
        theta_norm: normalization_integral(w, half_order.max(1)).value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{base_kernel, Family};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn wiener_and_bridge() {
        let w = Weight::unit();
        let s = nystrom_eigenvalues(|g| base_kernel(&Family::Wiener, g), &w, 10, DEFAULT_GRID, 1).unwrap();
        for (k, mu) in s.mu.iter().enumerate() {
            assert!(rel(*mu, ((k as f64 + 0.5) * PI).powi(2)) < 1e-6, "k = {k}: {}", rel(*mu, ((k as f64 + 0.5) * PI).powi(2)));
        }
        let s = nystrom_eigenvalues(|g| base_kernel(&Family::Bridge, g), &w, 10, DEFAULT_GRID, 1).unwrap();
        for (k, mu) in s.mu.iter().enumerate() {
            assert!(rel(*mu, ((k + 1) as f64 * PI).powi(2)) < 1e-6);
        }
        assert_eq!(s.method, Method::Nystrom);
        assert!(s.err.iter().all(|e| *e < 1e-4));
    }

    #[test]
    fn assembly_order_invariance() {
        let g = Grid::new(256);
        let w = Weight::parse("(0.5+1.5*t)^(-4)").unwrap();
        let k = base_kernel(&Family::OrnsteinUhlenbeck, g).unwrap();
        let a = top_lambdas(&k, &w, 30).unwrap();
        let mut b: Vec<f64> = nystrom_matrix_right(&k, &w).eigenvalues().unwrap().iter().map(|z| z.re).collect();
        b.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * a[0], "{x} {y}");
        }
    }

    #[test]
    fn kink_correction_beats_plain_rule() {
        let g = Grid::new(256);
        let k = base_kernel(&Family::Wiener, g).unwrap();
        let plain = k.operator_eigenvalues().unwrap();
        let corrected = top_lambdas(&k, &Weight::unit(), 5).unwrap();
        for j in 0..5 {
            let exact = 1.0 / ((j as f64 + 0.5) * PI).powi(2);
            let e_plain = rel(plain[plain.len() - 1 - j], exact);
            assert!(rel(corrected[j], exact) < 1e-3 * e_plain);
        }
    }

    #[test]
    fn rejects_small_grid() {
        let r = nystrom_eigenvalues(|g| base_kernel(&Family::Wiener, g), &Weight::unit(), 20, 128, 1);
        assert!(matches!(r, Err(SpectrumError::GridTooSmall { .. })));
    }
}
