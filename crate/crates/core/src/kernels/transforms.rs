use faer::{Mat, Side};

use super::{Grid, Kernel, KernelError};
use crate::quadrature::interpolatory_integral;

/// Largest admissible condition number of a conditioning Gram matrix.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `∫_0^{t_i} f` at every grid node. `f` may have a derivative jump at node
/// `kink`; the panel containing it is split there and each side is
/// interpolated from nodes on that side only.
pub fn cumulative_integral(grid: &Grid, f: &[f64], kink: Option<usize>) -> Vec<f64> {
    let rule = &grid.rule;
    let order = rule.order;
    let h = rule.panel_width();
    let last = grid.last();
    let partial = panel_partials(grid);
    let mut out = vec![0.0; grid.len()];
    let mut prefix = 0.0;
    let kink = kink.filter(|&k| k > 0 && k < last);
    for p in 0..rule.panels {
        let start = 1 + p * order;
        let idx = start..start + order;
        let a = p as f64 * h;
        if let Some(k) = kink.filter(|k| idx.contains(k)) {
            let x = &grid.nodes;
            let tk = x[k];
            let left: Vec<usize> = (k.saturating_sub(order - 1)..=k).collect();
            let right: Vec<usize> = (k..=(k + order - 1).min(last)).collect();
            let lx: Vec<f64> = left.iter().map(|&i| x[i]).collect();
            let rx: Vec<f64> = right.iter().map(|&i| x[i]).collect();
            let dot = |w: Vec<f64>, ids: &[usize]| -> f64 { w.iter().zip(ids).map(|(w, &i)| w * f[i]).sum() };
            let to_kink = dot(interpolatory_integral(&lx, a, tk), &left);
            for i in idx.clone() {
                out[i] = prefix
                    + if i <= k {
                        dot(interpolatory_integral(&lx, a, x[i]), &left)
                    } else {
                        to_kink + dot(interpolatory_integral(&rx, tk, x[i]), &right)
                    };
            }
            prefix += to_kink + dot(interpolatory_integral(&rx, tk, a + h), &right);
        } else {
            let fp = &f[idx.clone()];
            for (r, i) in idx.enumerate() {
                let row = &partial[r * order..(r + 1) * order];
                out[i] = prefix + h * row.iter().zip(fp).map(|(w, v)| w * v).sum::<f64>();
            }
            prefix += h * rule.ref_weights.iter().zip(fp).map(|(w, v)| w * v).sum::<f64>();
        }
    }
    out[last] = prefix;
    out
}

/// `P[i][l] = ∫_0^{x_i} L_l` on the reference panel.
fn panel_partials(grid: &Grid) -> Vec<f64> {
    let r = &grid.rule.ref_nodes;
    r.iter().flat_map(|&x| interpolatory_integral(r, 0.0, x)).collect()
}

fn check_beta(beta: u8) -> Result<(), KernelError> {
    if beta > 1 {
        return Err(KernelError::InvalidSpec(format!("lower limit must be 0 or 1, got {beta}")));
    }
    Ok(())
}

/// Integrates every column in the first variable: `∫_β^{t} K(u, s) du`.
/// The result is in general not symmetric.
pub fn integrate_columns(k: &Kernel, beta: u8) -> Result<Kernel, KernelError> {
    check_beta(beta)?;
    let n = k.dim();
    let mut values = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = k.values[i * n + j];
        }
        let c = cumulative_integral(&k.grid, &col, Some(j));
        let base = if beta == 1 { c[n - 1] } else { 0.0 };
        for i in 0..n {
            values[i * n + j] = c[i] - base;
        }
    }
    Ok(Kernel { grid: k.grid.clone(), values, label: format!("{}|int_t({beta})", k.label) })
}

/// Integrates every row in the second variable: `∫_β^{s} K(t, v) dv`.
pub fn integrate_rows(k: &Kernel, beta: u8) -> Result<Kernel, KernelError> {
    check_beta(beta)?;
    let n = k.dim();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let c = cumulative_integral(&k.grid, &k.values[i * n..(i + 1) * n], Some(i));
        let base = if beta == 1 { c[n - 1] } else { 0.0 };
        for j in 0..n {
            values[i * n + j] = c[j] - base;
        }
    }
    Ok(Kernel { grid: k.grid.clone(), values, label: format!("{}|int_s({beta})", k.label) })
}

/// Covariance of `∫_β^t X`: `K'(t, s) = ∫_β^t ∫_β^s K(u, v) dv du`.
pub fn integrate_kernel(k: &Kernel, beta: u8) -> Result<Kernel, KernelError> {
    let mut out = integrate_rows(&integrate_columns(k, beta)?, beta)?;
    out.symmetrize();
    out.label = format!("{}|int({beta})", k.label);
    Ok(out)
}

/// Covariance of `X − ∫_0^1 X`.
pub fn center_kernel(k: &Kernel) -> Kernel {
    let n = k.dim();
    let g = &k.grid;
    let row_int: Vec<f64> = (0..n)
        .map(|i| cumulative_integral(g, &k.values[i * n..(i + 1) * n], Some(i))[n - 1])
        .collect();
    let total: f64 = row_int.iter().zip(&g.weights).map(|(r, w)| r * w).sum();
    let mut values = k.values.clone();
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] += total - row_int[i] - row_int[j];
        }
    }
    let mut out = Kernel { grid: k.grid.clone(), values, label: format!("{}|center", k.label) };
    out.symmetrize();
    out
}

/// Linear functionals `F_a` of the process: `cross[a][i] = Cov(X(t_i), F_a)`
/// and `gram[a][b] = Cov(F_a, F_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioning {
    pub cross: Vec<Vec<f64>>,
    pub gram: Vec<Vec<f64>>,
}

/// `K(t, s) − c(t)ᵀ Σ^{-1} c(s)`.
pub fn condition_kernel(k: &Kernel, cond: &Conditioning) -> Result<Kernel, KernelError> {
    let m = cond.gram.len();
    let n = k.dim();
    if cond.cross.len() != m || cond.cross.iter().any(|c| c.len() != n) || cond.gram.iter().any(|r| r.len() != m) {
        return Err(KernelError::InvalidSpec("conditioning data has inconsistent dimensions".into()));
    }
    if m == 0 {
        return Ok(k.clone());
    }
    let sigma = Mat::<f64>::from_fn(m, m, |a, b| 0.5 * (cond.gram[a][b] + cond.gram[b][a]));
    let evd = sigma.self_adjoint_eigen(Side::Lower).map_err(|e| KernelError::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let (lo, hi) = (s[0], s[m - 1]);
    let cond_number = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond_number <= CONDITION_LIMIT) {
        return Err(KernelError::SingularConditioning { cond: cond_number, limit: CONDITION_LIMIT });
    }
    // Whitened cross-covariances: z_e(t) = Σ_a U[a][e] c_a(t) / √s_e.
    let z: Vec<Vec<f64>> = (0..m)
        .map(|e| {
            let scale = 1.0 / s[e].sqrt();
            (0..n).map(|i| scale * (0..m).map(|a| u[(a, e)] * cond.cross[a][i]).sum::<f64>()).collect()
        })
        .collect();
    let mut values = k.values.clone();
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] -= z.iter().map(|ze| ze[i] * ze[j]).sum::<f64>();
        }
    }
    let mut out = Kernel { grid: k.grid.clone(), values, label: format!("{}|cond({m})", k.label) };
    out.symmetrize();
    Ok(out)
}

/// Conditions on the values `X(t_i)` at the given grid indices.
pub fn condition_on_nodes(k: &Kernel, indices: &[usize]) -> Result<Kernel, KernelError> {
    let n = k.dim();
    let cross = indices.iter().map(|&a| (0..n).map(|i| k.at(i, a)).collect()).collect();
    let gram = indices.iter().map(|&a| indices.iter().map(|&b| k.at(a, b)).collect()).collect();
    condition_kernel(k, &Conditioning { cross, gram })
}
