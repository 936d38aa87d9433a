use std::f64::consts::PI;

use green_smallball::catalog::{bogolyubov, problem_for_spec};
use green_smallball::kernels::{build_process, Family, Grid, ProcessSpec};
use green_smallball::model::{normalization_integral, BVProblem, Weight};
use green_smallball::smallball::{
    convergence_from_spectra, evaluate_asymptotic, monte_carlo_probability, proposition_asymptotic,
    smallball_probability_exact, McOptions, SmallBallError, TailModel,
};
use green_smallball::spectrum::{
    eigenvalue_product, eigenvalues_shooting, nystrom_eigenvalues, top_lambdas, SpectrumError, SpectrumResult,
    GRID_SHIFT_TOL,
};
use green_smallball::smallball::asymptotic::NORMALIZATION_TOL;
use green_smallball::theta::ratio_limit;
use serde_json::json;

use crate::args::SpectrumChoice;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Document, Table};

/// Relative tolerance of shooting against closed-form spectra.
pub const SHOOTING_TOL: f64 = 1e-8;
/// Relative tolerance of Nyström against closed-form spectra.
pub const NYSTROM_TOL: f64 = 1e-6;
/// Relative tolerance of Nyström against shooting for general weights.
pub const CROSS_TOL: f64 = 1e-5;
pub const PSD_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-14;
/// Monte Carlo agreement, in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Relative gap between saddle-point and asymptotic probabilities at the
/// deepest of `ASYMPTOTIC_DEPTHS`; the gap must shrink along them.
pub const ASYMPTOTIC_TOL: f64 = 0.05;
pub const ASYMPTOTIC_DEPTHS: [f64; 3] = [1e-10, 1e-25, 1e-40];

pub struct Spectrum {
    pub result: SpectrumResult,
    /// `λ = scale/μ`.
    pub scale: f64,
    pub half_order: usize,
    pub route: &'static str,
}

impl Spectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.result.lambdas(self.scale)
    }

    pub fn tail(&self) -> Option<TailModel> {
        TailModel::for_spectrum(&self.result, self.half_order, self.scale)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `μ_k` of the plain Wiener process and Brownian bridge.
fn analytic_mu(spec: &ProcessSpec) -> Option<fn(usize) -> f64> {
    let plain = spec.betas.is_empty() && spec.centerings == 0 && !spec.center_last;
    match spec.family {
        Family::Wiener if plain => Some(|k| ((k as f64 - 0.5) * PI).powi(2)),
        Family::Bridge if plain => Some(|k| (k as f64 * PI).powi(2)),
        _ => None,
    }
}

pub fn nystrom_grid(cfg: &RunConfig, count: usize) -> usize {
    cfg.grid.unwrap_or_else(|| (8 * count).div_ceil(16).max(64) * 16).max(16)
}

/// Above this count `auto` prefers Nyström, whose cost does not grow with the index.
const MAX_AUTO_SHOOTING: usize = 100;
/// Fewest eigenvalues kept when the grid cannot resolve the requested count.
const MIN_NYSTROM_COUNT: usize = 8;

/// Nyström spectrum; when eigenvalue `k` is not resolved by the grid the
/// spectrum is cut to the first `k − 1` (the tail model covers the rest).
fn nystrom(cfg: &RunConfig, w: &Weight, count: usize) -> Result<SpectrumResult, CliError> {
    let grid = nystrom_grid(cfg, count);
    let n = cfg.process.half_order();
    let mut want = count;
    loop {
        match nystrom_eigenvalues(|g| build_process(&cfg.process, g), w, want, grid, n) {
            Err(SpectrumError::GridTooCoarse { k, .. }) if k > MIN_NYSTROM_COUNT && k <= want && cfg.grid.is_none() => {
                want = k - 1;
            }
            other => return Ok(other?),
        }
    }
}

/// Eigenvalues of the process in the `ψ`-weighted norm by the configured route.
pub fn spectrum(cfg: &RunConfig, w: &Weight, count: usize) -> Result<Spectrum, CliError> {
    spectrum_with(cfg, w, count, MAX_AUTO_SHOOTING)
}

fn spectrum_with(cfg: &RunConfig, w: &Weight, count: usize, max_shooting: usize) -> Result<Spectrum, CliError> {
    let n = cfg.process.half_order();
    let analytic = analytic_mu(&cfg.process).filter(|_| w.is_constant());
    let problem = problem_for_spec(&cfg.process);
    let choice = match cfg.method {
        SpectrumChoice::Auto if analytic.is_some() => SpectrumChoice::Analytic,
        SpectrumChoice::Auto if problem.is_some() && count <= max_shooting => SpectrumChoice::Shooting,
        SpectrumChoice::Auto => SpectrumChoice::Nystrom,
        other => other,
    };
    match choice {
        SpectrumChoice::Analytic => {
            let f = analytic.ok_or_else(|| {
                CliError::Parse("closed-form spectra exist only for the plain Wiener process and bridge with a constant weight".into())
            })?;
            let c = w.eval(0.5);
            let mu = (1..=count).map(|k| f(k) / c).collect();
            Ok(Spectrum { result: SpectrumResult::analytic(mu, c.sqrt()), scale: 1.0, half_order: n, route: "analytic" })
        }
        SpectrumChoice::Shooting => {
            let g = problem.ok_or_else(|| {
                CliError::Parse(format!("{} has no boundary value problem with simple eigenvalues; use --method nystrom", cfg.process.family))
            })?;
            let result = eigenvalues_shooting(&g.problem.with_weight(w.clone()), count)?;
            Ok(Spectrum { result, scale: g.scale, half_order: n, route: "shooting" })
        }
        _ => Ok(Spectrum { result: nystrom(cfg, w, count)?, scale: 1.0, half_order: n, route: "nystrom" }),
    }
}

/// Boundary value problem for θ-determinant work; periodic problems allowed.
fn theta_problem(spec: &ProcessSpec) -> Result<BVProblem, CliError> {
    if let Some(g) = problem_for_spec(spec) {
        return Ok(g.problem);
    }
    if let Family::Bogolyubov { omega, covariance: None } = spec.family {
        if spec.betas.is_empty() && spec.centerings == 0 && !spec.center_last {
            return Ok(bogolyubov(omega)?);
        }
    }
    Err(CliError::Parse(format!(
        "{} with this transform chain is not given by a boundary value problem; θ-determinants are unavailable",
        spec.family
    )))
}

fn report_table() -> Table {
    Table::new(&["check", "value", "error", "reference", "tolerance", "status"])
}

fn status(ok: bool) -> Cell {
    Cell::Text(if ok { "PASS" } else { "FAIL" }.into())
}

fn failures(t: &Table) -> usize {
    t.rows.iter().filter(|r| r.last() == Some(&Cell::Text("FAIL".into()))).count()
}

pub fn eigs(cfg: &RunConfig) -> Result<(), CliError> {
    let w = cfg.weight(0);
    let k = cfg.count;
    let problem = problem_for_spec(&cfg.process);
    let (want_shoot, want_nys) = match cfg.method {
        SpectrumChoice::Auto => (true, true),
        SpectrumChoice::Shooting => (true, false),
        SpectrumChoice::Nystrom => (false, true),
        SpectrumChoice::Analytic => {
            return Err(CliError::Parse("eigs compares shooting with Nyström; use prob --method analytic".into()))
        }
    };
    let scale = problem.as_ref().map_or(1.0, |g| g.scale);
    let shoot = match (&problem, want_shoot) {
        (Some(g), true) => Some(eigenvalues_shooting(&g.problem.with_weight(w.clone()), k)?),
        (None, true) if cfg.method == SpectrumChoice::Shooting => {
            return Err(CliError::Parse(format!("{} has no boundary value problem with simple eigenvalues", cfg.process.family)))
        }
        _ => None,
    };
    let nys = if want_nys { Some(nystrom(cfg, &w, k)?) } else { None };
    let mut table = Table::new(&["k", "mu_shooting", "mu_nystrom", "rel_diff"]);
    for i in 0..k {
        let s = shoot.as_ref().map(|s| s.mu[i]);
        let n = nys.as_ref().and_then(|n| n.mu.get(i)).map(|m| scale * m);
        let d = s.zip(n).map(|(s, n)| rel(n, s));
        table.push(vec![Cell::Int(i + 1), Cell::opt(s), Cell::opt(n), Cell::opt(d)]);
    }
    let method = match (&shoot, &nys) {
        (Some(_), Some(_)) => "shooting+nystrom",
        (Some(_), None) => "shooting",
        _ => "nystrom",
    };
    let tol = json!({ "nystrom_grid": nys.as_ref().map(|_| nystrom_grid(cfg, k)), "grid_shift_tol": GRID_SHIFT_TOL });
    Document::new(method, tol, table).with("scale", json!(scale)).emit(cfg)
}

pub fn theta(cfg: &RunConfig) -> Result<(), CliError> {
    let problem = theta_problem(&cfg.process)?;
    let n = problem.n();
    let (w1, w2) = (cfg.weight(0), cfg.weight(1));
    let limit = ratio_limit(&problem, &w1, &w2)?;
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec![Cell::Text("class".into()), Cell::Text(problem.classify().name().into())]);
    t.push(vec![Cell::Text("route".into()), Cell::Text(format!("{:?}", limit.route))]);
    t.push(vec![Cell::Text("theta1".into()), Cell::Num(normalization_integral(&w1, n).value)]);
    t.push(vec![Cell::Text("theta2".into()), Cell::Num(normalization_integral(&w2, n).value)]);
    t.push(vec![Cell::Text("ratio".into()), Cell::Num(limit.ratio)]);
    t.push(vec![Cell::Text("product".into()), Cell::Num(limit.product)]);
    let tol = json!({ "normalization": NORMALIZATION_TOL });
    Document::new("theta-determinant", tol, t).emit(cfg)
}

pub fn compare(cfg: &RunConfig, tol: f64) -> Result<(), CliError> {
    let problem = theta_problem(&cfg.process)?;
    let (w1, w2) = (cfg.weight(0), cfg.weight(1));
    let limit = ratio_limit(&problem, &w1, &w2)?;
    // The product extrapolation needs accurate high eigenvalues, so shooting is kept at any count.
    let s1 = spectrum_with(cfg, &w1, cfg.count, usize::MAX)?;
    let s2 = if cfg.weight_text(0) == cfg.weight_text(1) {
        None
    } else {
        Some(spectrum_with(cfg, &w2, cfg.count, usize::MAX)?)
    };
    let s2 = s2.as_ref().unwrap_or(&s1);
    let k = s1.result.len().min(s2.result.len());
    let (r1, r2) = (s1.result.truncated(k), s2.result.truncated(k));
    let prod = eigenvalue_product(&r1, &r2)?;
    let mut t = report_table();
    t.push(vec![
        Cell::Text("theta_ratio".into()),
        Cell::Num(limit.ratio),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Text(format!("{:?}", limit.route)),
    ]);
    let ok = (prod.value - limit.product).abs() <= tol * limit.product;
    t.push(vec![
        Cell::Text("eigenvalue_product".into()),
        Cell::Num(prod.value),
        Cell::Num(prod.err),
        Cell::Num(limit.product),
        Cell::Num(tol),
        status(ok),
    ]);
    if !cfg.eps.is_empty() {
        let rows = convergence_from_spectra(&r1, &r2, s1.half_order, s1.scale, &cfg.eps)?;
        for r in rows {
            t.push(vec![
                Cell::Text(format!("probability_ratio(eps={})", r.eps)),
                Cell::Num(r.ratio),
                Cell::Num(r.err),
                Cell::Num(limit.ratio),
                Cell::Empty,
                Cell::Text("INFO".into()),
            ]);
        }
    }
    let failed = failures(&t);
    let method = format!("theta-determinant+product({}/{})", s1.route, s2.route);
    let tols = json!({ "product": tol, "terms": prod.terms });
    Document::new(method, tols, t).emit(cfg)?;
    if failed > 0 {
        return Err(CliError::Validation(format!("eigenvalue product {} differs from {} by more than {tol}", prod.value, limit.product)));
    }
    Ok(())
}

pub fn asympt(cfg: &RunConfig) -> Result<(), CliError> {
    let form = proposition_asymptotic(&cfg.process, &cfg.weight(0))?;
    if let Some(note) = centered_weight_note(cfg) {
        eprintln!("warning: {note}");
    }
    let mut t = Table::new(&["eps", "p_asymptotic", "log_p_asymptotic"]);
    for &e in &cfg.eps {
        let v = evaluate_asymptotic(&form, e);
        t.push(vec![Cell::Num(e), Cell::Num(v.value), Cell::Num(v.log_value)]);
    }
    let tol = json!({ "normalization": NORMALIZATION_TOL });
    Document::new(format!("proposition {}", form.proposition), tol, t).with("form", json!(form)).emit(cfg)
}

/// The centered-process formulas track a non-constant weight only through its
/// end values, which misses the weight's effect on the centering.
fn centered_weight_note(cfg: &RunConfig) -> Option<String> {
    let spec = &cfg.process;
    let centered = spec.centerings > 0 || spec.center_last;
    (centered && !cfg.weight(0).is_constant()).then(|| {
        "the centered-process formula ignores the interior of a non-constant weight; expect an O(1) relative error".to_string()
    })
}

pub fn prob(cfg: &RunConfig) -> Result<(), CliError> {
    let s = spectrum(cfg, &cfg.weight(0), cfg.count)?;
    let (lambdas, tail) = (s.lambdas(), s.tail());
    let mut t = Table::new(&["eps", "p", "log_p", "err", "tilt"]);
    for &e in &cfg.eps {
        match smallball_probability_exact(&lambdas, tail.as_ref(), e) {
            Ok(p) => {
                t.push(vec![Cell::Num(e), Cell::Num(p.p), Cell::Num(p.log_p), Cell::Num(p.err), Cell::opt(p.tilt)])
            }
            Err(err @ SmallBallError::TooDeep { .. }) => {
                eprintln!("warning: eps={e}: {err}");
                t.push(vec![Cell::Num(e), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            }
            Err(err) => return Err(err.into()),
        }
    }
    let tol = json!({ "eigenvalues": s.result.len(), "tail": tail });
    Document::new(format!("saddlepoint({})", s.route), tol, t).emit(cfg)
}

pub fn mc(cfg: &RunConfig) -> Result<(), CliError> {
    let s = spectrum(cfg, &cfg.weight(0), cfg.count)?;
    let (lambdas, tail) = (s.lambdas(), s.tail());
    let opts = McOptions::default();
    let mut t = Table::new(&["eps", "p", "err", "truncation"]);
    for &e in &cfg.eps {
        let p = monte_carlo_probability(&lambdas, tail.as_ref(), e, cfg.samples, cfg.seed, &opts)?;
        t.push(vec![Cell::Num(e), Cell::Num(p.p), Cell::Num(p.err), Cell::opt(p.truncation)]);
    }
    let tol = json!({ "samples": cfg.samples, "seed": cfg.seed, "options": opts });
    Document::new(format!("montecarlo({})", s.route), tol, t).emit(cfg)
}

/// `ε` at which the saddle-point probability equals `target`.
fn eps_for_probability(lambdas: &[f64], tail: Option<&TailModel>, target: f64) -> Result<f64, SmallBallError> {
    let goal = target.ln();
    let (mut lo, mut hi) = (0.5, 1.0);
    while smallball_probability_exact(lambdas, tail, hi)?.log_p < goal {
        hi *= 2.0;
    }
    while smallball_probability_exact(lambdas, tail, lo)?.log_p > goal {
        lo *= 0.5;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if smallball_probability_exact(lambdas, tail, mid)?.log_p < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn spectra_check(t: &mut Table, name: &str, a: &[f64], b: &[f64], tol: f64) {
    let worst = a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max);
    t.push(vec![Cell::Text(name.into()), Cell::Num(worst), Cell::Empty, Cell::Num(0.0), Cell::Num(tol), status(worst <= tol)]);
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = &cfg.process;
    let w = cfg.weight(0);
    let mut t = report_table();

    let kern = build_process(spec, Grid::new(256))?;
    let asym = kern.max_asymmetry();
    t.push(vec![Cell::Text("kernel symmetric".into()), Cell::Num(asym), Cell::Empty, Cell::Num(0.0), Cell::Num(SYMMETRY_TOL), status(asym <= SYMMETRY_TOL)]);
    let lowest = kern.operator_eigenvalues()?[0];
    t.push(vec![Cell::Text("kernel positive semidefinite".into()), Cell::Num(lowest), Cell::Empty, Cell::Num(0.0), Cell::Num(-PSD_TOL), status(lowest >= -PSD_TOL)]);

    let head = cfg.count.min(10);
    let problem = problem_for_spec(spec);
    let scale = problem.as_ref().map_or(1.0, |g| g.scale);
    let nys: Vec<f64> = nystrom(cfg, &w, head)?.mu.iter().map(|m| scale * m).collect();
    let shoot = match &problem {
        Some(g) => Some(eigenvalues_shooting(&g.problem.with_weight(w.clone()), head)?.mu),
        None => None,
    };
    if let Some(f) = analytic_mu(spec).filter(|_| w.is_constant()) {
        let c = w.eval(0.5);
        let exact: Vec<f64> = (1..=head).map(|k| f(k) / c).collect();
        if let Some(s) = &shoot {
            spectra_check(&mut t, "shooting == closed form", s, &exact, SHOOTING_TOL);
        }
        spectra_check(&mut t, "nystrom == closed form", &nys, &exact, NYSTROM_TOL);
    } else if let Some(s) = &shoot {
        spectra_check(&mut t, "nystrom == shooting", &nys, s, CROSS_TOL);
    }

    if let Family::Matern(1) = spec.family {
        if spec.betas.is_empty() && spec.centerings == 0 && !spec.center_last {
            let grid = Grid::new(1024);
            let ou = build_process(&ProcessSpec::new(Family::OrnsteinUhlenbeck), grid.clone())?;
            let a = top_lambdas(&build_process(spec, grid)?, &w, 20)?;
            let b = top_lambdas(&ou, &w, 20)?;
            spectra_check(&mut t, "Matern(1) == OU spectrum", &a, &b, NYSTROM_TOL);
        }
    }

    let s = spectrum(cfg, &w, cfg.count)?;
    let (lambdas, tail) = (s.lambdas(), s.tail());
    let eps = eps_for_probability(&lambdas, tail.as_ref(), 1e-2)?;
    let sp = smallball_probability_exact(&lambdas, tail.as_ref(), eps)?;
    let mc = monte_carlo_probability(&lambdas, tail.as_ref(), eps, cfg.samples, cfg.seed, &McOptions::default())?;
    let z = (mc.p - sp.p) / mc.err;
    t.push(vec![
        Cell::Text(format!("saddlepoint == montecarlo (eps={eps:.6})")),
        Cell::Num(mc.p),
        Cell::Num(mc.err),
        Cell::Num(sp.p),
        Cell::Num(MC_SIGMAS * mc.err),
        status(z.abs() <= MC_SIGMAS),
    ]);

    match proposition_asymptotic(spec, &w) {
        Ok(_) if centered_weight_note(cfg).is_some() => {
            let note = centered_weight_note(cfg).unwrap_or_default();
            t.push(vec![Cell::Text("asymptotic formula".into()), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Text(format!("SKIP: {note}"))]);
        }
        Ok(form) => {
            let mut gaps = Vec::new();
            for target in ASYMPTOTIC_DEPTHS {
                let e = eps_for_probability(&lambdas, tail.as_ref(), target)?;
                let p = smallball_probability_exact(&lambdas, tail.as_ref(), e)?;
                let a = evaluate_asymptotic(&form, e);
                gaps.push((e, p.p, a.value, (p.log_p - a.log_value).exp_m1()));
            }
            let &(e, p, a, gap) = gaps.last().unwrap();
            t.push(vec![
                Cell::Text(format!("saddlepoint ~ proposition {} (eps={e:.6e})", form.proposition)),
                Cell::Num(p),
                Cell::Num(gap),
                Cell::Num(a),
                Cell::Num(ASYMPTOTIC_TOL),
                status(gap.abs() <= ASYMPTOTIC_TOL),
            ]);
            let shrinking = gaps.windows(2).all(|w| w[1].3.abs() < w[0].3.abs());
            let listed: Vec<String> = gaps.iter().map(|g| format!("{:.3e}", g.3)).collect();
            t.push(vec![
                Cell::Text(format!("asymptotic gap shrinks ({})", listed.join(" "))),
                Cell::Num(gap.abs()),
                Cell::Empty,
                Cell::Num(gaps[0].3.abs()),
                Cell::Empty,
                status(shrinking),
            ]);
        }
        Err(e @ (SmallBallError::UnsupportedSpec(_) | SmallBallError::NotNormalized { .. })) => {
            t.push(vec![Cell::Text("asymptotic formula".into()), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Text(format!("SKIP: {e}"))]);
        }
        Err(e) => return Err(e.into()),
    }

    let failed = failures(&t);
    let tols = json!({
        "shooting": SHOOTING_TOL, "nystrom": NYSTROM_TOL, "cross": CROSS_TOL, "psd": PSD_TOL,
        "symmetry": SYMMETRY_TOL, "mc_sigmas": MC_SIGMAS, "asymptotic": ASYMPTOTIC_TOL, "asymptotic_depths": ASYMPTOTIC_DEPTHS,
    });
    Document::new(format!("validate({})", s.route), tols, t).emit(cfg)?;
    if failed > 0 {
        return Err(CliError::Validation(format!("{failed} check(s) failed")));
    }
    Ok(())
}
