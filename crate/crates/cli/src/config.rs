//! Resolved run configuration.

use std::path::PathBuf;

use green_smallball::kernels::{lag_covariance, Family, ProcessSpec};
use green_smallball::model::{normalize_weight, Weight};
use serde::Serialize;

use crate::args::{EpsArgs, Format, OutputArgs, ProcessArgs, SamplingArgs, SpectrumArgs, SpectrumChoice};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub process: ProcessSpec,
    /// Weight expressions as given on the command line.
    pub weights: Vec<String>,
    pub normalized: bool,
    pub eps: Vec<f64>,
    pub count: usize,
    #[serde(serialize_with = "choice_name")]
    pub method: SpectrumChoice,
    pub grid: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub parsed_weights: Vec<Weight>,
}

fn choice_name<S: serde::Serializer>(c: &SpectrumChoice, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match c {
        SpectrumChoice::Auto => "auto",
        SpectrumChoice::Analytic => "analytic",
        SpectrumChoice::Shooting => "shooting",
        SpectrumChoice::Nystrom => "nystrom",
    })
}

pub fn parse_process(a: &ProcessArgs) -> Result<ProcessSpec, CliError> {
    let m = a.m.unwrap_or(0);
    let betas = match (&a.betas, a.m) {
        (Some(b), Some(m)) if b.len() != m && !a.process.eq_ignore_ascii_case("conditional-wiener") => {
            return Err(CliError::Parse(format!("--betas has {} entries but -m is {m}", b.len())));
        }
        (Some(b), _) => b.clone(),
        (None, _) if a.process.eq_ignore_ascii_case("conditional-wiener") => Vec::new(),
        (None, _) => vec![0; m],
    };
    let family = match a.process.to_ascii_lowercase().as_str() {
        "wiener" => Family::Wiener,
        "bridge" => Family::Bridge,
        "ou" | "ornstein-uhlenbeck" => Family::OrnsteinUhlenbeck,
        "slepian" => Family::Slepian,
        "matern" => Family::Matern(a.order),
        "conditional-wiener" => Family::ConditionalIntegratedWiener(m),
        "bogolyubov" => {
            let covariance = a
                .covariance
                .as_deref()
                .map(lag_covariance)
                .transpose()
                .map_err(|e| CliError::Parse(format!("covariance: {e}")))?;
            Family::Bogolyubov { omega: a.omega, covariance }
        }
        other => return Err(CliError::Parse(format!("unknown process '{other}'"))),
    };
    let spec = ProcessSpec::new(family).with_betas(betas).with_centerings(a.centerings, a.center_last);
    spec.validate()?;
    Ok(spec)
}

fn parse_weights(a: &ProcessArgs, half_order: usize, max: usize) -> Result<Vec<Weight>, CliError> {
    if a.weights.len() > max {
        return Err(CliError::Parse(format!("at most {max} weights expected, got {}", a.weights.len())));
    }
    a.weights
        .iter()
        .map(|text| {
            let w = Weight::parse(text).map_err(|e| CliError::Parse(format!("weight '{text}': {e}")))?;
            if a.normalize {
                Ok(normalize_weight(&w, half_order)?.0)
            } else {
                Ok(w)
            }
        })
        .collect()
}

pub fn eps_grid(a: &EpsArgs, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let mut eps = if let Some(list) = &a.eps {
        list.clone()
    } else if let (Some(start), Some(stop), Some(count)) = (a.eps_start, a.eps_stop, a.eps_count) {
        if count == 0 {
            return Err(CliError::Parse("--eps-count must be at least 1".into()));
        }
        if count == 1 {
            vec![start]
        } else if a.log {
            if !(start > 0.0 && stop > 0.0) {
                return Err(CliError::Parse("log-spaced ε grid needs positive end points".into()));
            }
            let (l0, l1) = (start.ln(), stop.ln());
            (0..count).map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()).collect()
        } else {
            (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect()
        }
    } else if a.eps_start.is_some() || a.eps_stop.is_some() || a.eps_count.is_some() {
        return Err(CliError::Parse("an ε range needs --eps-start, --eps-stop and --eps-count".into()));
    } else {
        default.to_vec()
    };
    if let Some(bad) = eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(CliError::Parse(format!("ε values must be positive, got {bad}")));
    }
    eps.sort_by(|x, y| y.total_cmp(x));
    eps.dedup();
    Ok(eps)
}

pub struct Parts<'a> {
    pub command: &'static str,
    pub process: &'a ProcessArgs,
    pub max_weights: usize,
    pub spectrum: Option<&'a SpectrumArgs>,
    pub default_count: usize,
    pub eps: Vec<f64>,
    pub sampling: Option<&'a SamplingArgs>,
    pub default_samples: usize,
    pub output: &'a OutputArgs,
}

impl RunConfig {
    pub fn resolve(p: Parts<'_>) -> Result<RunConfig, CliError> {
        let process = parse_process(p.process)?;
        let parsed_weights = parse_weights(p.process, process.half_order(), p.max_weights)?;
        let count = p.spectrum.and_then(|s| s.count).unwrap_or(p.default_count);
        if count == 0 {
            return Err(CliError::Parse("-K must be at least 1".into()));
        }
        let samples = p.sampling.and_then(|s| s.samples).unwrap_or(p.default_samples);
        if samples == 0 {
            return Err(CliError::Parse("-N must be at least 1".into()));
        }
        Ok(RunConfig {
            command: p.command,
            process,
            weights: p.process.weights.clone(),
            normalized: p.process.normalize,
            eps: p.eps,
            count,
            method: p.spectrum.map(|s| s.method).unwrap_or(SpectrumChoice::Auto),
            grid: p.spectrum.and_then(|s| s.grid),
            samples,
            seed: p.sampling.map(|s| s.seed).unwrap_or(0),
            format: p.output.format,
            output: p.output.output.clone(),
            parsed_weights,
        })
    }

    /// The `i`-th weight, `ψ ≡ 1` when not given.
    pub fn weight(&self, i: usize) -> Weight {
        self.parsed_weights.get(i).cloned().unwrap_or_else(Weight::unit)
    }

    pub fn weight_text(&self, i: usize) -> String {
        self.weights.get(i).cloned().unwrap_or_else(|| "1".to_string())
    }
}
