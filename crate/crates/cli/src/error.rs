use green_smallball::kernels::KernelError;
use green_smallball::model::ModelError;
use green_smallball::smallball::SmallBallError;
use green_smallball::spectrum::SpectrumError;
use green_smallball::theta::ThetaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Normalization(String),
    #[error("{0}")]
    Validation(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Normalization(_) => 4,
            CliError::Validation(_) => 5,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::InvalidSpec(_) | KernelError::UnsupportedFamily(_) => CliError::Parse(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<ThetaError> for CliError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::NormalizationMismatch { .. } => CliError::Normalization(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::NormalizationMismatch { .. } => CliError::Normalization(format!(
                "{e}; the two small-ball probabilities have different logarithmic asymptotics"
            )),
            SpectrumError::Kernel(k) => k.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<SmallBallError> for CliError {
    fn from(e: SmallBallError) -> Self {
        match e {
            SmallBallError::NotNormalized { .. } => CliError::Normalization(format!(
                "{e}; rescale the weight (--normalize) so that the asymptotic formulas apply"
            )),
            SmallBallError::UnsupportedSpec(_) | SmallBallError::InvalidInput(_) => CliError::Parse(e.to_string()),
            SmallBallError::Kernel(k) => k.into(),
            SmallBallError::Spectrum(s) => s.into(),
            SmallBallError::Theta(t) => t.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}
