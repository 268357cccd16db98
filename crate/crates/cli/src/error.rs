use coinn::ann::AnnError;
use coinn::experiment::ExperimentError;
use thiserror::Error;

/// Errors surfaced by subcommands, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Divergence(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<coinn::datamodel::DataError> for CliError {
    fn from(e: coinn::datamodel::DataError) -> Self {
        match e {
            coinn::datamodel::DataError::UnknownHoldout(_)
            | coinn::datamodel::DataError::BadFractions(_)
            | coinn::datamodel::DataError::ZeroBins => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<AnnError> for CliError {
    fn from(e: AnnError) -> Self {
        match e {
            AnnError::AllDiverged(_) => CliError::Divergence(e.to_string()),
            AnnError::InvalidConfig(_) | AnnError::ModelFile(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Data(d) => d.into(),
            ExperimentError::Ann(a) => a.into(),
            ExperimentError::InvalidSpec(_) | ExperimentError::FeatureMismatch(_) => CliError::Config(e.to_string()),
            ExperimentError::Feature { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<coinn::analysis::AnalysisError> for CliError {
    fn from(e: coinn::analysis::AnalysisError) -> Self {
        match e {
            coinn::analysis::AnalysisError::UnknownFeature(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
