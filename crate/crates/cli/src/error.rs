use std::io;
use std::path::PathBuf;

use thiserror::Error;

use stackplane::config::ConfigError;
use stackplane::geometry::GeomError;
use stackplane::json::SchemaError;
use stackplane::labeling::LabelError;
use stackplane::measures::MeasureError;
use stackplane::verify::VerifyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Schema { path: PathBuf, source: SchemaError },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("suite {suite} failed: {}", failing.join(", "))]
    VerifyFailed { suite: String, failing: Vec<String> },
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Schema { .. } => 3,
            CliError::VerifyFailed { .. } => 4,
            _ => 1,
        }
    }
}
