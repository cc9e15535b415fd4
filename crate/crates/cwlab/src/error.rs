//! Error type of the CLI, with one exit code per originating module.
//!
//! Every failure is reported as a single-line JSON object on stderr,
//! `{"error":{"kind":...,"exit_code":...,"message":...}}`, so wrapper scripts
//! can dispatch on `kind` without parsing prose.  Errors that a library module
//! wraps around another module's error (for example a tracer call failing on
//! bad geometry) are unwrapped to the module where they originated.

use cornerwave::geometry::GeometryError;
use cornerwave::hamiltonian::HamiltonianError;
use cornerwave::regularity::RegularityError;
use cornerwave::spectral::SpectralError;
use cornerwave::tracer::TracerError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Tracer(TracerError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Regularity(RegularityError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Internal(String),
}

impl From<TracerError> for CliError {
    fn from(e: TracerError) -> Self {
        match e {
            TracerError::Geometry(g) => CliError::Geometry(g),
            TracerError::Hamiltonian(h) => CliError::Hamiltonian(h),
            other => CliError::Tracer(other),
        }
    }
}

impl From<RegularityError> for CliError {
    fn from(e: RegularityError) -> Self {
        match e {
            RegularityError::Spectral(s) => CliError::Spectral(s),
            other => CliError::Regularity(other),
        }
    }
}

impl CliError {
    pub fn io(path: &std::path::Path, e: &std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Geometry(_) => "GeometryError",
            CliError::Hamiltonian(_) => "HamiltonianError",
            CliError::Tracer(_) => "TracerError",
            CliError::Spectral(_) => "SpectralError",
            CliError::Regularity(_) => "RegularityError",
            CliError::Io { .. } => "IoError",
            CliError::Internal(_) => "InternalError",
        }
    }

    /// Process exit code: 2 config, 3 geometry, 4 hamiltonian, 5 tracer,
    /// 6 spectral, 7 regularity, 8 artifact I/O, 9 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Hamiltonian(_) => 4,
            CliError::Tracer(_) => 5,
            CliError::Spectral(_) => 6,
            CliError::Regularity(_) => 7,
            CliError::Io { .. } => 8,
            CliError::Internal(_) => 9,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}
