//! Configuration ingestion and experiment drivers behind the `ponder`
//! command-line tool: entanglement spectra, temperature sweeps, Θ-maps,
//! intra-cavity entanglement tables and stability reports, all emitted
//! as plain CSV for downstream plotting.

pub mod config;
pub mod drivers;

/// Process exit codes: 0 success, 2 config error, 3 instability,
/// 4 numeric failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Instability(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Instability(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Instability(msg) => write!(f, "instability: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
