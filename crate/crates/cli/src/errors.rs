//! Maps library errors onto the process exit codes: 2 for data and
//! validation problems, 3 when no weight can satisfy the thresholds,
//! 4 for solver failures.

use fairdiv_core::domain::DomainError;
use fairdiv_core::exposure::ExposureError;
use fairdiv_core::io::IoIngestError;
use fairdiv_core::lp::{ConfigError, LpError, SolveError};
use fairdiv_core::metrics::MetricsError;
use fairdiv_core::rounding::RoundingError;
use fairdiv_core::scenarios::ScenarioError;
use fairdiv_core::simplex::SimplexError;
use fairdiv_core::tuner::TunerError;

#[derive(Debug)]
pub enum CliError {
    Data(String),
    TunerInfeasible(String),
    Solver(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn tuner_infeasible(msg: impl Into<String>) -> Self {
        CliError::TunerInfeasible(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::TunerInfeasible(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Data(msg) | CliError::TunerInfeasible(msg) | CliError::Solver(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<IoIngestError> for CliError {
    fn from(err: IoIngestError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(err: DomainError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<ExposureError> for CliError {
    fn from(err: ExposureError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<RoundingError> for CliError {
    fn from(err: RoundingError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(err: LpError) -> Self {
        match err {
            LpError::AlphaOutOfRange(_) => CliError::Data(err.to_string()),
            _ => CliError::Solver(err.to_string()),
        }
    }
}

impl From<SimplexError> for CliError {
    fn from(err: SimplexError) -> Self {
        CliError::Solver(err.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(err: SolveError) -> Self {
        match err {
            SolveError::Build(inner) => inner.into(),
            SolveError::Simplex(inner) => inner.into(),
        }
    }
}

impl From<TunerError> for CliError {
    fn from(err: TunerError) -> Self {
        match err {
            TunerError::BadGridStep(_)
            | TunerError::BadEpsilonGrid(_)
            | TunerError::Config(_) => CliError::Data(err.to_string()),
            TunerError::Solve(inner) => inner.into(),
            TunerError::NonContiguousFeasibleSet(_) => CliError::Solver(err.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(err: ScenarioError) -> Self {
        match err {
            ScenarioError::TunerInfeasible { .. } => CliError::TunerInfeasible(err.to_string()),
            ScenarioError::Solve(inner) => inner.into(),
            ScenarioError::Tuner(inner) => inner.into(),
            ScenarioError::Rounding(inner) => inner.into(),
            ScenarioError::Metrics(inner) => inner.into(),
            ScenarioError::EmptySpecs => CliError::Data(err.to_string()),
        }
    }
}
