use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    /// Malformed input data, such as a CSV that is not a sweep.
    #[error("input: {0}")]
    Input(String),
    #[error("fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Solver(#[from] dpsco::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit code for this failure: configuration problems are 2,
    /// everything else is 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver(dpsco::Error::ScheduleInfeasible { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
