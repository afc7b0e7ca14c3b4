use thiserror::Error;

/// Every failure the library reports. The `Display` form is a single line
/// prefixed with a stable category, which the CLI prints verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("domain: u = {u} lies outside [0, {length}]")]
    Domain { u: f64, length: f64 },
    #[error("focal: offset {offset} exceeds 0.9 x focal bound {bound}")]
    Focal { offset: f64, bound: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("mode: {0}")]
    Mode(String),
    #[error("hermiticity: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },
    #[error("grading: {0}")]
    Grading(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("output: {0}")]
    Output(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
