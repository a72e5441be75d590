use thiserror::Error;

/// Errors raised by the lattice laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("fields live on different grids or have the wrong length: {0}")]
    Shape(String),
    #[error("input has nonzero mean (defect {defect:e})")]
    NonzeroMean { defect: f64 },
    #[error("non-finite value after step {step}")]
    NonFinite { step: usize },
    #[error("time step {dt:e} exceeds the explicit stability limit {limit:e}")]
    Stability { dt: f64, limit: f64 },
    #[error("shooting interval does not bracket: c = {lo:e} gives {lo_outcome}, c = {hi:e} gives {hi_outcome}")]
    NoBracket {
        lo: f64,
        hi: f64,
        lo_outcome: String,
        hi_outcome: String,
    },
    #[error("sector mismatch: {0}")]
    SectorMismatch(String),
    #[error("cycle is not admissible: {0}")]
    InvalidCycle(String),
    #[error("u vanishes exactly at site {site}; perturb the field and retry")]
    ZeroSection { site: usize },
    #[error("current is not a cycle")]
    NotACycle,
    #[error("family fineness {fineness:e} exceeds the fill-in threshold {limit:e}")]
    FinenessTooLarge { fineness: f64, limit: f64 },
    #[error("fill-in is ambiguous: {0}")]
    AmbiguousFill(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
