use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every stage of the characterization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Canonical values too close together; the recovery method assumes
    /// c1 > c2 > c3 > 0 with a finite margin.
    #[error("degenerate canonical class: {0}")]
    DegenerateClass(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Fewer spectral peaks than requested. Carries what was found so the
    /// caller can decide whether the partial set is usable.
    #[error("insufficient peaks: needed {needed}, found {}", found.len())]
    InsufficientPeaks {
        needed: usize,
        found: Vec<(f64, f64)>,
    },

    #[error("peak assignment failed: best residual {residual:.3e} exceeds limit {limit:.3e}")]
    AssignmentFailure { residual: f64, limit: f64 },

    #[error("inconsistent peaks: {0}")]
    InconsistentPeaks(String),

    #[error("corrupt heights: {0}")]
    CorruptHeights(String),

    #[error("degenerate heights: {0}")]
    DegenerateHeights(String),

    #[error("inconsistent moduli: {0}")]
    InconsistentModuli(String),

    #[error("no candidates survive: {0}")]
    NoCandidates(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Pipeline stage a given error is attributed to in reports.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::DegenerateClass(_) => "canonical",
            Error::Parse { .. } => "trace-io",
            Error::InsufficientPeaks { .. } | Error::AssignmentFailure { .. } => "spectral",
            Error::InconsistentPeaks(_) => "spectral",
            Error::CorruptHeights(_) | Error::DegenerateHeights(_) => "moduli",
            Error::InconsistentModuli(_) => "mu",
            Error::NoCandidates(_) => "candidates",
            Error::Inconsistency(_) => "reconstruction",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::InvalidInput(_) => "input",
        }
    }
}
