use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("line {line}, column {column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset `{preset}` takes {expected} rabi values, got {got}")]
    ArityMismatch {
        preset: String,
        expected: usize,
        got: usize,
    },

    #[error("non-finite intensity at delta = {0}")]
    NonFinite(f64),

    #[error("dark lines are complex (|Omega_A|^4 < 4|Omega_B|^4)")]
    DegenerateDarkLines,

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("roots {0} and {1} coincide within tolerance")]
    DegenerateRoots(usize, usize),

    #[error("singular system at delta = {0}")]
    SingularSystem(f64),

    #[error("invalid step: {0}")]
    InvalidStep(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("half-maximum crossing of peak at {0} not bracketed by the grid")]
    UnbracketedCrossing(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
