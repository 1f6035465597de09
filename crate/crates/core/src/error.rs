use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid fractional order s = {0}; expected 0 < s <= 1")]
    InvalidOrder(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("field values must be finite (first bad index {0})")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("unsupported nonlinearity: {0}")]
    UnsupportedNonlinearity(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("stagnation: stabilizing factor stuck at {factor:.6e} after {iterations} iterations")]
    Stagnation { iterations: usize, factor: f64 },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("field is identically zero")]
    ZeroField,
    #[error("degenerate pair: nonlinear integral {0:.3e} vanishes")]
    DegeneratePair(f64),
    #[error("no positive root: {0}")]
    NoPositiveRoot(String),
    #[error("negative multiplier: lambda1 = {lambda1:.6e}, lambda2 = {lambda2:.6e}")]
    NegativeMultiplier { lambda1: f64, lambda2: f64 },
    #[error("continuation step collapsed below {floor:.3e} at beta = {beta:.6e}")]
    StepCollapse { beta: f64, floor: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// 1 validation, 2 solver failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidGrid(_) | InvalidOrder(_) | InvalidParams(_) | NonFinite(_) | GridMismatch
            | UnsupportedNonlinearity(_) | ZeroField | DegeneratePair(_) | Precondition(_)
            | Config(_) => 1,
            NoConvergence { .. }
            | Stagnation { .. }
            | GridTooSmall(_)
            | NoPositiveRoot(_)
            | NegativeMultiplier { .. }
            | StepCollapse { .. } => 2,
            Io(_) | Format(_) => 3,
        }
    }

    /// Short variant name, used in CLI messages.
    pub fn variant(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidGrid(_) => "InvalidGrid",
            InvalidOrder(_) => "InvalidOrder",
            InvalidParams(_) => "InvalidParams",
            NonFinite(_) => "NonFinite",
            GridMismatch => "GridMismatch",
            UnsupportedNonlinearity(_) => "UnsupportedNonlinearity",
            NoConvergence { .. } => "NoConvergence",
            Stagnation { .. } => "Stagnation",
            GridTooSmall(_) => "GridTooSmall",
            ZeroField => "ZeroField",
            DegeneratePair(_) => "DegeneratePair",
            NoPositiveRoot(_) => "NoPositiveRoot",
            NegativeMultiplier { .. } => "NegativeMultiplier",
            StepCollapse { .. } => "StepCollapse",
            Precondition(_) => "Precondition",
            Config(_) => "Config",
            Io(_) => "Io",
            Format(_) => "Format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
