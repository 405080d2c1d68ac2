use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors from the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible spaces: {0}")]
    SpaceMismatch(String),

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("unknown label `{label}` in factor `{factor}`")]
    UnknownLabel { factor: String, label: String },

    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("post-selection is orthogonal to the pre-selection (|overlap| = {overlap:e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("branch probability {probability:e} is too small to condition on")]
    ZeroProbabilityBranch { probability: f64 },

    #[error("projectors do not sum to the identity (max deviation {deviation:e})")]
    IncompleteSet { deviation: f64 },

    #[error("pointer shift {shift} exceeds half the grid extent {half_extent}")]
    ShiftOutOfGrid { shift: f64, half_extent: f64 },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not a projector (deviation {deviation:e})")]
    NotProjector { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
