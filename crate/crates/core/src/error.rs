use thiserror::Error;

/// Errors raised while validating a group or evaluating group-level operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("layers must be nonempty and positive")]
    EmptyLayers,
    #[error("layer sizes must be non-increasing, got {0:?}")]
    NonMonotoneLayers(Vec<usize>),
    #[error("entry B[{row}][{col}] = {value:e} lies outside the sub-diagonal blocks")]
    NonzeroStarBlock { row: usize, col: usize, value: f64 },
    #[error("block B_{block} is rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficientBlock {
        block: usize,
        sigma_min: f64,
        sigma_max: f64,
    },
    #[error("dilation parameter must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: i64, max: usize },
    #[error("X_{index} is not a generator (valid range 1..={p0})")]
    FieldIndexOutOfRange { index: usize, p0: usize },
    #[error("direction has nonzero entries outside the first layer")]
    UnsupportedDirection,
    #[error("increment has nonzero component in layer {layer}, below the starting level {level}")]
    UnsupportedIncrement { layer: usize, level: usize },
}

/// Errors from derivative evaluation and Taylor machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("derivative of intrinsic order {requested} exceeds the declared smoothness {available} of `{field}`")]
    InsufficientSmoothness {
        field: String,
        requested: u32,
        available: u32,
    },
    #[error("operation only defined on the prototype group")]
    UnsupportedGroup,
    #[error("order {0} out of range (0..=4)")]
    OrderOutOfRange(u32),
    #[error("alpha = {alpha} outside (0, {max}]")]
    AlphaOutOfRange { alpha: f64, max: f64 },
    #[error("unknown field `{0}`")]
    UnknownField(String),
}
