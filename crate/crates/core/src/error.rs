use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("volatility `{name}` must be positive (got {value})")]
    NonPositiveVolatility { name: &'static str, value: f64 },
    #[error("correlation triple ({rho1}, {rho2}, {rho3}) is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    CorrelationNotPsd {
        rho1: f64,
        rho2: f64,
        rho3: f64,
        min_eigenvalue: f64,
    },
    #[error("zeta must lie in (0, 1] (got {0})")]
    ZetaOutOfRange(f64),
    #[error("transaction cost rate must be non-negative (got {0})")]
    NegativeKappa(f64),
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("illiquidity level must be non-negative (got {0})")]
    NegativeLiquidity(f64),
    #[error("grid too small: need n_s >= 4, n_l >= 4, n_t >= 2 (got {n_s}, {n_l}, {n_t})")]
    GridTooSmall { n_s: usize, n_l: usize, n_t: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {message}")]
    MalformedConfig { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("index ({i}, {j}) is not an interior node")]
    IndexOutOfInterior { i: usize, j: usize },
    #[error("negative radicand {value:e} in transaction cost term at node ({i}, {j})")]
    NegativeRadicand { i: usize, j: usize, value: f64 },
    #[error("zero pivot at row {row} of tridiagonal system")]
    SingularPivot { row: usize },
    #[error("point ({s}, {l}) lies outside the grid")]
    PointOutsideGrid { s: f64, l: f64 },
    #[error("numerical instability at time level {level}: |V| = {magnitude:e} exceeds 10 K")]
    InstabilityDetected { level: usize, magnitude: f64 },
    #[error("exercise boundary has {got} time levels, grid needs {expected}")]
    BoundaryMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("price {value} at position {index} is not positive")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("sigma must be positive (got {0})")]
    NonPositiveSigma(f64),
    #[error("need at least {needed} observations (got {got})")]
    TooFewObservations { needed: usize, got: usize },
    #[error("innovation covariance is singular at step {step}")]
    InnovationCovSingular { step: usize },
    #[error("filter diverged at step {step}")]
    DivergedFilter { step: usize },
    #[error("initial point coordinate {index} = {value} is outside [{lower}, {upper}]")]
    InitOutsideBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("moneyness inputs must be positive (s = {s}, k = {k})")]
    NonPositiveInput { s: f64, k: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: malformed row: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("line {line}: non-positive price {value}")]
    NonPositivePrice { line: usize, value: f64 },
    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: usize, date: String },
    #[error("series of length {len} is too short for {needed} observations")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("unexpected header `{found}`, expected `{expected}`")]
    BadHeader { found: String, expected: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("negative radicand {0:e} in the liquidity increment; correlations are inadmissible")]
    NegativeRadicand(f64),
    #[error("{0} must be at least {1}")]
    TooFew(&'static str, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}
