use thiserror::Error;

/// Errors raised while building models, kernels and spectral quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("partition violated by edges {0:?}")]
    NotBipartite(Vec<(usize, usize)>),

    #[error("hamiltonian out of numeric range: |H| = {0}")]
    HamiltonianOutOfRange(f64),

    #[error("all conditional weights zero for variable {0}")]
    AllConditionalWeightsZero(usize),

    #[error("state space exceeds cap {cap} (reached {reached})")]
    StateSpaceExceedsCap { cap: usize, reached: usize },

    #[error("requested {requested} edges but only {available} pairs exist")]
    TooManyEdges { requested: usize, available: usize },

    #[error("row {row} sums to {sum}, outside renormalization tolerance")]
    RowSum { row: usize, sum: f64 },

    #[error("negative kernel entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("distribution is not stationary for the kernel (residual {0:e})")]
    NotStationary(f64),

    #[error("kernel not symmetric after conjugation (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("kernel is not ergodic (irreducible: {irreducible}, aperiodic: {aperiodic})")]
    NotErgodic { irreducible: bool, aperiodic: bool },

    #[error("spectral gap is zero; relaxation time undefined")]
    NoSpectralGap,

    #[error("eigensolver failed to converge")]
    Eigensolver,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("model is not monotone: {0}")]
    NotMonotone(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
