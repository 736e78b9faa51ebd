use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("n_spins = {n_spins} outside supported range 1..={max}")]
    SpinCountOutOfRange { n_spins: usize, max: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{n_groups} groups requested but only {distinct} distinct S_z values exist")]
    TooManyGroups { n_groups: usize, distinct: usize },

    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds guard {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:.3e})")]
    AsymmetricMatrix { max_asymmetry: f64 },

    #[error("eigensolver did not converge in {iterations} iterations (best residual {best_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("degenerate ground state: bottom Ritz gap {gap:.3e} below threshold {threshold:.3e}")]
    DegenerateGroundState { gap: f64, threshold: f64 },

    #[error("zero vector has no gauge")]
    ZeroVector,

    #[error("predicted wavefunction in batch item {batch_index} has near-zero norm {norm:.3e}")]
    NumericalDegeneracy { batch_index: usize, norm: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("label solve failed at (b_x = {bx}, b_z = {bz}): {source}")]
    LabelSolve {
        bx: f64,
        bz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset/config mismatch: {0}")]
    DatasetMismatch(String),

    #[error("missing or partial run artifact: {0}")]
    MissingArtifact(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
