use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: entry ({i},{j}) = {a}, adjoint of ({j},{i}) = {b}, |diff| = {diff:.3e} exceeds {tol:.3e}")]
    NotHermitian {
        i: usize,
        j: usize,
        a: String,
        b: String,
        diff: f64,
        tol: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}{}", context_suffix(.context))]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("weight A_{index} is not positive definite: min eigenvalue {min_eigenvalue:.6e} < {pd_tol:.3e}")]
    NotPositiveDefinite {
        index: usize,
        min_eigenvalue: f64,
        pd_tol: f64,
    },

    #[error("weight sequence too short: got {got}, need at least {need}")]
    TooShort { got: usize, need: usize },

    #[error("index {index} is beyond the truncation (weights 0..{len}) and tail policy is 'none'")]
    OutOfWindow { index: i64, len: usize },

    #[error("insufficient truncation for {criterion}: have N = {have} weights, need N >= {need}")]
    InsufficientTruncation {
        criterion: String,
        have: usize,
        need: usize,
    },

    #[error("parametric family is empty")]
    EmptyFamily,

    #[error("family evaluation at ({s}, {t}) is not Hermitian: {detail}")]
    NonHermitianEvaluation { s: f64, t: f64, detail: String },

    #[error("decomposition is not block-diagonal: invariance residual {residual:.6e} exceeds dec_tol {dec_tol:.3e} (either the shift is not in the claimed class within tolerance, or the tolerance is miscalibrated)")]
    NotBlockDiagonal { residual: f64, dec_tol: f64 },

    #[error("weights A_{m} and A_{n} do not commute: commutator norm {norm:.6e} exceeds comm_tol {comm_tol:.3e}")]
    NonCommutingWeights {
        m: usize,
        n: usize,
        norm: f64,
        comm_tol: f64,
    },

    #[error("matrix is not unitary: max deviation of U*U from identity is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}
