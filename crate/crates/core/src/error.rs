use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("not a density matrix: min eigenvalue {min_eigenvalue:e}, trace {trace}")]
    NotDensity { min_eigenvalue: f64, trace: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (off-diagonal residual {residual:e})")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("spectral function is not finite at eigenvalue {eigenvalue}")]
    SpectralOverflow { eigenvalue: f64 },

    #[error("potential argument out of double-precision range: s = {s}, t = {t}")]
    PotentialRange { s: f64, t: u64 },

    #[error("loss matrix violates the declared bound: ||G||_op = {norm} > {bound}")]
    LossBound { norm: f64, bound: f64 },

    #[error("reduction context is stale: built for round {context_round}, used in round {round}")]
    StaleContext { context_round: u64, round: u64 },

    #[error("subsystem dims {dims:?} do not factor dimension {dim}")]
    BadFactorization { dims: Vec<usize>, dim: usize },

    #[error("invalid argument: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
