use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no EP possible: all resonator rates are equal (delta = 0)")]
    NoEpPossible,
    #[error("sigma = {sigma} is not admissible: {reason}")]
    NotAdmissible { sigma: Complex64, reason: String },
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("wrong solver branch: {0}")]
    WrongBranch(String),
    #[error("resolvent is singular: s is within tolerance of eigenvalue {eigenvalue}")]
    ResolventSingular { eigenvalue: Complex64 },
    #[error("network is unstable (max Re eigenvalue = {max_real}); stabilize it first")]
    MustStabilize { max_real: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("not an EP: {0}")]
    NotAnEp(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
