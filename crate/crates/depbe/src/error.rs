use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variance of the sum is zero")]
    DegenerateVariance,
    #[error("exact enumeration needs {outcomes} outcomes, cap is {cap}")]
    OracleTooLarge { outcomes: u128, cap: u64 },
    #[error("missing moment: {0}")]
    MissingMoment(String),
    #[error("hypothesis not met: {0}")]
    WrongRegime(String),
    #[error("no applicable bound for this profile")]
    NoApplicableBound,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("insufficient input: {0}")]
    Insufficient(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
