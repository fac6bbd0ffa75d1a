use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A record failed its checksum or could not be decoded.
    #[error("transmission error: {0}")]
    Transmission(String),

    #[error("wallet error: {0}")]
    Wallet(String),

    #[error("registration aborted: {0}")]
    RegistrationAborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
