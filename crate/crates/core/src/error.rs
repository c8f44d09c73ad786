use thiserror::Error;

use crate::dde::SimError;
use crate::lambert::LambertError;
use crate::linalg::LinalgError;
use crate::models::ModelError;
use crate::msf::MsfError;
use crate::network::NetworkError;
use crate::report::ReportError;
use crate::scan::ScanError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Lambert(#[from] LambertError),
    #[error(transparent)]
    Msf(#[from] MsfError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl Error {
    /// Bad input, as opposed to a numerical method failing on valid input.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Model(e) => !matches!(e, ModelError::Linalg(_)),
            Error::Msf(e) => matches!(e, MsfError::InvalidQuery(_)),
            Error::Scan(e) => matches!(e, ScanError::InvalidAxis(_) | ScanError::Invalid(_)),
            Error::Network(e) => !matches!(e, NetworkError::Linalg(_) | NetworkError::Msf { .. }),
            Error::Sim(e) => matches!(e, SimError::InvalidConfig(_)),
            Error::Linalg(_) | Error::Lambert(_) | Error::Report(_) => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
