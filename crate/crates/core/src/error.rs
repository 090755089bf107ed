use thiserror::Error;

use crate::data::DataError;
use crate::descriptors::DescriptorError;
use crate::models::ModelError;
use crate::phenomenon::PhenomenonError;
use crate::samplers::SamplerError;
use crate::uncertainty::UncertaintyError;

/// Crate-level error; each variant wraps the error type of one module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Phenomenon(#[from] PhenomenonError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
}

impl Error {
    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Data(_) => "data",
            Error::Phenomenon(_) => "phenomenon",
            Error::Model(_) => "models",
            Error::Sampler(_) => "samplers",
            Error::Descriptor(_) => "descriptors",
            Error::Uncertainty(_) => "uncertainty",
        }
    }

    /// Stable machine-readable error code, e.g. `"MissingColumn"`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Data(e) => e.code(),
            Error::Phenomenon(e) => e.code(),
            Error::Model(e) => e.code(),
            Error::Sampler(e) => e.code(),
            Error::Descriptor(e) => e.code(),
            Error::Uncertainty(e) => e.code(),
        }
    }
}
