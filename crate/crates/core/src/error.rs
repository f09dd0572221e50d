use std::path::PathBuf;

use thiserror::Error;

use crate::backend::BackendError;
use crate::geometry::GeometryError;
use crate::projection::ProjectionError;
use crate::sampling::SamplingError;
use crate::zeroshot::ZeroShotError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    ZeroShot(#[from] ZeroShotError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("predictions: {0}")]
    Predictions(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// True for errors caused by the configuration rather than by data or services.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
            || matches!(self, Error::Backend(BackendError::Config(_)))
            || matches!(
                self,
                Error::Sampling(SamplingError::InvalidParams(_) | SamplingError::InvalidK(_))
            )
            || matches!(
                self,
                Error::Projection(
                    ProjectionError::InvalidView { .. }
                        | ProjectionError::InvalidRaster(_)
                        | ProjectionError::UnknownPreset(_)
                )
            )
            || matches!(
                self,
                Error::ZeroShot(
                    ZeroShotError::InvalidTemplate(_)
                        | ZeroShotError::WrongRole { .. }
                        | ZeroShotError::InvalidWeights(_)
                )
            )
    }
}
