//! Access to the pretrained models: text encoder, image encoder and depth-conditioned
//! style transfer.
//!
//! [`Backend`] is implemented by [`RemoteBackend`] (HTTP, see [`wire`]) and by two
//! deterministic in-process doubles, [`MockBackend`] and [`PlantedBackend`]. Every
//! embedding a backend hands out is unit-norm.

mod images;
mod mock;
mod planted;
mod remote;
pub mod stamp;
pub mod wire;

use image::{DynamicImage, GrayImage, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use images::{decode_png, decode_png_b64, encode_png, encode_png_b64};
pub use mock::{expand_unit, seeded_hash, MockBackend};
pub use planted::{PlantedBackend, DEFAULT_MIN_SIMILARITY, NOISE_LEVEL, STYLE_WEIGHT};
pub use remote::RemoteBackend;

const NORM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend returned HTTP {status}: {message}")]
    Remote { status: u16, message: String },
    #[error("embedding {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("embedding {index} contains non-finite values")]
    NonFinite { index: usize },
    #[error("embedding {index} has zero norm")]
    ZeroNorm { index: usize },
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("backend returned a {got:?} image for a {expected:?} input")]
    SizeMismatch {
        expected: (u32, u32),
        got: (u32, u32),
    },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Index of the prompt (or embedding) the error refers to, when there is one.
    pub fn prompt_index(&self) -> Option<usize> {
        match self {
            BackendError::DimensionMismatch { index, .. }
            | BackendError::NonFinite { index }
            | BackendError::ZeroNorm { index } => Some(*index),
            _ => None,
        }
    }
}

/// Unit-norm feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Accepts an already-normalized vector (norm within `1e-5` of one).
    pub fn new(values: Vec<f64>) -> Result<Self, BackendError> {
        Self::check(&values, 0)?;
        let n = l2(&values);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(BackendError::InvalidRequest(format!(
                "embedding norm {n} is not 1"
            )));
        }
        Ok(Self { values })
    }

    /// Scales `values` to unit length. `index` labels errors.
    pub fn normalized(values: Vec<f64>, index: usize) -> Result<Self, BackendError> {
        Self::check(&values, index)?;
        let n = l2(&values);
        if !(n > 0.0) {
            return Err(BackendError::ZeroNorm { index });
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / n).collect(),
        })
    }

    fn check(values: &[f64], index: usize) -> Result<(), BackendError> {
        if values.is_empty() {
            return Err(BackendError::DimensionMismatch {
                index,
                expected: 1,
                got: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BackendError::NonFinite { index });
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.values)
    }

    pub fn cosine(&self, other: &Embedding) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// The three model operations the classifier needs.
///
/// Implementations must be deterministic for fixed weights: identical inputs give
/// identical outputs, and all embeddings of one backend share one dimension.
pub trait Backend: Send + Sync {
    /// Model identifier recorded in run metadata.
    fn model_id(&self) -> String;

    fn encode_text(&self, prompts: &[String]) -> Result<Vec<Embedding>, BackendError>;

    fn encode_image(&self, image: &DynamicImage) -> Result<Embedding, BackendError>;

    /// Restyles a depth image under a text prompt. The output has the input's size.
    fn style_transfer(
        &self,
        depth: &GrayImage,
        prompt: &str,
        seed: u64,
    ) -> Result<RgbImage, BackendError>;
}

pub(crate) fn check_prompts(prompts: &[String]) -> Result<(), BackendError> {
    if prompts.is_empty() {
        return Err(BackendError::InvalidRequest("no prompts given".into()));
    }
    Ok(())
}

pub(crate) fn check_image_size(width: u32, height: u32) -> Result<(), BackendError> {
    if width == 0 || height == 0 {
        return Err(BackendError::Decode(format!("empty {width}x{height} image")));
    }
    Ok(())
}

/// Where the backend lives plus client-side limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// `http(s)://...` base URL, or the literals `mock` / `planted`.
    pub endpoint: String,
    pub timeout_secs: f64,
    pub max_inflight: usize,
    /// Multiplier applied to cosine similarities before the softmax.
    pub logit_scale: f64,
    /// Sampling steps forwarded to the style-transfer service.
    pub diffusion_steps: u32,
    /// Embedding width of the in-process doubles.
    pub mock_dim: usize,
    pub mock_seed: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "mock".into(),
            timeout_secs: 120.0,
            max_inflight: 4,
            logit_scale: 100.0,
            diffusion_steps: 20,
            mock_dim: 512,
            mock_seed: 0,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(BackendError::Config("timeout must be positive".into()));
        }
        if self.max_inflight == 0 {
            return Err(BackendError::Config("max_inflight must be at least 1".into()));
        }
        if !(self.logit_scale > 0.0 && self.logit_scale.is_finite()) {
            return Err(BackendError::Config("logit_scale must be positive".into()));
        }
        if self.diffusion_steps == 0 {
            return Err(BackendError::Config("diffusion_steps must be at least 1".into()));
        }
        match self.endpoint.as_str() {
            "mock" | "planted" => Ok(()),
            e if e.starts_with("http://") || e.starts_with("https://") => Ok(()),
            e => Err(BackendError::Config(format!(
                "endpoint '{e}' is neither a URL nor 'mock'/'planted'"
            ))),
        }
    }
}
