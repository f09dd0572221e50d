//! JSON bodies of the backend HTTP protocol.
//!
//! | route | request | response |
//! |---|---|---|
//! | `GET /health` | | [`HealthResponse`] |
//! | `POST /v1/encode_text` | [`EncodeTextRequest`] | [`EncodeTextResponse`] |
//! | `POST /v1/encode_image` | [`EncodeImageRequest`] | [`EncodeImageResponse`] |
//! | `POST /v1/style_transfer` | [`StyleTransferRequest`] | [`StyleTransferResponse`] |
//!
//! Failures carry an [`ErrorResponse`] with a 4xx/5xx status. Every request sends
//! [`CORRELATION_HEADER`], which the server echoes back.

use serde::{Deserialize, Serialize};

pub const CORRELATION_HEADER: &str = "x-correlation-id";
pub const HEALTH: &str = "/health";
pub const ENCODE_TEXT: &str = "/v1/encode_text";
pub const ENCODE_IMAGE: &str = "/v1/encode_image";
pub const STYLE_TRANSFER: &str = "/v1/style_transfer";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub dim: usize,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeTextRequest {
    pub prompts: Vec<String>,
}

/// Entries are `Option` so that `null` (how JSON carries NaN) is reported as a
/// non-finite value instead of a parse failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeTextResponse {
    pub dim: usize,
    pub embeddings: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeImageRequest {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeImageResponse {
    pub dim: usize,
    pub embedding: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleTransferRequest {
    pub depth_png_b64: String,
    pub prompt: String,
    pub seed: u64,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleTransferResponse {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}
