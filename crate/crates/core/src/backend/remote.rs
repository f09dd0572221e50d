use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use image::{DynamicImage, GenericImageView, GrayImage, RgbImage};
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::{self, CORRELATION_HEADER};
use super::{
    check_image_size, check_prompts, decode_png_b64, encode_png_b64, Backend, BackendConfig,
    BackendError, Embedding,
};

const BODY_LIMIT: u64 = 256 * 1024 * 1024;

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    cond: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock poisoned");
        while *free == 0 {
            free = self.cond.wait(free).expect("slot lock poisoned");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock poisoned") += 1;
        self.0.cond.notify_one();
    }
}

/// HTTP client for the backend protocol in [`wire`](super::wire).
///
/// Shareable across threads. At most `max_inflight` requests are open at once, and
/// each response must echo the request's correlation id.
#[derive(Debug)]
pub struct RemoteBackend {
    base: String,
    agent: ureq::Agent,
    slots: Slots,
    next_id: AtomicU64,
    dim: Mutex<Option<usize>>,
    steps: u32,
}

impl RemoteBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        if !config.endpoint.starts_with("http") {
            return Err(BackendError::Config(format!(
                "'{}' is not an HTTP endpoint",
                config.endpoint
            )));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .max_idle_connections_per_host(config.max_inflight)
            .build()
            .into();
        Ok(Self {
            base: config.endpoint.trim_end_matches('/').to_string(),
            agent,
            slots: Slots::new(config.max_inflight),
            next_id: AtomicU64::new(1),
            dim: Mutex::new(None),
            steps: config.diffusion_steps,
        })
    }

    /// Queries `/health` and records the reported dimension.
    pub fn health(&self) -> Result<wire::HealthResponse, BackendError> {
        let h: wire::HealthResponse = self.call(wire::HEALTH, None::<&()>)?;
        if h.status != "ok" {
            return Err(BackendError::Remote {
                status: 200,
                message: format!("service status '{}'", h.status),
            });
        }
        self.check_dim(h.dim, 0)?;
        Ok(h)
    }

    fn call<B: Serialize, R: DeserializeOwned>(
        &self,
        path: &str,
        body: Option<&B>,
    ) -> Result<R, BackendError> {
        let url = format!("{}{}", self.base, path);
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let _slot = self.slots.acquire();
        let result = match body {
            Some(b) => self
                .agent
                .post(&url)
                .header(CORRELATION_HEADER, &id)
                .send_json(b),
            None => self.agent.get(&url).header(CORRELATION_HEADER, &id).call(),
        };
        let mut response = result.map_err(|e| BackendError::Transport(format!("{url}: {e}")))?;
        let status = response.status().as_u16();
        let echoed = response
            .headers()
            .get(CORRELATION_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned);
        let text = response
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| BackendError::Transport(format!("{url}: {e}")))?;
        if !(200..300).contains(&status) {
            let message = serde_json::from_str::<wire::ErrorResponse>(&text)
                .map(|e| e.error)
                .unwrap_or(text);
            return Err(BackendError::Remote { status, message });
        }
        if let Some(echo) = echoed {
            if echo != id {
                return Err(BackendError::Transport(format!(
                    "{url}: response correlation id {echo} does not match request {id}"
                )));
            }
        }
        serde_json::from_str(&text)
            .map_err(|e| BackendError::Transport(format!("{url}: malformed response: {e}")))
    }

    fn check_dim(&self, got: usize, index: usize) -> Result<(), BackendError> {
        let mut dim = self.dim.lock().expect("dimension lock poisoned");
        match *dim {
            Some(expected) if expected != got => Err(BackendError::DimensionMismatch {
                index,
                expected,
                got,
            }),
            Some(_) => Ok(()),
            None => {
                *dim = Some(got);
                Ok(())
            }
        }
    }

    fn embedding(
        &self,
        declared: usize,
        values: Vec<Option<f64>>,
        index: usize,
    ) -> Result<Embedding, BackendError> {
        if values.len() != declared {
            return Err(BackendError::DimensionMismatch {
                index,
                expected: declared,
                got: values.len(),
            });
        }
        self.check_dim(values.len(), index)?;
        let values = values
            .into_iter()
            .map(|v| v.filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or(BackendError::NonFinite { index })?;
        Embedding::normalized(values, index)
    }
}

impl Backend for RemoteBackend {
    fn model_id(&self) -> String {
        self.health()
            .map(|h| h.model)
            .unwrap_or_else(|_| format!("remote:{}", self.base))
    }

    fn encode_text(&self, prompts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        check_prompts(prompts)?;
        let resp: wire::EncodeTextResponse = self.call(
            wire::ENCODE_TEXT,
            Some(&wire::EncodeTextRequest {
                prompts: prompts.to_vec(),
            }),
        )?;
        if resp.embeddings.len() != prompts.len() {
            return Err(BackendError::Transport(format!(
                "asked for {} embeddings, received {}",
                prompts.len(),
                resp.embeddings.len()
            )));
        }
        resp.embeddings
            .into_iter()
            .enumerate()
            .map(|(i, v)| self.embedding(resp.dim, v, i))
            .collect()
    }

    fn encode_image(&self, image: &DynamicImage) -> Result<Embedding, BackendError> {
        check_image_size(image.width(), image.height())?;
        let resp: wire::EncodeImageResponse = self.call(
            wire::ENCODE_IMAGE,
            Some(&wire::EncodeImageRequest {
                image_png_b64: encode_png_b64(image)?,
            }),
        )?;
        self.embedding(resp.dim, resp.embedding, 0)
    }

    fn style_transfer(
        &self,
        depth: &GrayImage,
        prompt: &str,
        seed: u64,
    ) -> Result<RgbImage, BackendError> {
        check_image_size(depth.width(), depth.height())?;
        let resp: wire::StyleTransferResponse = self.call(
            wire::STYLE_TRANSFER,
            Some(&wire::StyleTransferRequest {
                depth_png_b64: encode_png_b64(&DynamicImage::ImageLuma8(depth.clone()))?,
                prompt: prompt.to_string(),
                seed,
                steps: self.steps,
            }),
        )?;
        let image = decode_png_b64(&resp.image_png_b64)?;
        if image.dimensions() != depth.dimensions() {
            return Err(BackendError::SizeMismatch {
                expected: depth.dimensions(),
                got: image.dimensions(),
            });
        }
        Ok(image.to_rgb8())
    }
}
