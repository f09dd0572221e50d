use image::{DynamicImage, GrayImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::stamp::{self, gray_to_rgb};
use super::{check_image_size, check_prompts, Backend, BackendError, Embedding};

/// First 8 bytes (little endian) of `SHA-256(seed_le || domain || 0x00 || bytes)`.
pub fn seeded_hash(seed: u64, domain: &str, bytes: &[u8]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(domain.as_bytes());
    h.update([0u8]);
    h.update(bytes);
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// `dim` uniform draws in `[-1, 1)` from ChaCha8 seeded with `key`, scaled to unit length.
pub fn expand_unit(key: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let n = super::l2(&raw);
    raw.into_iter().map(|v| v / n).collect()
}

pub(crate) fn image_bytes(image: &DynamicImage) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(image.as_bytes().len() + 9);
    bytes.extend_from_slice(&image.width().to_le_bytes());
    bytes.extend_from_slice(&image.height().to_le_bytes());
    bytes.push(image.color().channel_count());
    bytes.extend_from_slice(image.as_bytes());
    bytes
}

/// Deterministic stand-in with no class knowledge: embeddings are hashes of the input
/// expanded to unit vectors, and style transfer replicates the depth image to RGB and
/// stamps a token derived from the prompt.
#[derive(Debug, Clone)]
pub struct MockBackend {
    dim: usize,
    seed: u64,
}

impl MockBackend {
    pub fn new(dim: usize, seed: u64) -> Result<Self, BackendError> {
        if dim == 0 {
            return Err(BackendError::Config("embedding dimension must be positive".into()));
        }
        Ok(Self { dim, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Token stamped for a prompt: 16 bits of its hash, skipping the reserved value.
    pub fn prompt_token(&self, prompt: &str) -> u16 {
        let t = seeded_hash(self.seed, "token", prompt.as_bytes()) as u16;
        if t == 0x5A5A {
            0
        } else {
            t
        }
    }
}

impl Backend for MockBackend {
    fn model_id(&self) -> String {
        format!("mock-hash-d{}-s{}", self.dim, self.seed)
    }

    fn encode_text(&self, prompts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        check_prompts(prompts)?;
        prompts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let key = seeded_hash(self.seed, "text", p.as_bytes());
                Embedding::normalized(expand_unit(key, self.dim), i)
            })
            .collect()
    }

    fn encode_image(&self, image: &DynamicImage) -> Result<Embedding, BackendError> {
        check_image_size(image.width(), image.height())?;
        let key = seeded_hash(self.seed, "image", &image_bytes(image));
        Embedding::normalized(expand_unit(key, self.dim), 0)
    }

    fn style_transfer(
        &self,
        depth: &GrayImage,
        prompt: &str,
        _seed: u64,
    ) -> Result<RgbImage, BackendError> {
        check_image_size(depth.width(), depth.height())?;
        if prompt.is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        let mut rgb = gray_to_rgb(depth);
        stamp::stamp(&mut rgb, self.prompt_token(prompt));
        Ok(rgb)
    }
}
