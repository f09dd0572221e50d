//! Test double with a known class signal.
//!
//! Each class owns an orthonormal seeded text vector. Style transfer stamps the index
//! of the class named in the prompt; image encoding reads the stamp and, when shape
//! prototypes are registered, also recognises the silhouette in the image. The image
//! embedding is the recognised class's vector, plus [`STYLE_WEIGHT`] times the stamped
//! class's vector, plus [`NOISE_LEVEL`] of seeded noise, normalized. Images with neither
//! signal embed orthogonally to every class.

use std::sync::RwLock;

use image::{DynamicImage, GrayImage, RgbImage};

use super::mock::{expand_unit, image_bytes, seeded_hash};
use super::stamp::{self, gray_to_rgb};
use super::{check_image_size, check_prompts, dot, Backend, BackendError, Embedding};

pub const NOISE_LEVEL: f64 = 5e-4;
pub const STYLE_WEIGHT: f64 = 0.3;
pub const DEFAULT_MIN_SIMILARITY: f64 = 0.8;
const GRID: usize = 16;

pub struct PlantedBackend {
    classes: Vec<String>,
    vectors: Vec<Vec<f64>>,
    dim: usize,
    seed: u64,
    min_similarity: f64,
    prototypes: RwLock<Vec<(usize, Vec<f64>)>>,
}

impl std::fmt::Debug for PlantedBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlantedBackend")
            .field("classes", &self.classes)
            .field("dim", &self.dim)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl PlantedBackend {
    /// Builds the per-class vectors by Gram-Schmidt over seeded draws, so distinct
    /// classes are exactly orthogonal up to rounding.
    pub fn new(classes: &[String], dim: usize, seed: u64) -> Result<Self, BackendError> {
        if dim < 8 {
            return Err(BackendError::Config(format!("planted dimension must be >= 8, got {dim}")));
        }
        if classes.len() > dim {
            return Err(BackendError::Config(format!(
                "{} classes do not fit orthogonally in dimension {dim}",
                classes.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in classes {
            if !seen.insert(c) {
                return Err(BackendError::Config(format!("duplicate class name '{c}'")));
            }
        }
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(classes.len());
        for c in classes {
            let mut v = expand_unit(seeded_hash(seed, "class", c.as_bytes()), dim);
            for _ in 0..2 {
                for u in &vectors {
                    let d = dot(&v, u);
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
            }
            let n = super::l2(&v);
            vectors.push(v.into_iter().map(|x| x / n).collect());
        }
        Ok(Self {
            classes: classes.to_vec(),
            vectors,
            dim,
            seed,
            min_similarity: DEFAULT_MIN_SIMILARITY,
            prototypes: RwLock::new(Vec::new()),
        })
    }

    pub fn with_min_similarity(mut self, threshold: f64) -> Self {
        self.min_similarity = threshold;
        self
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_vector(&self, class: usize) -> &[f64] {
        &self.vectors[class]
    }

    /// Registers `image` as a reference silhouette for `class`.
    pub fn register_prototype(&self, class: &str, image: &DynamicImage) -> Result<(), BackendError> {
        let idx = self
            .class_index(class)
            .ok_or_else(|| BackendError::InvalidRequest(format!("unknown class '{class}'")))?;
        check_image_size(image.width(), image.height())?;
        let Some(feature) = silhouette(image) else {
            return Err(BackendError::InvalidRequest("prototype image is blank".into()));
        };
        self.prototypes
            .write()
            .expect("prototype lock poisoned")
            .push((idx, feature));
        Ok(())
    }

    pub fn prototype_count(&self) -> usize {
        self.prototypes.read().expect("prototype lock poisoned").len()
    }

    fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    /// Class named in `prompt`: the longest class name occurring as a whole word.
    pub fn class_in_prompt(&self, prompt: &str) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, c) in self.classes.iter().enumerate() {
            if contains_word(prompt, c) && best.is_none_or(|b| c.len() > self.classes[b].len()) {
                best = Some(i);
            }
        }
        best
    }

    /// Class whose prototype silhouette best matches `image`, if similar enough.
    pub fn recognise(&self, image: &DynamicImage) -> Option<usize> {
        let feature = silhouette(image)?;
        let protos = self.prototypes.read().expect("prototype lock poisoned");
        let mut best: Option<(f64, usize)> = None;
        for (class, p) in protos.iter() {
            let s = dot(&feature, p);
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, *class));
            }
        }
        best.filter(|(s, _)| *s >= self.min_similarity).map(|(_, c)| c)
    }

    /// Vector orthogonal to every class vector, keyed by `bytes`.
    fn null_vector(&self, domain: &str, bytes: &[u8]) -> Vec<f64> {
        let mut v = expand_unit(seeded_hash(self.seed, domain, bytes), self.dim);
        for _ in 0..2 {
            for u in &self.vectors {
                let d = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = super::l2(&v);
        v.into_iter().map(|x| x / n).collect()
    }
}

fn contains_word(text: &str, word: &str) -> bool {
    if word.is_empty() {
        return false;
    }
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    text.match_indices(word).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + word.len()..].chars().next();
        !before.is_some_and(is_word) && !after.is_some_and(is_word)
    })
}

/// Unit-length occupancy histogram of nonzero pixels on a `GRID x GRID` lattice,
/// ignoring the stamp block. `None` for blank images.
fn silhouette(image: &DynamicImage) -> Option<Vec<f64>> {
    let luma = match image {
        DynamicImage::ImageRgb8(rgb) => GrayImage::from_fn(rgb.width(), rgb.height(), |x, y| {
            let p = rgb.get_pixel(x, y).0;
            image::Luma([p[0].max(p[1]).max(p[2])])
        }),
        other => other.to_luma8(),
    };
    let (w, h) = luma.dimensions();
    let stamped = stamp::read_stamp(image).is_some();
    let mut cells = vec![0.0; GRID * GRID];
    for (x, y, p) in luma.enumerate_pixels() {
        if p[0] == 0 || (stamped && stamp::in_block(x, y)) {
            continue;
        }
        let cx = (x as usize * GRID) / w as usize;
        let cy = (y as usize * GRID) / h as usize;
        cells[cy * GRID + cx] += 1.0;
    }
    let n = super::l2(&cells);
    (n > 0.0).then(|| cells.into_iter().map(|c| c / n).collect())
}

impl Backend for PlantedBackend {
    fn model_id(&self) -> String {
        format!("planted-k{}-d{}-s{}", self.classes.len(), self.dim, self.seed)
    }

    fn encode_text(&self, prompts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        check_prompts(prompts)?;
        prompts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = match self.class_in_prompt(p) {
                    Some(c) => self.vectors[c].clone(),
                    None => self.null_vector("text", p.as_bytes()),
                };
                Embedding::normalized(v, i)
            })
            .collect()
    }

    fn encode_image(&self, image: &DynamicImage) -> Result<Embedding, BackendError> {
        check_image_size(image.width(), image.height())?;
        let bytes = image_bytes(image);
        let styled = stamp::read_stamp(image)
            .and_then(|t| t.checked_sub(1))
            .map(usize::from)
            .filter(|&c| c < self.classes.len());
        let content = self.recognise(image);
        let mut v = match (content, styled) {
            (None, None) => return Embedding::normalized(self.null_vector("image", &bytes), 0),
            (Some(c), None) | (None, Some(c)) => self.vectors[c].clone(),
            (Some(c), Some(s)) => self.vectors[c]
                .iter()
                .zip(&self.vectors[s])
                .map(|(a, b)| a + STYLE_WEIGHT * b)
                .collect(),
        };
        let n = super::l2(&v);
        let noise = expand_unit(seeded_hash(self.seed, "noise", &bytes), self.dim);
        v.iter_mut()
            .zip(noise)
            .for_each(|(a, e)| *a = *a / n + NOISE_LEVEL * e);
        Embedding::normalized(v, 0)
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
        let token = self.class_in_prompt(prompt).map_or(0, |c| c as u16 + 1);
        stamp::stamp(&mut rgb, token);
        Ok(rgb)
    }
}
