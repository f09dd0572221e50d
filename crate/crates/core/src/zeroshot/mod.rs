//! Prompt templating, the text-embedding classifier, per-image logits and the
//! probability-matrix fusion rules.

mod fusion;
mod prompt;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::backend::{Backend, BackendError, Embedding};
use crate::scalar::Real;

pub use fusion::{
    aggregate_probability_matrix, fuse_baseline, fuse_strategy_geo, fuse_strategy_sum,
    max_over_views, min_max_norm, predict, softmax, uniform_weights, ProbabilityMatrix, Strategy,
};
pub use prompt::{
    PromptRole, PromptTemplate, CLIP_DEFAULT, CLIP_RENDERED_BACKGROUND, CLIP_VARIANTS,
    DIFFUSION_DEFAULT, DIFFUSION_OCCLUDED, PLACEHOLDER,
};

#[derive(Debug, Error, PartialEq)]
pub enum ZeroShotError {
    #[error("invalid prompt template: {0}")]
    InvalidTemplate(String),
    #[error("expected a {expected:?} template, got {got:?}")]
    WrongRole { expected: PromptRole, got: PromptRole },
    #[error("duplicate class name '{0}'")]
    DuplicateClass(String),
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row {0} of the classifier is not unit-norm")]
    NotUnitNorm(usize),
    #[error("row {0} is not a probability distribution")]
    NotStochastic(usize),
    #[error("entry ({row}, {col}) is not positive; geometric mean undefined")]
    NonPositive { row: usize, col: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("empty input")]
    Empty,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("encoding class '{class}' failed: {source}")]
    Backend {
        class: String,
        #[source]
        source: BackendError,
    },
}

/// `K x D` matrix of unit-norm text embeddings, one row per class, in class order.
#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifier<T> {
    classes: Vec<String>,
    weights: Vec<Vec<T>>,
}

pub(crate) fn check_classes(classes: &[String]) -> Result<(), ZeroShotError> {
    if classes.len() < 2 {
        return Err(ZeroShotError::TooFewClasses(classes.len()));
    }
    let mut seen = BTreeSet::new();
    for c in classes {
        if !seen.insert(c.as_str()) {
            return Err(ZeroShotError::DuplicateClass(c.clone()));
        }
    }
    Ok(())
}

impl<T: Real> TextClassifier<T> {
    pub fn new(classes: Vec<String>, weights: Vec<Vec<T>>) -> Result<Self, ZeroShotError> {
        check_classes(&classes)?;
        if weights.len() != classes.len() {
            return Err(ZeroShotError::DimensionMismatch {
                expected: classes.len(),
                got: weights.len(),
            });
        }
        let dim = weights[0].len();
        for (k, row) in weights.iter().enumerate() {
            if row.len() != dim {
                return Err(ZeroShotError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            let n = row.iter().fold(T::zero(), |s, &v| s + v * v).sqrt().as_f64();
            if !((n - 1.0).abs() <= 1e-5) {
                return Err(ZeroShotError::NotUnitNorm(k));
            }
        }
        Ok(Self { classes, weights })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Encodes `template` rendered for every class; row `k` belongs to `classes[k]`.
pub fn build_text_classifier<T: Real>(
    classes: &[String],
    template: &PromptTemplate,
    backend: &dyn Backend,
) -> Result<TextClassifier<T>, ZeroShotError> {
    check_classes(classes)?;
    if template.role() != PromptRole::ClipText {
        return Err(ZeroShotError::WrongRole {
            expected: PromptRole::ClipText,
            got: template.role(),
        });
    }
    let prompts: Vec<String> = classes.iter().map(|c| template.render(c)).collect();
    let embeddings = backend.encode_text(&prompts).map_err(|e| ZeroShotError::Backend {
        class: e
            .prompt_index()
            .and_then(|i| classes.get(i))
            .cloned()
            .unwrap_or_else(|| classes.join(",")),
        source: e,
    })?;
    if embeddings.len() != classes.len() {
        return Err(ZeroShotError::DimensionMismatch {
            expected: classes.len(),
            got: embeddings.len(),
        });
    }
    let weights = embeddings
        .iter()
        .map(|e| e.values().iter().map(|&v| T::of(v)).collect())
        .collect();
    TextClassifier::new(classes.to_vec(), weights)
}

/// `logits[k] = scale * <embedding, row_k>`.
pub fn image_logits<T: Real>(
    embedding: &[T],
    classifier: &TextClassifier<T>,
    logit_scale: T,
) -> Result<Vec<T>, ZeroShotError> {
    if embedding.len() != classifier.dim() {
        return Err(ZeroShotError::DimensionMismatch {
            expected: classifier.dim(),
            got: embedding.len(),
        });
    }
    Ok(classifier
        .weights()
        .iter()
        .map(|row| {
            logit_scale
                * row
                    .iter()
                    .zip(embedding)
                    .fold(T::zero(), |s, (&w, &e)| s + w * e)
        })
        .collect())
}

/// [`image_logits`] for a backend embedding.
pub fn embedding_logits<T: Real>(
    embedding: &Embedding,
    classifier: &TextClassifier<T>,
    logit_scale: T,
) -> Result<Vec<T>, ZeroShotError> {
    let e: Vec<T> = embedding.values().iter().map(|&v| T::of(v)).collect();
    image_logits(&e, classifier, logit_scale)
}
