use serde::{Deserialize, Serialize};

use super::ZeroShotError;

pub const PLACEHOLDER: &str = "[C]";

/// Default text-encoder prompt.
pub const CLIP_DEFAULT: &str = "a photo of a [C]";
/// Best-scoring text-encoder prompt on ModelNet10.
pub const CLIP_RENDERED_BACKGROUND: &str = "a 3D image of a [C] with rendered background";
/// Other text-encoder prompt variants worth sweeping.
pub const CLIP_VARIANTS: [&str; 6] = [
    CLIP_DEFAULT,
    "a rendered image of [C]",
    "a 3D rendered image of [C]",
    "[C] with white context",
    "[C] with white background",
    CLIP_RENDERED_BACKGROUND,
];
/// Default style prompt for the depth-conditioned generator.
pub const DIFFUSION_DEFAULT: &str = "a photo of a [C], best quality, extremely detailed";
/// Style prompt for real scans: asks for an occluder in front of the object.
pub const DIFFUSION_OCCLUDED: &str =
    "a photo of a [C], behind the building, best quality, extremely detailed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptRole {
    ClipText,
    DiffusionStyle,
}

/// A prompt pattern with exactly one `[C]` class placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate", into = "RawTemplate")]
pub struct PromptTemplate {
    pattern: String,
    role: PromptRole,
}

#[derive(Serialize, Deserialize)]
struct RawTemplate {
    pattern: String,
    role: PromptRole,
}

impl TryFrom<RawTemplate> for PromptTemplate {
    type Error = ZeroShotError;

    fn try_from(raw: RawTemplate) -> Result<Self, Self::Error> {
        PromptTemplate::new(raw.pattern, raw.role)
    }
}

impl From<PromptTemplate> for RawTemplate {
    fn from(t: PromptTemplate) -> Self {
        RawTemplate {
            pattern: t.pattern,
            role: t.role,
        }
    }
}

impl PromptTemplate {
    pub fn new(pattern: impl Into<String>, role: PromptRole) -> Result<Self, ZeroShotError> {
        let pattern = pattern.into();
        let n = pattern.matches(PLACEHOLDER).count();
        if n != 1 {
            return Err(ZeroShotError::InvalidTemplate(format!(
                "'{pattern}' must contain {PLACEHOLDER} exactly once (found {n})"
            )));
        }
        Ok(Self { pattern, role })
    }

    pub fn clip_default() -> Self {
        Self::new(CLIP_DEFAULT, PromptRole::ClipText).expect("valid constant")
    }

    pub fn diffusion_default() -> Self {
        Self::new(DIFFUSION_DEFAULT, PromptRole::DiffusionStyle).expect("valid constant")
    }

    pub fn diffusion_occluded() -> Self {
        Self::new(DIFFUSION_OCCLUDED, PromptRole::DiffusionStyle).expect("valid constant")
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    pub fn role(&self) -> PromptRole {
        self.role
    }

    pub fn render(&self, class: &str) -> String {
        self.pattern.replacen(PLACEHOLDER, class, 1)
    }
}
