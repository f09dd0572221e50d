use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::BackendConfig;
use crate::projection::{view_preset, RasterConfig, ViewConfig, DEFAULT_ELEVATION};
use crate::sampling::SamplingParams;
use crate::zeroshot::{PromptRole, PromptTemplate, Strategy};
use crate::Error;

pub const DEFAULT_KNN_K: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub strategies: Vec<Strategy>,
    pub w_glo: f64,
    pub w_loc: f64,
    /// Per-view weights of the baseline; `None` means uniform.
    pub view_weights: Option<Vec<f64>>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            strategies: vec![Strategy::Sum, Strategy::Geo],
            w_glo: 1.0,
            w_loc: 1.0,
            view_weights: None,
        }
    }
}

/// Everything a run depends on. Written to `config.json` in the output directory with
/// every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset_root: PathBuf,
    pub split: String,
    pub views: Vec<ViewConfig>,
    pub sampling: SamplingParams,
    pub knn_k: usize,
    pub raster: RasterConfig,
    pub backend: BackendConfig,
    pub fusion: FusionConfig,
    pub clip_prompt: PromptTemplate,
    pub diffusion_prompt: PromptTemplate,
    pub out_dir: PathBuf,
    pub skip_diffusion: bool,
    /// Process only this many items, picked round-robin across classes.
    pub limit: Option<usize>,
    pub workers: usize,
    /// Base of the per-(object, view, class) style-transfer seeds.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset_root: PathBuf::from("data"),
            split: "test".into(),
            views: view_preset("four-view").expect("built-in preset"),
            sampling: SamplingParams::default(),
            knn_k: DEFAULT_KNN_K,
            raster: RasterConfig::default(),
            backend: BackendConfig::default(),
            fusion: FusionConfig::default(),
            clip_prompt: PromptTemplate::clip_default(),
            diffusion_prompt: PromptTemplate::diffusion_default(),
            out_dir: PathBuf::from("out"),
            skip_diffusion: false,
            limit: None,
            workers: 1,
            seed: 0,
        }
    }
}

/// Parses `single-best`, `four-view`, `eight-view`, or a comma list of
/// `azimuth[:elevation]` in degrees (elevation defaults to the preset elevation).
pub fn parse_views(spec: &str) -> Result<Vec<ViewConfig>, Error> {
    if let Ok(views) = view_preset(spec) {
        return Ok(views);
    }
    if !spec.contains(|c: char| c.is_ascii_digit()) {
        return view_preset(spec).map_err(Error::from);
    }
    spec.split(',')
        .map(|part| {
            let part = part.trim();
            let (az, el) = match part.split_once(':') {
                Some((a, e)) => (a, Some(e)),
                None => (part, None),
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad view angle '{s}' in '{spec}'")))
            };
            let el = match el {
                Some(e) => parse(e)?,
                None => DEFAULT_ELEVATION,
            };
            Ok(ViewConfig::new(parse(az)?, el))
        })
        .collect()
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.views.is_empty() {
            return Err(Error::Config("at least one view is required".into()));
        }
        let mut labels = std::collections::BTreeSet::new();
        for v in &self.views {
            v.validate()?;
            if !labels.insert(v.label.as_str()) {
                return Err(Error::Config(format!("duplicate view label '{}'", v.label)));
            }
        }
        self.sampling.validate()?;
        if self.knn_k < 2 {
            return Err(Error::Config(format!("knn_k must be at least 2, got {}", self.knn_k)));
        }
        self.raster.validate()?;
        self.backend.validate()?;
        if self.fusion.strategies.is_empty() {
            return Err(Error::Config("at least one fusion strategy is required".into()));
        }
        let (g, l) = (self.fusion.w_glo, self.fusion.w_loc);
        if !(g >= 0.0 && l >= 0.0 && g + l > 0.0 && (g + l).is_finite()) {
            return Err(Error::Config(format!(
                "fusion weights must be nonnegative and not both zero (got {g}, {l})"
            )));
        }
        if let Some(w) = &self.fusion.view_weights {
            if w.len() != self.views.len() {
                return Err(Error::Config(format!(
                    "{} view weights given for {} views",
                    w.len(),
                    self.views.len()
                )));
            }
            let total: f64 = w.iter().sum();
            if w.iter().any(|&a| !(a >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config("view weights must be nonnegative and sum to 1".into()));
            }
        }
        if self.clip_prompt.role() != PromptRole::ClipText {
            return Err(Error::Config("clip_prompt must have role clip-text".into()));
        }
        if self.diffusion_prompt.role() != PromptRole::DiffusionStyle {
            return Err(Error::Config("diffusion_prompt must have role diffusion-style".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.limit == Some(0) {
            return Err(Error::Config("limit must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// True when both configs produce the same artifacts; `limit` and `workers` only
    /// change which items are processed and how fast.
    pub fn same_outputs(&self, other: &RunConfig) -> bool {
        let strip = |c: &RunConfig| RunConfig {
            limit: None,
            workers: 1,
            ..c.clone()
        };
        strip(self) == strip(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"beta_face\": 0.001"));
    }

    #[test]
    fn view_specs() {
        assert_eq!(parse_views("single-best").unwrap().len(), 1);
        let v = parse_views("0, 90:10").unwrap();
        assert_eq!((v[0].azimuth, v[0].elevation), (0.0, 35.0));
        assert_eq!((v[1].azimuth, v[1].elevation), (90.0, 10.0));
        assert!(parse_views("nine-view").is_err());
        assert!(parse_views("0,x").is_err());
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut c = RunConfig {
            workers: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c.workers = 2;
        c.fusion.view_weights = Some(vec![0.5, 0.5]);
        assert!(c.validate().is_err());
        c.fusion.view_weights = Some(vec![0.25; 4]);
        c.validate().unwrap();
        c.views.push(c.views[0].clone());
        assert!(c.validate().is_err());
    }

    #[test]
    fn limit_and_workers_do_not_change_outputs() {
        let a = RunConfig::default();
        let b = RunConfig {
            limit: Some(3),
            workers: 8,
            ..a.clone()
        };
        assert!(a.same_outputs(&b));
        let c = RunConfig { seed: 1, ..a.clone() };
        assert!(!a.same_outputs(&c));
    }
}
