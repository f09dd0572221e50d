//! Dataset scanning, end-to-end runs with persisted artifacts, and scoring.
//!
//! Output directory layout (see [`OutputLayout`]):
//!
//! ```text
//! config.json  manifest.json  run.json  predictions.csv  metrics.json  logits.csv
//! depth/<id>__<view>.png  depth/<id>.json
//! styled/<id>/<view>__<class>.png
//! items/<id>/logits.json  items/<id>/P.json  items/<id>/fused.json
//! ```

mod config;
mod evaluate;
mod export;
mod layout;
mod manifest;
mod pipeline;
mod pool;
mod predictions;
pub mod synthetic;

pub use config::{parse_views, FusionConfig, RunConfig, DEFAULT_KNN_K};
pub use evaluate::{evaluate, ClassAccuracy, Metrics, StrategyMetrics};
pub use export::export_logits;
pub use layout::OutputLayout;
pub use manifest::{
    load_shape, scan_dataset, DatasetManifest, ManifestItem, MESH_EXTENSIONS, POINT_EXTENSIONS,
};
pub use pipeline::{
    diffusion_seed, make_backend, project_item, run_pipeline, run_with_backend, sampling_seed,
    DepthSidecar, FusedJson, ItemFailure, ItemLogits, ProbabilityJson, RunSummary, Stage,
    ViewSummary,
};
pub use predictions::{format_score, read_predictions, write_predictions, PredictionRow};
