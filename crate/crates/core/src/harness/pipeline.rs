use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use image::{DynamicImage, GrayImage};
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::evaluate::{evaluate, Metrics};
use super::layout::OutputLayout;
use super::manifest::{load_shape, DatasetManifest, ManifestItem};
use super::pool::parallel_map;
use super::predictions::{read_predictions_lenient, write_predictions, PredictionRow, RowAppender};
use crate::backend::{
    decode_png, encode_png, seeded_hash, Backend, MockBackend, PlantedBackend, RemoteBackend,
};
use crate::geometry::{normalize_unit, Normalization, Shape};
use crate::projection::{maxpool_densify, project, to_image8};
use crate::sampling::{knn_densify, sample_mesh, SamplingParams};
use crate::zeroshot::{
    aggregate_probability_matrix, build_text_classifier, embedding_logits, fuse_baseline,
    fuse_strategy_geo, fuse_strategy_sum, predict, uniform_weights, Strategy, TextClassifier,
};
use crate::Error;

/// How far [`run_pipeline`] goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Geometry to depth PNGs.
    Project,
    /// Depth PNGs already on disk to predictions.
    Classify,
    /// Both.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemFailure {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub processed: usize,
    /// Items whose predictions were already present in the output directory.
    pub skipped: usize,
    pub failures: Vec<ItemFailure>,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSummary {
    pub label: String,
    pub azimuth: f64,
    pub elevation: f64,
    pub nonzero_pixels: usize,
    pub max_intensity: f64,
}

/// Sidecar written next to an object's depth PNGs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSidecar {
    pub id: String,
    pub source: String,
    pub normalization: Normalization,
    pub points: usize,
    pub views: Vec<ViewSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemLogits {
    pub classes: Vec<String>,
    pub views: Vec<String>,
    pub logit_scale: f64,
    /// `logits[view][guidance][class]`.
    pub logits: Vec<Vec<Vec<f64>>>,
    /// Max over views: `maxp[guidance][class]`.
    pub maxp: Vec<Vec<f64>>,
    /// Per-view logits of the unstyled depth images, when the baseline ran.
    pub baseline: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityJson {
    pub classes: Vec<String>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedJson {
    pub classes: Vec<String>,
    pub truth: String,
    pub scores: BTreeMap<Strategy, Vec<f64>>,
    pub predicted: BTreeMap<Strategy, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunInfo {
    model: String,
    dataset: String,
    split: String,
    classes: Vec<String>,
    logit_scale: f64,
    items: usize,
}

/// Seed for the style transfer of one (object, view, guidance class) triple.
pub fn diffusion_seed(run_seed: u64, object_id: &str, view: &str, class: &str) -> u64 {
    let key = format!("{object_id}\0{view}\0{class}");
    seeded_hash(run_seed, "diffusion", key.as_bytes())
}

/// Sampling seed for one object.
pub fn sampling_seed(run_seed: u64, object_id: &str) -> u64 {
    seeded_hash(run_seed, "sampling", object_id.as_bytes())
}

/// Builds the backend named by `config.backend.endpoint`. The planted double gets one
/// silhouette prototype per view from the first loadable item of every class.
pub fn make_backend(config: &RunConfig, manifest: &DatasetManifest) -> Result<Arc<dyn Backend>, Error> {
    let b = &config.backend;
    b.validate()?;
    Ok(match b.endpoint.as_str() {
        "mock" => Arc::new(MockBackend::new(b.mock_dim, b.mock_seed)?),
        "planted" => {
            let planted = PlantedBackend::new(&manifest.classes, b.mock_dim, b.mock_seed)?;
            for (label, class) in manifest.classes.iter().enumerate() {
                let projected = manifest
                    .items
                    .iter()
                    .filter(|i| i.label == label)
                    .find_map(|item| match project_item(item, config) {
                        Ok((images, _)) => Some(images),
                        Err(e) => {
                            log::warn!("{}: not usable as a prototype: {e}", item.id);
                            None
                        }
                    });
                for image in projected.into_iter().flatten() {
                    planted.register_prototype(class, &DynamicImage::ImageLuma8(image))?;
                }
            }
            Arc::new(planted)
        }
        _ => {
            let remote = RemoteBackend::new(b)?;
            let health = remote.health()?;
            log::info!("backend {} (model {}, dim {})", b.endpoint, health.model, health.dim);
            Arc::new(remote)
        }
    })
}

/// Parses, normalizes, densifies and renders one object; returns one 8-bit image per
/// configured view.
pub fn project_item(
    item: &ManifestItem,
    config: &RunConfig,
) -> Result<(Vec<GrayImage>, DepthSidecar), Error> {
    let params = SamplingParams {
        seed: sampling_seed(config.sampling.seed, &item.id),
        ..config.sampling
    };
    let (cloud, normalization) = match load_shape(&item.path)? {
        Shape::Mesh(mesh) => {
            let (mesh, n) = normalize_unit(&mesh)?;
            (sample_mesh(&mesh, &params)?, n)
        }
        Shape::Points(points) => {
            let (points, n) = normalize_unit(&points)?;
            (knn_densify(&points, config.knn_k, &params)?, n)
        }
    };
    let cloud = cloud.with_source_id(item.id.clone());
    let mut images = Vec::with_capacity(config.views.len());
    let mut views = Vec::with_capacity(config.views.len());
    for view in &config.views {
        let dense = maxpool_densify(&project(&cloud, view, &config.raster)?);
        images.push(to_image8(&dense)?);
        views.push(ViewSummary {
            label: view.label.clone(),
            azimuth: view.azimuth,
            elevation: view.elevation,
            nonzero_pixels: dense.nonzero_count(),
            max_intensity: dense.data().iter().copied().fold(0.0, f64::max),
        });
    }
    let sidecar = DepthSidecar {
        id: item.id.clone(),
        source: item.path.display().to_string(),
        normalization,
        points: cloud.len(),
        views,
    };
    Ok((images, sidecar))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn write_png(path: &Path, image: DynamicImage) -> Result<(), Error> {
    write_bytes(path, &encode_png(&image)?)
}

fn store_depth(
    layout: &OutputLayout,
    config: &RunConfig,
    images: &[GrayImage],
    sidecar: &DepthSidecar,
) -> Result<(), Error> {
    for (view, image) in config.views.iter().zip(images) {
        write_png(
            &layout.depth_png(&sidecar.id, &view.label),
            DynamicImage::ImageLuma8(image.clone()),
        )?;
    }
    write_json(&layout.depth_meta(&sidecar.id), sidecar)
}

fn load_depth(layout: &OutputLayout, config: &RunConfig, id: &str) -> Result<Vec<GrayImage>, Error> {
    config
        .views
        .iter()
        .map(|view| {
            let path = layout.depth_png(id, &view.label);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            Ok(decode_png(&bytes)
                .map_err(|e| Error::format(&path, e))?
                .to_luma8())
        })
        .collect()
}

struct Classifier<'a> {
    config: &'a RunConfig,
    layout: &'a OutputLayout,
    backend: &'a dyn Backend,
    text: TextClassifier<f64>,
    prompts: Vec<String>,
}

impl Classifier<'_> {
    fn logits(&self, image: &DynamicImage) -> Result<Vec<f64>, Error> {
        let e = self.backend.encode_image(image)?;
        Ok(embedding_logits(&e, &self.text, self.config.backend.logit_scale)?)
    }

    /// Scores one object from its depth images and writes its item artifacts.
    fn classify(
        &self,
        item: &ManifestItem,
        images: &[GrayImage],
    ) -> Result<Vec<PredictionRow>, Error> {
        let config = self.config;
        let classes = self.text.classes();
        let (m, k) = (images.len(), classes.len());
        let threads = config.backend.max_inflight;
        let strategies = &config.fusion.strategies;

        let wants_baseline = strategies.contains(&Strategy::Baseline);
        let plain: Option<Vec<Vec<f64>>> = if config.skip_diffusion || wants_baseline {
            Some(
                parallel_map(m, threads, |i| {
                    self.logits(&DynamicImage::ImageLuma8(images[i].clone()))
                })
                .into_iter()
                .collect::<Result<_, _>>()?,
            )
        } else {
            None
        };

        let logits: Vec<Vec<Vec<f64>>> = if config.skip_diffusion {
            let plain = plain.as_ref().expect("computed above");
            plain.iter().map(|row| vec![row.clone(); k]).collect()
        } else {
            let flat = parallel_map(m * k, threads, |t| {
                let (i, j) = (t / k, t % k);
                let view = &config.views[i].label;
                let seed = diffusion_seed(config.seed, &item.id, view, &classes[j]);
                let styled = self
                    .backend
                    .style_transfer(&images[i], &self.prompts[j], seed)?;
                let styled = DynamicImage::ImageRgb8(styled);
                write_png(
                    &self.layout.styled_png(&item.id, view, &classes[j]),
                    styled.clone(),
                )?;
                self.logits(&styled)
            })
            .into_iter()
            .collect::<Result<Vec<_>, Error>>()?;
            flat.chunks(k).map(|c| c.to_vec()).collect()
        };

        let p = aggregate_probability_matrix(&logits)?;
        let maxp = crate::zeroshot::max_over_views(&logits)?;
        let mut scores = BTreeMap::new();
        let mut predicted = BTreeMap::new();
        let mut rows = Vec::with_capacity(strategies.len());
        for &s in strategies {
            let fused = match s {
                Strategy::Sum => fuse_strategy_sum(&p, config.fusion.w_glo, config.fusion.w_loc)?,
                Strategy::Geo => fuse_strategy_geo(&p)?,
                Strategy::Baseline => {
                    let alpha = config
                        .fusion
                        .view_weights
                        .clone()
                        .unwrap_or_else(|| uniform_weights(m));
                    fuse_baseline(plain.as_ref().expect("computed above"), &alpha)?
                }
            };
            let winner = classes[predict(&fused)?].clone();
            rows.push(PredictionRow {
                object_id: item.id.clone(),
                strategy: s,
                predicted: winner.clone(),
                truth: classes[item.label].clone(),
                scores: fused.clone(),
            });
            scores.insert(s, fused);
            predicted.insert(s, winner);
        }

        write_json(
            &self.layout.logits_json(&item.id),
            &ItemLogits {
                classes: classes.to_vec(),
                views: config.views.iter().map(|v| v.label.clone()).collect(),
                logit_scale: config.backend.logit_scale,
                logits,
                maxp,
                baseline: plain.filter(|_| wants_baseline),
            },
        )?;
        write_json(
            &self.layout.probability_json(&item.id),
            &ProbabilityJson {
                classes: classes.to_vec(),
                p: p.rows().to_vec(),
            },
        )?;
        write_json(
            &self.layout.fused_json(&item.id),
            &FusedJson {
                classes: classes.to_vec(),
                truth: classes[item.label].clone(),
                scores,
                predicted,
            },
        )?;
        Ok(rows)
    }
}

fn prepare_out_dir(
    layout: &OutputLayout,
    manifest: &DatasetManifest,
    config: &RunConfig,
) -> Result<(), Error> {
    let root = layout.root();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let config_path = layout.config();
    if config_path.exists() {
        let previous = RunConfig::load(&config_path)?;
        if !previous.same_outputs(config) {
            return Err(Error::Config(format!(
                "{} holds results of a different configuration; use a fresh output directory",
                root.display()
            )));
        }
    }
    write_json(&config_path, config)?;
    write_json(&layout.manifest(), manifest)
}

/// Runs `stage` over the manifest (subset by `config.limit`), writing every artifact
/// under `config.out_dir`. Per-item failures are collected, not fatal.
pub fn run_pipeline(
    manifest: &DatasetManifest,
    config: &RunConfig,
    stage: Stage,
) -> Result<RunSummary, Error> {
    config.validate()?;
    let backend = if stage == Stage::Project {
        None
    } else {
        Some(make_backend(config, manifest)?)
    };
    run_with_backend(manifest, config, stage, backend.as_deref())
}

/// [`run_pipeline`] with a caller-supplied backend (required unless `stage` is
/// [`Stage::Project`]).
pub fn run_with_backend(
    manifest: &DatasetManifest,
    config: &RunConfig,
    stage: Stage,
    backend: Option<&dyn Backend>,
) -> Result<RunSummary, Error> {
    config.validate()?;
    let layout = OutputLayout::new(&config.out_dir);
    prepare_out_dir(&layout, manifest, config)?;
    let selected = match config.limit {
        Some(n) => manifest.limited(n),
        None => manifest.clone(),
    };

    if stage == Stage::Project {
        let results = parallel_map(selected.items.len(), config.workers, |i| {
            let item = &selected.items[i];
            project_item(item, config).and_then(|(images, sidecar)| {
                store_depth(&layout, config, &images, &sidecar)
            })
        });
        let failures = collect_failures(&selected, results);
        return Ok(RunSummary {
            processed: selected.items.len() - failures.len(),
            skipped: 0,
            failures,
            metrics: None,
        });
    }

    let backend = backend.ok_or_else(|| Error::Config("classification needs a backend".into()))?;
    let classes = &manifest.classes;
    let text = build_text_classifier::<f64>(classes, &config.clip_prompt, backend)?;
    write_json(
        &layout.run_info(),
        &RunInfo {
            model: backend.model_id(),
            dataset: manifest
                .root
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            split: manifest.split.clone(),
            classes: classes.clone(),
            logit_scale: config.backend.logit_scale,
            items: selected.items.len(),
        },
    )?;
    let classifier = Classifier {
        config,
        layout: &layout,
        backend,
        prompts: classes
            .iter()
            .map(|c| config.diffusion_prompt.render(c))
            .collect(),
        text,
    };

    // Resume: keep rows of items whose every strategy is already recorded.
    let csv_path = layout.predictions_csv();
    let wanted: BTreeSet<Strategy> = config.fusion.strategies.iter().copied().collect();
    let mut previous = if csv_path.exists() {
        read_predictions_lenient(&csv_path)
    } else {
        Vec::new()
    };
    let mut per_id: BTreeMap<String, BTreeSet<Strategy>> = BTreeMap::new();
    for row in &previous {
        per_id.entry(row.object_id.clone()).or_default().insert(row.strategy);
    }
    let complete: BTreeSet<String> = per_id
        .into_iter()
        .filter(|(id, s)| s.is_superset(&wanted) && manifest.item(id).is_some())
        .map(|(id, _)| id)
        .collect();
    previous.retain(|r| complete.contains(&r.object_id) && wanted.contains(&r.strategy));
    write_predictions(&csv_path, classes.len(), &previous)?;
    let appender = Mutex::new(RowAppender::open(&csv_path)?);

    let todo: Vec<&ManifestItem> = selected
        .items
        .iter()
        .filter(|i| !complete.contains(&i.id))
        .collect();
    let skipped = selected.items.len() - todo.len();
    let results = parallel_map(todo.len(), config.workers, |t| {
        let item = todo[t];
        let images = match stage {
            Stage::Classify => load_depth(&layout, config, &item.id)?,
            _ => {
                let (images, sidecar) = project_item(item, config)?;
                store_depth(&layout, config, &images, &sidecar)?;
                images
            }
        };
        let rows = classifier.classify(item, &images)?;
        appender.lock().expect("csv lock poisoned").append(&rows)?;
        log::info!("{}: {}", item.id, rows.iter().map(|r| format!("{}={}", r.strategy, r.predicted)).collect::<Vec<_>>().join(" "));
        Ok(rows)
    });
    drop(appender);

    let mut failures = Vec::new();
    let mut rows = previous;
    for (item, result) in todo.iter().zip(results) {
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => {
                let e: Error = e;
                log::error!("{}: {e}", item.id);
                failures.push(ItemFailure {
                    id: item.id.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    let order: BTreeMap<&str, usize> = manifest
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.id.as_str(), i))
        .collect();
    let strategy_rank = |s: Strategy| config.fusion.strategies.iter().position(|&x| x == s);
    rows.sort_by_key(|r| (order.get(r.object_id.as_str()).copied(), strategy_rank(r.strategy)));
    write_predictions(&csv_path, classes.len(), &rows)?;
    let metrics = evaluate(&rows, manifest)?;
    write_json(&layout.metrics_json(), &metrics)?;
    Ok(RunSummary {
        processed: todo.len() - failures.len(),
        skipped,
        failures,
        metrics: Some(metrics),
    })
}

fn collect_failures(manifest: &DatasetManifest, results: Vec<Result<(), Error>>) -> Vec<ItemFailure> {
    manifest
        .items
        .iter()
        .zip(results)
        .filter_map(|(item, r)| {
            r.err().map(|e| {
                log::error!("{}: {e}", item.id);
                ItemFailure {
                    id: item.id.clone(),
                    message: e.to_string(),
                }
            })
        })
        .collect()
}
