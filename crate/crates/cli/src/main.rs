use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use viewfuse::harness::{
    evaluate, export_logits, parse_views, read_predictions, run_pipeline, scan_dataset,
    DatasetManifest, OutputLayout, RunConfig, RunSummary, Stage,
};
use viewfuse::projection::RasterConfig;
use viewfuse::zeroshot::{PromptRole, PromptTemplate, Strategy};
use viewfuse::Error;

#[derive(Parser)]
#[command(name = "viewfuse", version, about = "Zero-shot 3D shape classification through rendered depth views")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render every object into depth PNGs.
    Project(RunArgs),
    /// Classify depth PNGs produced by `project`.
    Classify(RunArgs),
    /// Project and classify end to end.
    Pipeline(RunArgs),
    /// Score a predictions CSV against the dataset manifest.
    Evaluate(EvaluateArgs),
    /// Write per-guidance and fused logits of classified items to logits.csv.
    ExportLogits(ExportArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Start from this config file; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory laid out as <root>/<class>/<split>/<object>.{off,xyz,txt,pts}.
    #[arg(long)]
    dataset_root: Option<PathBuf>,
    /// Split subdirectory to read [default: test].
    #[arg(long)]
    split: Option<String>,
    /// Preset (single-best, four-view, eight-view) or azimuth[:elevation] list.
    #[arg(long)]
    views: Option<String>,
    /// Edge length per mesh sample.
    #[arg(long)]
    beta_edge: Option<f64>,
    /// Face area per mesh sample.
    #[arg(long)]
    beta_face: Option<f64>,
    /// Neighbours per point when densifying raw scans.
    #[arg(long)]
    knn_k: Option<usize>,
    /// Square depth-map size in pixels.
    #[arg(long)]
    resolution: Option<usize>,
    /// Base URL of the inference service.
    #[arg(long, group = "backend")]
    backend_url: Option<String>,
    /// Hash-based in-process backend.
    #[arg(long, group = "backend")]
    mock: bool,
    /// In-process backend with a known class signal.
    #[arg(long, group = "backend")]
    planted: bool,
    /// Comma-separated fusion strategies: sum, geo, baseline.
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<Strategy>>,
    /// w_glo / w_loc for the sum strategy (w_loc is fixed at 1).
    #[arg(long)]
    w_ratio: Option<f64>,
    /// Text prompt template; `[C]` marks the class name.
    #[arg(long)]
    clip_prompt: Option<String>,
    /// Style-transfer prompt template; `[C]` marks the class name.
    #[arg(long)]
    diffusion_prompt: Option<String>,
    /// Encode the depth maps directly instead of style-transferred images.
    #[arg(long)]
    skip_diffusion: bool,
    /// Seeds sampling, style transfer and the in-process backends.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Process at most N objects, spread across classes.
    #[arg(long = "limit-N")]
    limit: Option<usize>,
    /// Objects processed in parallel.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run directory holding predictions.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Predictions file; defaults to <out-dir>/predictions.csv.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Rescan the dataset instead of reading <out-dir>/manifest.json.
    #[arg(long)]
    dataset_root: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Run(e.into())
        }
    }
}

fn config_error(message: impl std::fmt::Display) -> Failure {
    Failure::Config(anyhow::anyhow!("{message}"))
}

fn is_scanobjectnn(root: &Path) -> bool {
    root.file_name()
        .map(|n| n.to_string_lossy().to_lowercase().contains("scanobjectnn"))
        .unwrap_or(false)
}

fn build_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut c = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.dataset_root {
        c.dataset_root = v.clone();
    }
    if let Some(v) = &args.split {
        c.split = v.clone();
    }
    if let Some(v) = &args.views {
        c.views = parse_views(v)?;
    }
    if let Some(v) = args.beta_edge {
        c.sampling.beta_edge = v;
    }
    if let Some(v) = args.beta_face {
        c.sampling.beta_face = v;
    }
    if let Some(v) = args.knn_k {
        c.knn_k = v;
    }
    if let Some(n) = args.resolution {
        c.raster = RasterConfig {
            width: n,
            height: n,
            ..c.raster
        };
    }
    if let Some(url) = &args.backend_url {
        c.backend.endpoint = url.clone();
    } else if args.mock {
        c.backend.endpoint = "mock".into();
    } else if args.planted {
        c.backend.endpoint = "planted".into();
    }
    if let Some(s) = &args.strategy {
        c.fusion.strategies = s.clone();
    }
    if let Some(r) = args.w_ratio {
        c.fusion.w_glo = r;
        c.fusion.w_loc = 1.0;
    }
    if let Some(p) = &args.clip_prompt {
        c.clip_prompt = PromptTemplate::new(p.clone(), PromptRole::ClipText).map_err(config_error)?;
    }
    if let Some(p) = &args.diffusion_prompt {
        c.diffusion_prompt =
            PromptTemplate::new(p.clone(), PromptRole::DiffusionStyle).map_err(config_error)?;
    } else if args.config.is_none() && is_scanobjectnn(&c.dataset_root) {
        c.diffusion_prompt = PromptTemplate::diffusion_occluded();
    }
    if args.skip_diffusion {
        c.skip_diffusion = true;
    }
    if let Some(s) = args.seed {
        c.seed = s;
        c.sampling.seed = s;
        c.backend.mock_seed = s;
    }
    if let Some(d) = &args.out_dir {
        c.out_dir = d.clone();
    }
    if args.limit.is_some() {
        c.limit = args.limit;
    }
    if let Some(w) = args.workers {
        c.workers = w;
    }
    c.validate()?;
    Ok(c)
}

fn report(summary: &RunSummary) -> ExitCode {
    if let Some(metrics) = &summary.metrics {
        print!("{}", metrics.table());
    }
    println!(
        "processed {}, skipped {}, failed {}",
        summary.processed,
        summary.skipped,
        summary.failures.len()
    );
    for f in &summary.failures {
        eprintln!("failed {}: {}", f.id, f.message);
    }
    if summary.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Project(args) => run_stage(&args, Stage::Project),
        Command::Classify(args) => run_stage(&args, Stage::Classify),
        Command::Pipeline(args) => run_stage(&args, Stage::Full),
        Command::Evaluate(args) => {
            let manifest = match &args.dataset_root {
                Some(root) => scan_dataset(root, &args.split)?,
                None => DatasetManifest::load(&OutputLayout::new(&args.out_dir).manifest())?,
            };
            let input = args
                .input
                .unwrap_or_else(|| OutputLayout::new(&args.out_dir).predictions_csv());
            let rows = read_predictions(&input)?;
            let metrics = evaluate(&rows, &manifest)?;
            let path = OutputLayout::new(&args.out_dir).metrics_json();
            std::fs::write(&path, metrics.to_json())
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Run)?;
            print!("{}", metrics.table());
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportLogits(args) => {
            let manifest = DatasetManifest::load(&OutputLayout::new(&args.out_dir).manifest())?;
            let path = export_logits(&manifest, &args.out_dir)?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_stage(args: &RunArgs, stage: Stage) -> Result<ExitCode, Failure> {
    let config = build_config(args)?;
    let manifest = scan_dataset(&config.dataset_root, &config.split).map_err(|e| Failure::Config(e.into()))?;
    let summary = run_pipeline(&manifest, &config, stage)?;
    Ok(report(&summary))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
