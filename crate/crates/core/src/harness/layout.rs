use std::path::{Path, PathBuf};

/// File names under the output directory.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn run_info(&self) -> PathBuf {
        self.root.join("run.json")
    }

    pub fn depth_dir(&self) -> PathBuf {
        self.root.join("depth")
    }

    pub fn depth_png(&self, id: &str, view: &str) -> PathBuf {
        self.depth_dir().join(format!("{id}__{view}.png"))
    }

    pub fn depth_meta(&self, id: &str) -> PathBuf {
        self.depth_dir().join(format!("{id}.json"))
    }

    pub fn styled_png(&self, id: &str, view: &str, class: &str) -> PathBuf {
        self.root
            .join("styled")
            .join(id)
            .join(format!("{view}__{class}.png"))
    }

    pub fn item_dir(&self, id: &str) -> PathBuf {
        self.root.join("items").join(id)
    }

    pub fn logits_json(&self, id: &str) -> PathBuf {
        self.item_dir(id).join("logits.json")
    }

    pub fn probability_json(&self, id: &str) -> PathBuf {
        self.item_dir(id).join("P.json")
    }

    pub fn fused_json(&self, id: &str) -> PathBuf {
        self.item_dir(id).join("fused.json")
    }

    pub fn predictions_csv(&self) -> PathBuf {
        self.root.join("predictions.csv")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.root.join("metrics.json")
    }

    pub fn logits_csv(&self) -> PathBuf {
        self.root.join("logits.csv")
    }
}
