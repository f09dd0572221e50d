use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{parse_off, parse_points, Shape};
use crate::Error;

/// File extensions read as meshes; everything in [`POINT_EXTENSIONS`] is a raw scan.
pub const MESH_EXTENSIONS: [&str; 1] = ["off"];
pub const POINT_EXTENSIONS: [&str; 3] = ["xyz", "txt", "pts"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub id: String,
    pub path: PathBuf,
    /// Index into [`DatasetManifest::classes`].
    pub label: usize,
}

/// Labeled files of one split, laid out as `root/<class>/<split>/<file>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub split: String,
    pub classes: Vec<String>,
    pub items: Vec<ManifestItem>,
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

fn is_supported(path: &Path) -> bool {
    extension(path).is_some_and(|e| {
        MESH_EXTENSIONS.contains(&e.as_str()) || POINT_EXTENSIONS.contains(&e.as_str())
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>, _>>()?;
    entries.sort();
    Ok(entries)
}

/// Lists `root/<class>/<split>/*` with classes in lexicographic order and files sorted
/// by path. Files with unknown extensions are skipped.
pub fn scan_dataset(root: &Path, split: &str) -> Result<DatasetManifest, Error> {
    if !root.is_dir() {
        return Err(Error::Dataset(format!(
            "dataset root {} is not a directory",
            root.display()
        )));
    }
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    let mut classes = Vec::new();
    let mut items = Vec::new();
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for dir in &class_dirs {
        let class = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Dataset(format!("non UTF-8 class directory {}", dir.display())))?
            .to_string();
        let split_dir = dir.join(split);
        if !split_dir.is_dir() {
            return Err(Error::Dataset(format!(
                "missing split directory {}",
                split_dir.display()
            )));
        }
        let label = classes.len();
        classes.push(class);
        for path in sorted_entries(&split_dir)? {
            if !path.is_file() || !is_supported(&path) {
                if path.is_file() {
                    log::debug!("skipping {}", path.display());
                }
                continue;
            }
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Dataset(format!("non UTF-8 file name {}", path.display())))?
                .to_string();
            if let Some(prev) = seen.insert(id.clone(), path.clone()) {
                return Err(Error::Dataset(format!(
                    "duplicate object id '{id}': {} and {}",
                    prev.display(),
                    path.display()
                )));
            }
            items.push(ManifestItem { id, path, label });
        }
    }
    if items.is_empty() {
        return Err(Error::Dataset(format!(
            "no geometry files under {} for split '{split}'",
            root.display()
        )));
    }
    Ok(DatasetManifest {
        root: root.to_path_buf(),
        split: split.to_string(),
        classes,
        items,
    })
}

impl DatasetManifest {
    /// Reads a manifest saved as `manifest.json` by a previous run.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }

    /// Keeps at most `n` items, taking them round-robin across classes, in manifest order.
    pub fn limited(&self, n: usize) -> DatasetManifest {
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); self.classes.len()];
        for (i, item) in self.items.iter().enumerate() {
            per_class[item.label].push(i);
        }
        let mut keep = Vec::new();
        let mut round = 0;
        while keep.len() < n.min(self.items.len()) {
            for class in &per_class {
                if let Some(&i) = class.get(round) {
                    if keep.len() < n {
                        keep.push(i);
                    }
                }
            }
            round += 1;
        }
        keep.sort_unstable();
        DatasetManifest {
            items: keep.into_iter().map(|i| self.items[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn item(&self, id: &str) -> Option<&ManifestItem> {
        self.items.iter().find(|i| i.id == id)
    }

    /// First item of each class, in class order; classes without items are skipped.
    pub fn first_per_class(&self) -> Vec<&ManifestItem> {
        (0..self.classes.len())
            .filter_map(|c| self.items.iter().find(|i| i.label == c))
            .collect()
    }
}

/// Reads a geometry file, choosing the parser by extension.
pub fn load_shape(path: &Path) -> Result<Shape<f64>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = extension(path).unwrap_or_default();
    let shape = if MESH_EXTENSIONS.contains(&ext.as_str()) {
        Shape::Mesh(parse_off(&text).map_err(|e| Error::format(path, e))?)
    } else if POINT_EXTENSIONS.contains(&ext.as_str()) {
        Shape::Points(parse_points(&text).map_err(|e| Error::format(path, e))?)
    } else {
        return Err(Error::format(path, "unsupported file extension"));
    };
    Ok(shape)
}
