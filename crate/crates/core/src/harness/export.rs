use std::fs;
use std::path::PathBuf;

use super::layout::OutputLayout;
use super::manifest::DatasetManifest;
use super::pipeline::{FusedJson, ItemLogits};
use super::predictions::format_score;
use crate::Error;

fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

/// Writes `logits.csv` with columns `object_id,truth,source,s_0..s_{K-1}`: one row per
/// guidance class holding its view-pooled logits (`guidance:<class>`), then one row per
/// fusion strategy (`fused:<strategy>`). Items without artifacts are skipped.
pub fn export_logits(manifest: &DatasetManifest, out_dir: &std::path::Path) -> Result<PathBuf, Error> {
    let layout = OutputLayout::new(out_dir);
    let path = layout.logits_csv();
    let k = manifest.classes.len();
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::format(&path, e))?;
    let mut header = vec!["object_id".to_string(), "truth".into(), "source".into()];
    header.extend((0..k).map(|i| format!("s_{i}")));
    w.write_record(&header).map_err(|e| Error::format(&path, e))?;
    let mut exported = 0;
    for item in &manifest.items {
        let logits_path = layout.logits_json(&item.id);
        if !logits_path.exists() {
            continue;
        }
        let logits: ItemLogits = read_json(&logits_path)?;
        let fused: FusedJson = read_json(&layout.fused_json(&item.id))?;
        if logits.classes != manifest.classes {
            return Err(Error::format(&logits_path, "class list differs from the manifest"));
        }
        let truth = &manifest.classes[item.label];
        let mut emit = |source: String, values: &[f64]| {
            let mut rec = vec![item.id.clone(), truth.clone(), source];
            rec.extend(values.iter().map(|&v| format_score(v)));
            w.write_record(&rec).map_err(|e| Error::format(&path, e))
        };
        for (class, row) in manifest.classes.iter().zip(&logits.maxp) {
            emit(format!("guidance:{class}"), row)?;
        }
        for (strategy, scores) in &fused.scores {
            emit(format!("fused:{strategy}"), scores)?;
        }
        exported += 1;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    if exported == 0 {
        return Err(Error::Dataset(format!(
            "no classified items found under {}",
            out_dir.display()
        )));
    }
    Ok(path)
}
