use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use super::predictions::PredictionRow;
use crate::zeroshot::Strategy;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub class: String,
    pub total: usize,
    pub correct: usize,
    /// `None` when the class has no evaluated items.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMetrics {
    pub strategy: Strategy,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassAccuracy>,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<String>,
    pub strategies: Vec<StrategyMetrics>,
}

/// Accuracy, per-class accuracy and confusion matrix for each strategy present in
/// `rows`. Every row must name a manifest item with its manifest truth label.
pub fn evaluate(rows: &[PredictionRow], manifest: &DatasetManifest) -> Result<Metrics, Error> {
    let k = manifest.classes.len();
    let class_index = |name: &str| manifest.classes.iter().position(|c| c == name);
    let mut seen = BTreeSet::new();
    let mut strategies: Vec<Strategy> = Vec::new();
    let mut tallies: Vec<Vec<Vec<usize>>> = Vec::new();
    for row in rows {
        let item = manifest.item(&row.object_id).ok_or_else(|| {
            Error::Predictions(format!("prediction for unknown object id '{}'", row.object_id))
        })?;
        if !seen.insert((row.object_id.clone(), row.strategy)) {
            return Err(Error::Predictions(format!(
                "duplicate {} row for '{}'",
                row.strategy, row.object_id
            )));
        }
        let truth = &manifest.classes[item.label];
        if &row.truth != truth {
            return Err(Error::Predictions(format!(
                "'{}' has truth '{}' in the predictions but '{truth}' in the manifest",
                row.object_id, row.truth
            )));
        }
        let predicted = class_index(&row.predicted).ok_or_else(|| {
            Error::Predictions(format!(
                "'{}' predicted unknown class '{}'",
                row.object_id, row.predicted
            ))
        })?;
        let s = match strategies.iter().position(|&s| s == row.strategy) {
            Some(s) => s,
            None => {
                strategies.push(row.strategy);
                tallies.push(vec![vec![0; k]; k]);
                strategies.len() - 1
            }
        };
        tallies[s][item.label][predicted] += 1;
    }
    let strategies = strategies
        .into_iter()
        .zip(tallies)
        .map(|(strategy, confusion)| {
            let total: usize = confusion.iter().flatten().sum();
            let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
            let per_class = (0..k)
                .map(|c| {
                    let n: usize = confusion[c].iter().sum();
                    ClassAccuracy {
                        class: manifest.classes[c].clone(),
                        total: n,
                        correct: confusion[c][c],
                        accuracy: (n > 0).then(|| confusion[c][c] as f64 / n as f64),
                    }
                })
                .collect();
            StrategyMetrics {
                strategy,
                total,
                correct,
                accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
                per_class,
                confusion,
            }
        })
        .collect();
    Ok(Metrics {
        classes: manifest.classes.clone(),
        strategies,
    })
}

impl Metrics {
    pub fn accuracy(&self, strategy: Strategy) -> Option<f64> {
        self.strategies
            .iter()
            .find(|m| m.strategy == strategy)
            .map(|m| m.accuracy)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("metrics serialize");
        text.push('\n');
        text
    }

    /// Plain-text report: overall and per-class accuracy, then the confusion matrices.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let digits = self.classes.len().to_string().len();
        let width = self
            .classes
            .iter()
            .map(|c| c.len() + digits + 1)
            .max()
            .unwrap_or(0)
            .max("truth\\pred".len());
        for m in &self.strategies {
            let _ = writeln!(
                out,
                "strategy {}: accuracy {:.4} ({}/{})",
                m.strategy, m.accuracy, m.correct, m.total
            );
            for c in &m.per_class {
                let acc = c.accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
                let _ = writeln!(out, "  {:<width$}  {acc:>6}  ({}/{})", c.class, c.correct, c.total);
            }
            let _ = write!(out, "  {:<width$}", "truth\\pred");
            for k in 0..self.classes.len() {
                let _ = write!(out, " {k:>4}");
            }
            out.push('\n');
            for (c, row) in m.confusion.iter().enumerate() {
                let _ = write!(out, "  {:<width$}", format!("{c}:{}", self.classes[c]));
                for v in row {
                    let _ = write!(out, " {v:>4}");
                }
                out.push('\n');
            }
        }
        out
    }
}
