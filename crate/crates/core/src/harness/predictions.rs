use std::fs::{File, OpenOptions};
use std::path::Path;

use crate::zeroshot::Strategy;
use crate::Error;

/// One line of `predictions.csv`: `object_id,strategy,predicted,truth,p_0,...,p_{K-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub object_id: String,
    pub strategy: Strategy,
    pub predicted: String,
    pub truth: String,
    pub scores: Vec<f64>,
}

impl PredictionRow {
    fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.object_id.clone(),
            self.strategy.to_string(),
            self.predicted.clone(),
            self.truth.clone(),
        ];
        r.extend(self.scores.iter().map(|&s| format_score(s)));
        r
    }
}

/// Shortest round-trip text for `v`, switching to exponent form for very small or
/// very large magnitudes.
pub fn format_score(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub fn header(classes: usize) -> Vec<String> {
    let mut h: Vec<String> = ["object_id", "strategy", "predicted", "truth"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..classes).map(|k| format!("p_{k}")));
    h
}

fn parse_record(rec: &csv::StringRecord) -> Result<PredictionRow, String> {
    if rec.len() < 5 {
        return Err(format!("expected at least 5 fields, found {}", rec.len()));
    }
    let strategy = rec[1]
        .parse::<Strategy>()
        .map_err(|e| e.to_string())?;
    let scores = rec
        .iter()
        .skip(4)
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad score '{s}'")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PredictionRow {
        object_id: rec[0].to_string(),
        strategy,
        predicted: rec[2].to_string(),
        truth: rec[3].to_string(),
        scores,
    })
}

/// Reads every row; any malformed line is an error naming its line number.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>, Error> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e))?;
        rows.push(parse_record(&rec).map_err(|m| Error::format(path, format!("line {}: {m}", i + 2)))?);
    }
    Ok(rows)
}

/// Reads the rows of a possibly interrupted file. An unterminated last line and rows
/// whose width differs from the header are dropped.
pub(crate) fn read_predictions_lenient(path: &Path) -> Vec<PredictionRow> {
    let Ok(text) = std::fs::read_to_string(path) else {
        return Vec::new();
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(complete.as_bytes());
    let width = match reader.headers() {
        Ok(h) => h.len(),
        Err(_) => return Vec::new(),
    };
    reader
        .records()
        .filter_map(|r| r.ok())
        .filter_map(|r| {
            let parsed = if r.len() == width {
                parse_record(&r)
            } else {
                Err(format!("expected {width} fields, found {}", r.len()))
            };
            parsed
                .map_err(|e| log::warn!("{}: dropping unreadable row: {e}", path.display()))
                .ok()
        })
        .collect()
}

/// Writes `rows` to a fresh file.
pub fn write_predictions(path: &Path, classes: usize, rows: &[PredictionRow]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e))?;
    w.write_record(header(classes)).map_err(|e| Error::format(path, e))?;
    for row in rows {
        w.write_record(row.record()).map_err(|e| Error::format(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Appends rows to an existing file as items finish.
pub(crate) struct RowAppender {
    writer: csv::Writer<File>,
    path: std::path::PathBuf,
}

impl RowAppender {
    pub(crate) fn open(path: &Path) -> Result<Self, Error> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self {
            writer: csv::Writer::from_writer(file),
            path: path.to_path_buf(),
        })
    }

    pub(crate) fn append(&mut self, rows: &[PredictionRow]) -> Result<(), Error> {
        for row in rows {
            self.writer
                .write_record(row.record())
                .map_err(|e| Error::format(&self.path, e))?;
        }
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}
