//! Plain-text point lists: one `x y z [extras...]` record per line.

use std::fmt::Write;

use super::{GeometryError, PointCloud};
use crate::scalar::Real;

/// Parses whitespace- or comma-separated `x y z` lines. Columns past the third
/// (colors, normals, labels) are ignored; blank lines and `#` comments are skipped.
pub fn parse_points<T: Real>(text: &str) -> Result<PointCloud<T>, GeometryError> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let Some(first) = tokens.next() else {
            continue;
        };
        let mut xyz = [T::zero(); 3];
        let mut columns = std::iter::once(first).chain(tokens);
        for slot in xyz.iter_mut() {
            let token = columns.next().ok_or_else(|| GeometryError::Parse {
                line,
                message: "expected 3 coordinates".into(),
            })?;
            *slot = token.parse().map_err(|_| GeometryError::Parse {
                line,
                message: "non-numeric coordinate".into(),
            })?;
        }
        points.push(xyz);
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    PointCloud::new(points)
}

pub fn write_points<T: Real>(cloud: &PointCloud<T>) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}
