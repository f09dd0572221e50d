//! Object File Format (OFF) reader and writer.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{GeometryError, Mesh, Point3};
use crate::scalar::Real;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line with comments stripped, as (1-based line number, tokens).
    fn next_data(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        line,
        message: message.into(),
    }
}

fn number<N: std::str::FromStr>(token: &str, line: usize) -> Result<N, GeometryError> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("non-numeric token '{token}'")))
}

/// Parses an OFF mesh.
///
/// Accepts the header on its own line, followed by it on the same line (`OFF 8 6 0`),
/// or fused with the first count (`OFF8 6 0`). The file's edge count is ignored; edges
/// are derived from the faces. `#` starts a comment.
pub fn parse_off<T: Real>(text: &str) -> Result<Mesh<T>, GeometryError> {
    let mut lines = Lines::new(text);
    let (header_line, header) = lines
        .next_data()
        .ok_or_else(|| parse_err(1, "missing OFF header"))?;

    let first = header[0];
    let rest = first
        .strip_prefix("OFF")
        .ok_or_else(|| parse_err(header_line, format!("malformed header '{first}'")))?;
    let mut counts: Vec<&str> = Vec::new();
    if !rest.is_empty() {
        counts.push(rest);
    }
    counts.extend_from_slice(&header[1..]);
    let mut counts_line = header_line;
    if counts.is_empty() {
        let (line, tokens) = lines
            .next_data()
            .ok_or_else(|| parse_err(lines.last.max(1), "missing vertex/face counts"))?;
        counts = tokens;
        counts_line = line;
    }
    if counts.len() < 2 {
        return Err(parse_err(counts_line, "malformed header: expected 'V F E' counts"));
    }
    let n_vertices: usize = number(counts[0], counts_line)?;
    let n_faces: usize = number(counts[1], counts_line)?;
    if let Some(e) = counts.get(2) {
        let _: usize = number(e, counts_line)?;
    }

    let mut vertices: Vec<Point3<T>> = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (line, tokens) = lines
            .next_data()
            .ok_or_else(|| parse_err(lines.last, "unexpected end of vertex block"))?;
        if tokens.len() < 3 {
            return Err(parse_err(line, "vertex line needs 3 coordinates"));
        }
        vertices.push([
            number(tokens[0], line)?,
            number(tokens[1], line)?,
            number(tokens[2], line)?,
        ]);
    }

    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (line, tokens) = lines
            .next_data()
            .ok_or_else(|| parse_err(lines.last, "unexpected end of face block"))?;
        let arity: usize = number(tokens[0], line)?;
        if arity < 3 {
            return Err(parse_err(line, format!("face arity {arity} < 3")));
        }
        if tokens.len() < arity + 1 {
            return Err(parse_err(
                line,
                format!("face declares {arity} indices but lists {}", tokens.len() - 1),
            ));
        }
        let mut face = Vec::with_capacity(arity);
        for t in &tokens[1..=arity] {
            let index: usize = number(t, line)?;
            if index >= n_vertices {
                return Err(parse_err(
                    line,
                    format!("vertex index {index} out of range ({n_vertices} vertices)"),
                ));
            }
            face.push(index);
        }
        if face.iter().collect::<BTreeSet<_>>().len() < 3 {
            return Err(parse_err(line, "face has fewer than 3 distinct vertices"));
        }
        faces.push(face);
    }

    Mesh::new(vertices, faces)
}

/// Serializes a mesh as OFF using the shortest decimal form that parses back to the
/// same value, so `parse_off(write_off(m)) == m` exactly.
pub fn write_off<T: Real>(mesh: &Mesh<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(out, "{} {} 0", mesh.vertices().len(), mesh.faces().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = write!(out, "{}", f.len());
        for i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n";

    #[test]
    fn tetrahedron() {
        let m: Mesh<f64> = parse_off(TETRA).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.faces().len(), 4);
        assert_eq!(m.edges().len(), 6);
    }

    #[test]
    fn single_triangle_has_three_edges() {
        let m: Mesh<f64> = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(m.edges().len(), 3);
    }

    #[test]
    fn header_variants() {
        let body = "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        for header in ["OFF\n3 1 0\n", "OFF 3 1 0\n", "OFF3 1 0\n", "# made by hand\nOFF\n\n3 1 0\n"] {
            let m: Mesh<f32> = parse_off(&format!("{header}{body}")).unwrap();
            assert_eq!(m.faces().len(), 1, "{header:?}");
        }
    }

    #[test]
    fn short_vertex_block() {
        let text = "OFF\n5 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n";
        let err = parse_off::<f64>(text).unwrap_err();
        assert_eq!(err.to_string(), "unexpected end of vertex block at line 6");
    }

    #[test]
    fn error_lines() {
        let bad_index = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n";
        assert_eq!(
            parse_off::<f64>(bad_index).unwrap_err(),
            GeometryError::Parse {
                line: 6,
                message: "vertex index 9 out of range (3 vertices)".into()
            }
        );
        let arity = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n";
        assert_eq!(
            parse_off::<f64>(arity).unwrap_err().to_string(),
            "face arity 2 < 3 at line 6"
        );
        let nan = "OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n";
        assert_eq!(
            parse_off::<f64>(nan).unwrap_err().to_string(),
            "non-numeric token 'x' at line 4"
        );
        assert!(matches!(
            parse_off::<f64>("PLY\n3 1 0\n"),
            Err(GeometryError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn quads_are_kept() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let m: Mesh<f64> = parse_off(text).unwrap();
        assert_eq!(m.faces()[0], vec![0, 1, 2, 3]);
        assert_eq!(m.edges().len(), 4);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let m: Mesh<f64> = parse_off(TETRA).unwrap();
        let m = m.map_vertices(|p| [p[0] * 0.1 + 1e-7, p[1] / 3.0, p[2] - 2.5]);
        let back: Mesh<f64> = parse_off(&write_off(&m)).unwrap();
        assert_eq!(back, m);
    }
}
