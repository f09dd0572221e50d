//! In-memory geometry: indexed polygon meshes and raw point clouds.
//!
//! Both types validate their invariants on construction and are immutable afterwards.

mod normalize;
mod off;
mod points;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::scalar::Real;

pub use normalize::{normalize_unit, Normalization, Normalize};
pub use off::{parse_off, write_off};
pub use points::{parse_points, write_points};

pub type Point3<T> = [T; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },
    #[error("mesh needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {face} has arity {arity}; at least 3 distinct vertices are required")]
    DegenerateFace { face: usize, arity: usize },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
    #[error("degenerate geometry: all points coincide")]
    Degenerate,
}

/// Indexed polygon mesh. Faces keep their original arity; the unique edge set is
/// derived from the face boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<Point3<T>>,
    faces: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
}

impl<T: Real> Mesh<T> {
    pub fn new(vertices: Vec<Point3<T>>, faces: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        for (i, p) in vertices.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for (fi, face) in faces.iter().enumerate() {
            if let Some(&index) = face.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    face: fi,
                    index,
                    count: vertices.len(),
                });
            }
            let distinct: BTreeSet<usize> = face.iter().copied().collect();
            if face.len() < 3 || distinct.len() < 3 {
                return Err(GeometryError::DegenerateFace {
                    face: fi,
                    arity: distinct.len(),
                });
            }
        }
        let edges = derive_edges(&faces);
        Ok(Self {
            vertices,
            faces,
            edges,
        })
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// Unique undirected edges, each stored as `[lo, hi]`, sorted lexicographically.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Same topology with every vertex passed through `f`.
    pub fn map_vertices(&self, mut f: impl FnMut(Point3<T>) -> Point3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
            edges: self.edges.clone(),
        }
    }
}

fn derive_edges(faces: &[Vec<usize>]) -> Vec<[usize; 2]> {
    let mut set = BTreeSet::new();
    for face in faces {
        for (i, &a) in face.iter().enumerate() {
            let b = face[(i + 1) % face.len()];
            if a != b {
                set.insert([a.min(b), a.max(b)]);
            }
        }
    }
    set.into_iter().collect()
}

/// Unordered set of 3D points with an optional source id.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Point3<T>>,
    source_id: Option<String>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Point3<T>>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(Self {
            points,
            source_id: None,
        })
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn map_points(&self, mut f: impl FnMut(Point3<T>) -> Point3<T>) -> Self {
        Self {
            points: self.points.iter().map(|&p| f(p)).collect(),
            source_id: self.source_id.clone(),
        }
    }

    pub fn into_points(self) -> Vec<Point3<T>> {
        self.points
    }
}

/// Geometry loaded from disk: either a mesh (sampled) or a raw scan (k-NN densified).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Mesh(Mesh<T>),
    Points(PointCloud<T>),
}

pub(crate) fn sub<T: Real>(a: Point3<T>, b: Point3<T>) -> Point3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot<T: Real>(a: Point3<T>, b: Point3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Real>(a: Point3<T>, b: Point3<T>) -> Point3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm<T: Real>(a: Point3<T>) -> T {
    dot(a, a).sqrt()
}

/// Area of triangle `abc` by the cross-product formula.
pub fn triangle_area<T: Real>(a: Point3<T>, b: Point3<T>, c: Point3<T>) -> T {
    norm(cross(sub(b, a), sub(c, a))) * T::of(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Vec<Point3<f64>> {
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    }

    #[test]
    fn edges_are_unique_and_sorted() {
        let verts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ];
        let mesh = Mesh::new(verts, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        assert_eq!(mesh.edges(), &[[0, 1], [0, 2], [0, 3], [1, 2], [2, 3]]);
    }

    #[test]
    fn rejects_bad_faces() {
        assert_eq!(
            Mesh::new(tri(), vec![vec![0, 1, 3]]),
            Err(GeometryError::IndexOutOfRange {
                face: 0,
                index: 3,
                count: 3
            })
        );
        assert!(matches!(
            Mesh::new(tri(), vec![vec![0, 1]]),
            Err(GeometryError::DegenerateFace { .. })
        ));
        assert!(matches!(
            Mesh::new(tri(), vec![vec![0, 1, 1]]),
            Err(GeometryError::DegenerateFace { .. })
        ));
        assert_eq!(
            Mesh::new(tri()[..2].to_vec(), vec![]),
            Err(GeometryError::TooFewVertices(2))
        );
    }

    #[test]
    fn cloud_rejects_empty_and_nan() {
        assert_eq!(
            PointCloud::<f64>::new(vec![]),
            Err(GeometryError::EmptyCloud)
        );
        assert_eq!(
            PointCloud::new(vec![[0.0, f64::NAN, 0.0]]),
            Err(GeometryError::NonFinite(0))
        );
    }

    #[test]
    fn unit_right_triangle_area() {
        let t = tri();
        assert_eq!(triangle_area(t[0], t[1], t[2]), 0.5);
    }
}
