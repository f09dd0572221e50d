//! Length- and area-proportional surface sampling, plus k-NN triangle densification
//! for raw scans.
//!
//! Every primitive draws from its own ChaCha8 stream keyed by `(seed, primitive)`,
//! so the output depends only on the input and the seed, never on evaluation order.

mod knn;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{triangle_area, Mesh, Point3, PointCloud};
use crate::scalar::Real;

pub use knn::KdTree;

const EDGE_STREAMS: u64 = 0;
const FACE_STREAMS: u64 = 1 << 62;
const KNN_STREAMS: u64 = 2 << 62;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid sampling parameters: {0}")]
    InvalidParams(String),
    #[error("not enough points for k-NN: have {points}, need more than k = {k}")]
    TooFewPoints { points: usize, k: usize },
    #[error("k-NN densification needs k >= 2, got {0}")]
    InvalidK(usize),
}

/// Sampling densities: one edge sample per `beta_edge` of length and one face sample
/// per `beta_face` of area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub beta_edge: f64,
    pub beta_face: f64,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            beta_edge: 0.01,
            beta_face: 0.001,
            seed: 0,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if !(self.beta_edge > 0.0 && self.beta_edge.is_finite()) {
            return Err(SamplingError::InvalidParams(format!(
                "beta_edge must be positive, got {}",
                self.beta_edge
            )));
        }
        if !(self.beta_face > 0.0 && self.beta_face.is_finite()) {
            return Err(SamplingError::InvalidParams(format!(
                "beta_face must be positive, got {}",
                self.beta_face
            )));
        }
        Ok(())
    }
}

/// Number of samples a primitive of the given length or area receives.
pub fn sample_count(measure: f64, beta: f64) -> usize {
    ((measure / beta).ceil() as usize).max(1)
}

/// Which primitive a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primitive {
    Edge(usize),
    Face(usize),
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::of(rng.random::<f64>())
}

fn lerp<T: Real>(a: Point3<T>, b: Point3<T>, t: T) -> Point3<T> {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Uniform point in triangle `abc` via the square-root barycentric mapping.
fn point_in_triangle<T: Real>(
    rng: &mut ChaCha8Rng,
    a: Point3<T>,
    b: Point3<T>,
    c: Point3<T>,
) -> Point3<T> {
    let r1 = uniform::<T>(rng).sqrt();
    let r2 = uniform::<T>(rng);
    let wa = T::one() - r1;
    let wb = r1 * (T::one() - r2);
    let wc = r1 * r2;
    [
        wa * a[0] + wb * b[0] + wc * c[0],
        wa * a[1] + wb * b[1] + wc * c[1],
        wa * a[2] + wb * b[2] + wc * c[2],
    ]
}

/// Samples a polygon (fan-triangulated around its first vertex): `count` points spread
/// over the fan triangles in proportion to their area.
fn sample_polygon<T: Real>(
    rng: &mut ChaCha8Rng,
    corners: &[Point3<T>],
    params: &SamplingParams,
    out: &mut Vec<Point3<T>>,
) {
    let areas: Vec<T> = (1..corners.len() - 1)
        .map(|i| triangle_area(corners[0], corners[i], corners[i + 1]))
        .collect();
    let total = areas.iter().fold(T::zero(), |s, &a| s + a);
    let count = sample_count(total.as_f64(), params.beta_face);
    if !(total > T::zero()) {
        out.push(corners[0]);
        return;
    }
    for _ in 0..count {
        let mut pick = uniform::<T>(rng) * total;
        let mut tri = areas.len() - 1;
        for (i, &a) in areas.iter().enumerate() {
            if pick < a {
                tri = i;
                break;
            }
            pick = pick - a;
        }
        out.push(point_in_triangle(
            rng,
            corners[0],
            corners[tri + 1],
            corners[tri + 2],
        ));
    }
}

/// Samples every edge and face of `mesh`, tagging each point with its source primitive.
/// Edges come first (in [`Mesh::edges`] order), then faces in file order.
pub fn sample_mesh_tagged<T: Real>(
    mesh: &Mesh<T>,
    params: &SamplingParams,
) -> Result<Vec<(Primitive, Point3<T>)>, SamplingError> {
    params.validate()?;
    let v = mesh.vertices();
    let mut tagged = Vec::new();
    let mut buf = Vec::new();

    for (i, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (v[a], v[b]);
        let d = crate::geometry::sub(pb, pa);
        let len = crate::geometry::dot(d, d).sqrt();
        if !(len > T::zero()) {
            tagged.push((Primitive::Edge(i), pa));
            continue;
        }
        let mut rng = stream(params.seed, EDGE_STREAMS + i as u64);
        for _ in 0..sample_count(len.as_f64(), params.beta_edge) {
            let t = uniform::<T>(&mut rng);
            tagged.push((Primitive::Edge(i), lerp(pa, pb, t)));
        }
    }

    for (i, face) in mesh.faces().iter().enumerate() {
        let corners: Vec<Point3<T>> = face.iter().map(|&j| v[j]).collect();
        let mut rng = stream(params.seed, FACE_STREAMS + i as u64);
        buf.clear();
        sample_polygon(&mut rng, &corners, params, &mut buf);
        tagged.extend(buf.iter().map(|&p| (Primitive::Face(i), p)));
    }
    Ok(tagged)
}

/// Dense point cloud drawn from the edges and faces of `mesh`.
pub fn sample_mesh<T: Real>(
    mesh: &Mesh<T>,
    params: &SamplingParams,
) -> Result<PointCloud<T>, SamplingError> {
    let points = sample_mesh_tagged(mesh, params)?
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    Ok(PointCloud::new(points).expect("a valid mesh yields finite samples"))
}

/// Unique triangles `(q, a, b)` for every point `q` and every pair of its `k` nearest
/// neighbours, as sorted index triples in ascending order.
pub fn knn_triangles<T: Real>(points: &[Point3<T>], k: usize) -> Result<Vec<[usize; 3]>, SamplingError> {
    if k < 2 {
        return Err(SamplingError::InvalidK(k));
    }
    if points.len() <= k {
        return Err(SamplingError::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    let tree = KdTree::build(points);
    let mut set = BTreeSet::new();
    for q in 0..points.len() {
        let nn = tree.nearest_excluding(q, k);
        for (i, &a) in nn.iter().enumerate() {
            for &b in &nn[i + 1..] {
                let mut tri = [q, a, b];
                tri.sort_unstable();
                set.insert(tri);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Densifies a raw scan: builds the k-NN triangles and samples each like a mesh face.
/// The original points come first in the output, followed by the new samples.
pub fn knn_densify<T: Real>(
    cloud: &PointCloud<T>,
    k: usize,
    params: &SamplingParams,
) -> Result<PointCloud<T>, SamplingError> {
    params.validate()?;
    let pts = cloud.points();
    let triangles = knn_triangles(pts, k)?;
    let mut out = pts.to_vec();
    for (i, tri) in triangles.iter().enumerate() {
        let corners = [pts[tri[0]], pts[tri[1]], pts[tri[2]]];
        let mut rng = stream(params.seed, KNN_STREAMS + i as u64);
        sample_polygon(&mut rng, &corners, params, &mut out);
    }
    let mut dense = PointCloud::new(out).expect("samples of finite points are finite");
    if let Some(id) = cloud.source_id() {
        dense = dense.with_source_id(id);
    }
    Ok(dense)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta_edge: f64, beta_face: f64) -> SamplingParams {
        SamplingParams {
            beta_edge,
            beta_face,
            seed: 7,
        }
    }

    fn count_of(tagged: &[(Primitive, Point3<f64>)], p: Primitive) -> usize {
        tagged.iter().filter(|(q, _)| *q == p).count()
    }

    #[test]
    fn edge_of_length_ten() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let tagged = sample_mesh_tagged(&mesh, &params(2.0, 1.0)).unwrap();
        // edges sorted: [0,1] length 10, [0,2] length 10, [1,2] length 10*sqrt(2)
        assert_eq!(count_of(&tagged, Primitive::Edge(0)), 5);
        assert_eq!(count_of(&tagged, Primitive::Edge(1)), 5);
        assert_eq!(count_of(&tagged, Primitive::Edge(2)), 8);
        for (_, p) in tagged.iter().filter(|(q, _)| *q == Primitive::Edge(0)) {
            assert_eq!(p[1], 0.0);
            assert!((0.0..=10.0).contains(&p[0]));
        }
    }

    #[test]
    fn unit_right_triangle_gets_five_samples() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let tagged = sample_mesh_tagged(&mesh, &params(100.0, 0.1)).unwrap();
        let face: Vec<_> = tagged
            .iter()
            .filter(|(q, _)| *q == Primitive::Face(0))
            .map(|(_, p)| *p)
            .collect();
        assert_eq!(face.len(), 5);
        for p in face {
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-12);
            assert_eq!(p[2], 0.0);
        }
    }

    #[test]
    fn zero_length_edge_and_zero_area_face_get_one_vertex_sample() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let tagged = sample_mesh_tagged(&mesh, &params(0.5, 0.1)).unwrap();
        assert_eq!(count_of(&tagged, Primitive::Face(0)), 1);
        assert!(tagged.contains(&(Primitive::Face(0), [0.0, 0.0, 0.0])));
    }

    #[test]
    fn rejects_bad_params() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            sample_mesh(&mesh, &params(0.0, 0.1)),
            Err(SamplingError::InvalidParams(_))
        ));
        assert!(matches!(
            sample_mesh(&mesh, &params(0.1, -1.0)),
            Err(SamplingError::InvalidParams(_))
        ));
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.3]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let a = sample_mesh(&mesh, &params(0.05, 0.01)).unwrap();
        let b = sample_mesh(&mesh, &params(0.05, 0.01)).unwrap();
        assert_eq!(a, b);
        let mut other = params(0.05, 0.01);
        other.seed = 8;
        assert_ne!(a, sample_mesh(&mesh, &other).unwrap());
    }

    #[test]
    fn collinear_knn() {
        let cloud = PointCloud::<f64>::new(vec![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [3.0, 3.0, 3.0]]).unwrap();
        assert_eq!(knn_triangles(cloud.points(), 2).unwrap(), vec![[0, 1, 2]]);
        let dense = knn_densify(&cloud, 2, &params(1.0, 1e-3)).unwrap();
        assert_eq!(&dense.points()[..3], cloud.points());
        for p in dense.points() {
            assert!((p[0] - p[1]).abs() < 1e-9 && (p[1] - p[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn knn_needs_enough_points() {
        let cloud = PointCloud::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(
            knn_densify(&cloud, 2, &params(1.0, 1.0)).unwrap_err().to_string(),
            "not enough points for k-NN: have 2, need more than k = 2"
        );
        assert_eq!(
            knn_densify(&cloud, 1, &params(1.0, 1.0)).unwrap_err(),
            SamplingError::InvalidK(1)
        );
    }
}
