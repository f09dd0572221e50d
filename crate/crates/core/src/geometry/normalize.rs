use serde::{Deserialize, Serialize};

use super::{norm, GeometryError, Mesh, Point3, PointCloud};
use crate::scalar::Real;

/// Translation and scale applied by [`normalize_unit`]: `p' = (p - center) * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: [f64; 3],
    pub scale: f64,
}

/// Geometry that exposes its point set for normalization.
pub trait Normalize<T: Real>: Sized {
    fn coordinates(&self) -> &[Point3<T>];
    fn transformed(&self, f: impl FnMut(Point3<T>) -> Point3<T>) -> Self;
}

impl<T: Real> Normalize<T> for Mesh<T> {
    fn coordinates(&self) -> &[Point3<T>] {
        self.vertices()
    }

    fn transformed(&self, f: impl FnMut(Point3<T>) -> Point3<T>) -> Self {
        self.map_vertices(f)
    }
}

impl<T: Real> Normalize<T> for PointCloud<T> {
    fn coordinates(&self) -> &[Point3<T>] {
        self.points()
    }

    fn transformed(&self, f: impl FnMut(Point3<T>) -> Point3<T>) -> Self {
        self.map_points(f)
    }
}

/// Moves the bounding-box center to the origin and scales uniformly so the farthest
/// point lies at distance 1. Topology is untouched.
pub fn normalize_unit<T: Real, G: Normalize<T>>(
    geometry: &G,
) -> Result<(G, Normalization), GeometryError> {
    let pts = geometry.coordinates();
    let mut lo = [T::infinity(); 3];
    let mut hi = [T::neg_infinity(); 3];
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let half = T::of(0.5);
    let center = [
        (lo[0] + hi[0]) * half,
        (lo[1] + hi[1]) * half,
        (lo[2] + hi[2]) * half,
    ];
    let radius = pts
        .iter()
        .map(|&p| norm(super::sub(p, center)))
        .fold(T::zero(), T::max);
    if !(radius > T::zero()) {
        return Err(GeometryError::Degenerate);
    }
    let scale = T::one() / radius;
    let out = geometry.transformed(|p| {
        [
            (p[0] - center[0]) * scale,
            (p[1] - center[1]) * scale,
            (p[2] - center[2]) * scale,
        ]
    });
    Ok((
        out,
        Normalization {
            center: center.map(Real::as_f64),
            scale: scale.as_f64(),
        },
    ))
}
