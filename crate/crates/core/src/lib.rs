//! Zero-shot 3D shape classification through rendered depth views.
//!
//! Meshes and scans are sampled into dense point clouds, projected into multi-view
//! inverse-distance depth maps, optionally restyled by a depth-conditioned image
//! generator once per candidate class, scored against text prompts by a contrastive
//! encoder, and fused through a class-by-class probability matrix.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod geometry;
pub mod harness;
pub mod projection;
pub mod sampling;
pub mod scalar;
pub mod zeroshot;

mod error;

pub use error::Error;
pub use scalar::Real;

pub type Mesh32 = geometry::Mesh<f32>;
pub type Mesh64 = geometry::Mesh<f64>;
pub type PointCloud32 = geometry::PointCloud<f32>;
pub type PointCloud64 = geometry::PointCloud<f64>;
pub type DepthMap32 = projection::DepthMap<f32>;
pub type DepthMap64 = projection::DepthMap<f64>;
pub type ProbabilityMatrix32 = zeroshot::ProbabilityMatrix<f32>;
pub type ProbabilityMatrix64 = zeroshot::ProbabilityMatrix<f64>;
pub type TextClassifier64 = zeroshot::TextClassifier<f64>;
