//! Multi-view central projection of point clouds into inverse-distance depth maps.
//!
//! Camera frame: the cloud is rotated by `-azimuth` about Z and then by the elevation
//! about Y so that the camera sits at `(rho, 0, 0)` looking down `-X`, with `+Y` to
//! the right and `+Z` up. The image plane is perpendicular to the view axis at the
//! focal distance from the camera.

mod densify;
mod image8;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point3, PointCloud};
use crate::scalar::{sin_cos_deg, Real};

pub use densify::maxpool_densify;
pub use image8::to_image8;

pub const DEFAULT_ELEVATION: f64 = 35.0;
pub const DEFAULT_CAMERA_DISTANCE: f64 = 2.2;
pub const DEFAULT_FOCAL_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("invalid view '{label}': {reason}")]
    InvalidView { label: String, reason: String },
    #[error("invalid raster config: {0}")]
    InvalidRaster(String),
    #[error("unknown view preset '{0}' (expected single-best, four-view or eight-view)")]
    UnknownPreset(String),
    #[error("empty projection: no point landed on the image")]
    EmptyProjection,
    #[error("depth map has no nonzero pixel")]
    EmptyMap,
}

/// One viewpoint. Angles are in degrees; distances are in units of the normalized
/// object radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewConfig {
    pub azimuth: f64,
    pub elevation: f64,
    pub camera_distance: f64,
    pub focal_distance: f64,
    pub label: String,
}

impl ViewConfig {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self {
            azimuth,
            elevation,
            camera_distance: DEFAULT_CAMERA_DISTANCE,
            focal_distance: DEFAULT_FOCAL_DISTANCE,
            label: format!("az{azimuth}_el{elevation}"),
        }
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        let bad = |reason: &str| ProjectionError::InvalidView {
            label: self.label.clone(),
            reason: reason.to_string(),
        };
        if !(self.azimuth.is_finite() && self.elevation.is_finite()) {
            return Err(bad("angles must be finite"));
        }
        if !(self.elevation > -90.0 && self.elevation < 90.0) {
            return Err(bad("elevation must lie strictly between -90 and 90 degrees"));
        }
        if !(self.focal_distance > 0.0 && self.camera_distance > self.focal_distance) {
            return Err(bad("requires camera_distance > focal_distance > 0"));
        }
        if self.camera_distance.is_infinite() {
            return Err(bad("camera_distance must be finite"));
        }
        if self.label.is_empty() {
            return Err(bad("label must not be empty"));
        }
        Ok(())
    }
}

/// Named viewpoint sets, all at 35 degrees elevation.
pub fn view_preset(name: &str) -> Result<Vec<ViewConfig>, ProjectionError> {
    let azimuths: Vec<f64> = match name {
        "single-best" => vec![-135.0],
        "four-view" => vec![-135.0, -45.0, 45.0, 135.0],
        "eight-view" => (0..8).map(|i| -180.0 + 45.0 * i as f64).collect(),
        other => return Err(ProjectionError::UnknownPreset(other.to_string())),
    };
    Ok(azimuths
        .into_iter()
        .map(|a| ViewConfig::new(a, DEFAULT_ELEVATION))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterConfig {
    pub width: usize,
    pub height: usize,
    /// Half-width of the image plane window mapped onto the image border.
    pub field_extent: f64,
    /// Floor on the point-to-plane distance, bounding intensities by `1 / epsilon`.
    pub epsilon: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            width: 224,
            height: 224,
            field_extent: 1.1,
            epsilon: 1e-6,
        }
    }
}

impl RasterConfig {
    pub fn square(size: usize) -> Self {
        Self {
            width: size,
            height: size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        if self.width < 16 || self.height < 16 {
            return Err(ProjectionError::InvalidRaster(format!(
                "resolution {}x{} is below 16x16",
                self.width, self.height
            )));
        }
        if !(self.field_extent > 0.0 && self.field_extent.is_finite()) {
            return Err(ProjectionError::InvalidRaster(
                "field_extent must be positive".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ProjectionError::InvalidRaster("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Row-major `height x width` grid of nonnegative intensities; zero is background.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
    view: ViewConfig,
    object_id: String,
}

impl<T: Real> DepthMap<T> {
    pub fn zeros(width: usize, height: usize, view: ViewConfig, object_id: impl Into<String>) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
            view,
            object_id: object_id.into(),
        }
    }

    /// Wraps raw row-major data. Panics if the length does not match or an entry is
    /// negative or NaN.
    pub fn from_data(
        width: usize,
        height: usize,
        data: Vec<T>,
        view: ViewConfig,
        object_id: impl Into<String>,
    ) -> Self {
        assert_eq!(data.len(), width * height, "depth map size mismatch");
        assert!(
            data.iter().all(|&v| v >= T::zero()),
            "depth intensities must be nonnegative"
        );
        Self {
            width,
            height,
            data,
            view,
            object_id: object_id.into(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn view(&self) -> &ViewConfig {
        &self.view
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|&&v| v > T::zero()).count()
    }

    pub(crate) fn with_data(&self, data: Vec<T>) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data,
            view: self.view.clone(),
            object_id: self.object_id.clone(),
        }
    }
}

/// Where a single point lands and the intensity it deposits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<T> {
    pub row: usize,
    pub col: usize,
    pub intensity: T,
}

/// Precomputed projection for one (view, raster) pair.
#[derive(Debug, Clone)]
pub struct Camera<T> {
    sin_az: T,
    cos_az: T,
    sin_el: T,
    cos_el: T,
    rho: T,
    focal: T,
    extent: T,
    epsilon: T,
    width: usize,
    height: usize,
}

impl<T: Real> Camera<T> {
    pub fn new(view: &ViewConfig, raster: &RasterConfig) -> Result<Self, ProjectionError> {
        view.validate()?;
        raster.validate()?;
        let (sin_az, cos_az) = sin_cos_deg(T::of(view.azimuth));
        let (sin_el, cos_el) = sin_cos_deg(T::of(view.elevation));
        Ok(Self {
            sin_az,
            cos_az,
            sin_el,
            cos_el,
            rho: T::of(view.camera_distance),
            focal: T::of(view.focal_distance),
            extent: T::of(raster.field_extent),
            epsilon: T::of(raster.epsilon),
            width: raster.width,
            height: raster.height,
        })
    }

    /// Point expressed in the camera-aligned frame (camera at `(rho, 0, 0)`).
    pub fn to_camera_frame(&self, p: Point3<T>) -> Point3<T> {
        let x1 = self.cos_az * p[0] + self.sin_az * p[1];
        let y1 = self.cos_az * p[1] - self.sin_az * p[0];
        let x2 = self.cos_el * x1 + self.sin_el * p[2];
        let z2 = self.cos_el * p[2] - self.sin_el * x1;
        [x2, y1, z2]
    }

    /// Projects one point: `None` if it is behind the camera or outside the image.
    pub fn locate(&self, p: Point3<T>) -> Option<Hit<T>> {
        let [x, y, z] = self.to_camera_frame(p);
        let axial = self.rho - x;
        if !(axial > T::zero()) {
            return None;
        }
        let u = self.focal * y / axial;
        let v = self.focal * z / axial;
        let span = self.extent + self.extent;
        let col = ((u + self.extent) / span * T::of(self.width as f64)).floor();
        let row = ((self.extent - v) / span * T::of(self.height as f64)).floor();
        if !(col >= T::zero() && row >= T::zero()) {
            return None;
        }
        let (col, row) = (col.to_usize()?, row.to_usize()?);
        if col >= self.width || row >= self.height {
            return None;
        }
        let dis = axial - self.focal;
        Some(Hit {
            row,
            col,
            intensity: T::one() / dis.max(self.epsilon),
        })
    }
}

/// Renders `cloud` from one viewpoint. Each point lands on its nearest pixel with
/// intensity `1 / max(epsilon, dis)`, `dis` being its distance to the image plane along
/// the view axis; when several points share a pixel the largest intensity wins.
pub fn project<T: Real>(
    cloud: &PointCloud<T>,
    view: &ViewConfig,
    raster: &RasterConfig,
) -> Result<DepthMap<T>, ProjectionError> {
    let camera = Camera::new(view, raster)?;
    let mut map = DepthMap::zeros(
        raster.width,
        raster.height,
        view.clone(),
        cloud.source_id().unwrap_or_default(),
    );
    let mut landed = false;
    for &p in cloud.points() {
        if let Some(hit) = camera.locate(p) {
            let cell: &mut T = &mut map.data[hit.row * raster.width + hit.col];
            *cell = cell.max(hit.intensity);
            landed = true;
        }
    }
    if !landed {
        return Err(ProjectionError::EmptyProjection);
    }
    Ok(map)
}
