//! Synthetic desk-scale scenes: parametric shapes rendered into nDSM and
//! four-band imagery rasters, plus an analytically derived ground-truth
//! label raster. The analytic labels apply the same masking and
//! classification rules as the pipeline, but from the shape definitions
//! directly, giving an independent closed-form reference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classify::{classify_feature, ClassifyParams, TofClass};
use crate::error::{Error, Result};
use crate::geometry::ShapeDescriptors;
use crate::raster::{Band, BandData, GeoTransform, RasterGrid};

/// Shape footprint in map coordinates (meters, y up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Axis-aligned block; also covers strips (hedgerows) via aspect ratio.
    Rect {
        min_x: f64,
        min_y: f64,
        size_x: f64,
        size_y: f64,
    },
    Disk {
        center_x: f64,
        center_y: f64,
        radius: f64,
    },
}

impl ShapeKind {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            ShapeKind::Rect {
                min_x,
                min_y,
                size_x,
                size_y,
            } => (min_x, min_y, min_x + size_x, min_y + size_y),
            ShapeKind::Disk {
                center_x,
                center_y,
                radius,
            } => (
                center_x - radius,
                center_y - radius,
                center_x + radius,
                center_y + radius,
            ),
        }
    }

    /// Half-open membership ([min, max) per axis for rects) so adjacent
    /// shapes never double-claim a pixel center.
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            ShapeKind::Rect {
                min_x,
                min_y,
                size_x,
                size_y,
            } => x >= min_x && x < min_x + size_x && y >= min_y && y < min_y + size_y,
            ShapeKind::Disk {
                center_x,
                center_y,
                radius,
            } => {
                let (dx, dy) = (x - center_x, y - center_y);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ShapeKind::Rect { size_x, size_y, .. } => size_x > 0.0 && size_y > 0.0,
            ShapeKind::Disk { radius, .. } => radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "shape must have positive size: {self:?}"
            )))
        }
    }
}

/// One scene element: a footprint plus the surface height and NDVI value it
/// stamps into the rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub shape: ShapeKind,
    /// Stamped into the nDSM (meters above ground).
    pub height_m: f64,
    /// Target NDVI of the stamped surface, in (-0.95, 0.95).
    pub ndvi: f64,
    #[serde(default)]
    pub name: Option<String>,
}

fn default_pixel_size() -> f64 {
    0.2
}

fn default_background_ndvi() -> f64 {
    0.05
}

fn default_vegetation_ndvi_min() -> f64 {
    0.3
}

/// Scene description. Serializable so fixtures can be described in a JSON
/// file and regenerated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Raster size in pixels.
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_pixel_size")]
    pub pixel_size: f64,
    /// Map coordinates of the raster's top-left corner; defaults to
    /// (0, height * pixel_size) so the scene spans [0, W] x [0, H] meters.
    #[serde(default)]
    pub origin: Option<(f64, f64)>,
    #[serde(default)]
    pub background_height: f64,
    #[serde(default = "default_background_ndvi")]
    pub background_ndvi: f64,
    /// A shape counts as vegetation (eligible for woody labels) when its
    /// NDVI reaches this floor. The pipeline recovers the same partition
    /// data-driven via clustering; the floor keeps the ground truth
    /// independent of that machinery.
    #[serde(default = "default_vegetation_ndvi_min")]
    pub vegetation_ndvi_min: f64,
    /// Height threshold used for the analytic labels (matches the mask
    /// builder default).
    #[serde(default = "crate::mask::default_height_threshold")]
    pub height_threshold: f64,
    /// Gaussian noise applied to the nDSM (meters).
    #[serde(default)]
    pub ndsm_sigma: f64,
    /// Gaussian noise applied to per-pixel NDVI before imagery synthesis.
    #[serde(default)]
    pub ndvi_sigma: f64,
    pub shapes: Vec<ShapeSpec>,
}

impl SceneSpec {
    pub fn transform(&self) -> Result<GeoTransform> {
        let (ox, oy) = self
            .origin
            .unwrap_or((0.0, self.height as f64 * self.pixel_size));
        GeoTransform::new(ox, oy, self.pixel_size, self.pixel_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Parameter("scene extent must be positive".into()));
        }
        if !(self.pixel_size > 0.0) {
            return Err(Error::Parameter("pixel_size must be positive".into()));
        }
        if self.ndsm_sigma < 0.0 || self.ndvi_sigma < 0.0 {
            return Err(Error::Parameter("noise sigmas must be non-negative".into()));
        }
        let t = self.transform()?;
        let (x0, y1) = t.pixel_to_map(0.0, 0.0);
        let (x1, y0) = t.pixel_to_map(self.width as f64, self.height as f64);
        for (i, s) in self.shapes.iter().enumerate() {
            s.shape.validate()?;
            if !(-0.95..=0.95).contains(&s.ndvi) || s.height_m < 0.0 {
                return Err(Error::Parameter(format!(
                    "shape {i}: height must be >= 0 and NDVI within [-0.95, 0.95]"
                )));
            }
            let (sx0, sy0, sx1, sy1) = s.shape.bounds();
            if sx0 < x0 || sy0 < y0 || sx1 > x1 || sy1 > y1 {
                return Err(Error::Validation(format!(
                    "shape {i} [{sx0}, {sy0}] - [{sx1}, {sy1}] leaves the scene \
                     extent [{x0}, {y0}] - [{x1}, {y1}]"
                )));
            }
        }
        Ok(())
    }
}

/// Closed-form descriptors of a shape (no tracing involved).
pub fn analytic_descriptors(kind: &ShapeKind) -> ShapeDescriptors {
    match *kind {
        ShapeKind::Rect { size_x, size_y, .. } => {
            let length = size_x.max(size_y);
            let width = size_x.min(size_y);
            ShapeDescriptors {
                area_m2: size_x * size_y,
                length_m: length,
                width_m: width,
                elongation: length / width,
                angle_deg: if size_x >= size_y { 0.0 } else { 90.0 },
            }
        }
        ShapeKind::Disk { radius, .. } => ShapeDescriptors {
            area_m2: std::f64::consts::PI * radius * radius,
            length_m: 2.0 * radius,
            width_m: 2.0 * radius,
            elongation: 1.0,
            angle_deg: 0.0,
        },
    }
}

/// Ground-truth class of a shape under the analytic rules: woody vegetation
/// (tall enough and green enough) classified by its closed-form
/// descriptors; anything else is background.
pub fn analytic_class(spec: &SceneSpec, shape: &ShapeSpec) -> Option<TofClass> {
    if shape.height_m < spec.height_threshold || shape.ndvi < spec.vegetation_ndvi_min {
        return None;
    }
    Some(classify_feature(
        &analytic_descriptors(&shape.shape),
        &ClassifyParams::default(),
    ))
}

/// Per-shape outcome recorded in the fixture report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub index: usize,
    pub name: Option<String>,
    pub class: Option<TofClass>,
    pub descriptors: ShapeDescriptors,
    pub painted_pixels: usize,
    /// Indices of earlier shapes this one painted over.
    pub overlaps: Vec<usize>,
}

/// A rendered scene: inputs for the pipeline plus the analytic truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub ndsm: RasterGrid,
    pub dop: RasterGrid,
    pub labels: RasterGrid,
    pub shapes: Vec<ShapeReport>,
}

/// Render a scene. Shapes are painted in listed order (later shapes
/// overwrite earlier ones in all three rasters alike); overlaps are allowed
/// and reported per shape. The same spec and seed always produce
/// bit-identical rasters.
pub fn generate_fixture(spec: &SceneSpec, seed: u64) -> Result<Fixture> {
    spec.validate()?;
    let transform = spec.transform()?;
    let pixels = spec.width * spec.height;

    let mut height = vec![spec.background_height; pixels];
    let mut ndvi = vec![spec.background_ndvi; pixels];
    let mut labels = vec![0u8; pixels];
    let mut owner: Vec<Option<usize>> = vec![None; pixels];
    let mut reports: Vec<ShapeReport> = Vec::with_capacity(spec.shapes.len());

    for (i, shape) in spec.shapes.iter().enumerate() {
        let class = analytic_class(spec, shape);
        let code = class.map_or(0, TofClass::code);
        let mut painted = 0usize;
        let mut overlaps: Vec<usize> = Vec::new();
        let (sx0, sy0, sx1, sy1) = shape.shape.bounds();
        for row in 0..spec.height {
            let y = transform.pixel_center(0, row).1;
            if y < sy0 || y > sy1 {
                continue;
            }
            for col in 0..spec.width {
                let x = transform.pixel_center(col, row).0;
                if x < sx0 || x > sx1 || !shape.shape.contains(x, y) {
                    continue;
                }
                let px = row * spec.width + col;
                if let Some(prev) = owner[px] {
                    if prev != i && !overlaps.contains(&prev) {
                        overlaps.push(prev);
                    }
                }
                owner[px] = Some(i);
                height[px] = shape.height_m;
                ndvi[px] = shape.ndvi;
                labels[px] = code;
                painted += 1;
            }
        }
        reports.push(ShapeReport {
            index: i,
            name: shape.name.clone(),
            class,
            descriptors: analytic_descriptors(&shape.shape),
            painted_pixels: painted,
            overlaps,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.ndsm_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.ndsm_sigma)
            .map_err(|e| Error::Parameter(format!("nDSM noise: {e}")))?;
        for v in &mut height {
            *v = (*v + noise.sample(&mut rng)).max(0.0);
        }
    }
    if spec.ndvi_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.ndvi_sigma)
            .map_err(|e| Error::Parameter(format!("NDVI noise: {e}")))?;
        for v in &mut ndvi {
            *v = (*v + noise.sample(&mut rng)).clamp(-0.95, 0.95);
        }
    }

    // Imagery synthesis: choose red and near-infrared counts so that the
    // NDVI recomputed from the 8-bit bands lands on the target value up to
    // quantization (|error| < 0.006 at these magnitudes).
    let mut red = vec![0u8; pixels];
    let mut nir = vec![0u8; pixels];
    for px in 0..pixels {
        let v = ndvi[px];
        red[px] = (100.0 * (1.0 - v)).round() as u8;
        nir[px] = (100.0 * (1.0 + v)).round() as u8;
    }
    let green = vec![90u8; pixels];
    let blue = vec![80u8; pixels];

    let ndsm = RasterGrid::single_f32(
        spec.width,
        spec.height,
        height.iter().map(|&v| v as f32).collect(),
        None,
        transform,
    )?;
    let dop = RasterGrid::new(
        spec.width,
        spec.height,
        [red, green, blue, nir]
            .into_iter()
            .map(|data| Band {
                data: BandData::U8(data),
                nodata: None,
            })
            .collect(),
        transform,
    )?;
    let labels = RasterGrid::single_u8(spec.width, spec.height, labels, None, transform)?;
    Ok(Fixture {
        ndsm,
        dop,
        labels,
        shapes: reports,
    })
}
