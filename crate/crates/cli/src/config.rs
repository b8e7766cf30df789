//! Run configuration: one human-editable TOML file, strict about unknown
//! keys so typos fail instead of silently falling back to defaults. Every
//! value can also be set on the command line; precedence is command line >
//! config file > built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tofmap_core::classify::ClassifyParams;
use tofmap_core::mask::MaskParams;
use tofmap_core::pipeline::PipelineParams;
use tofmap_core::split::{SplitParams, SplitScope};
use tofmap_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsSection,
    pub mask: MaskSection,
    pub vectorize: VectorizeSection,
    pub classify: ClassifySection,
    pub patches: PatchesSection,
    pub split: SplitSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Normalized digital surface model GeoTIFF (single float band, meters).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ndsm: Option<PathBuf>,
    /// 4-band orthophoto GeoTIFF (red, green, blue, near-infrared).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dop: Option<PathBuf>,
    /// Directory receiving features.geojson, labels.tif, and report.json.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub height_threshold: f64,
    pub closing_window: (usize, usize),
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
}

impl Default for MaskSection {
    fn default() -> Self {
        let p = MaskParams::default();
        MaskSection {
            height_threshold: p.height_threshold,
            closing_window: p.closing_window,
            kmeans_max_iter: p.kmeans_max_iter,
            kmeans_tol: p.kmeans_tol,
        }
    }
}

impl MaskSection {
    pub fn to_params(&self) -> MaskParams {
        MaskParams {
            height_threshold: self.height_threshold,
            closing_window: self.closing_window,
            kmeans_max_iter: self.kmeans_max_iter,
            kmeans_tol: self.kmeans_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorizeSection {
    /// Douglas-Peucker tolerance in meters; 0 keeps traced outlines as is.
    pub dp_tolerance_m: f64,
    /// Holes smaller than this are filled before simplification.
    pub min_hole_area_m2: f64,
}

impl Default for VectorizeSection {
    fn default() -> Self {
        let p = PipelineParams::default();
        VectorizeSection {
            dp_tolerance_m: p.dp_tolerance_m,
            min_hole_area_m2: p.min_hole_area_m2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    /// Swap the Tree/Linear rule order (see `classify --help`).
    pub linear_first: bool,
}

impl ClassifySection {
    pub fn to_params(&self) -> ClassifyParams {
        ClassifyParams {
            linear_first: self.linear_first,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchesSection {
    /// Square window size in pixels.
    pub window: usize,
    /// Step between window origins; the last window snaps to the tile edge.
    pub stride: usize,
    /// Emit horizontally and vertically flipped copies of every window.
    pub augment: bool,
}

impl Default for PatchesSection {
    fn default() -> Self {
        PatchesSection {
            window: 1024,
            stride: 1024,
            augment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub seed: u64,
    pub val_tiles: usize,
    pub test_tiles: usize,
    pub max_deviation_pp: f64,
    pub max_attempts: u64,
    pub scope: SplitScope,
}

impl Default for SplitSection {
    fn default() -> Self {
        let p = SplitParams::default();
        SplitSection {
            seed: 42,
            val_tiles: p.val_tiles,
            test_tiles: p.test_tiles,
            max_deviation_pp: p.max_deviation_pp,
            max_attempts: p.max_attempts,
            scope: p.scope,
        }
    }
}

impl SplitSection {
    pub fn to_params(&self) -> SplitParams {
        SplitParams {
            val_tiles: self.val_tiles,
            test_tiles: self.test_tiles,
            max_deviation_pp: self.max_deviation_pp,
            max_attempts: self.max_attempts,
            scope: self.scope,
        }
    }
}

impl PipelineConfig {
    /// Load a config file, or the built-in defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<PipelineConfig> {
        match path {
            None => Ok(PipelineConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    Error::Data(format!("cannot read config {}: {e}", p.display()))
                })?;
                PipelineConfig::from_toml(&text)
            }
        }
    }

    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| Error::Validation(format!("config parse: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config contains only TOML-representable values")
    }

    /// Core parameter block for the full pipeline run.
    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            mask: self.mask.to_params(),
            dp_tolerance_m: self.vectorize.dp_tolerance_m,
            min_hole_area_m2: self.vectorize.min_hole_area_m2,
            classify: self.classify.to_params(),
        }
    }
}
