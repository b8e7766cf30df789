//! Patch directory layouts.
//!
//! Training extraction writes GeoTIFF pairs under
//! `patches/{split}/{tile}_{row}_{col}_{aug}.tif` (input stack) plus
//! `..._labels.tif` (class codes). Merging reads a directory of per-window
//! softmax arrays, each a 5-band f32 TIFF with a JSON sidecar
//! `{"origin": [row, col], "window": N}` naming its pixel origin in the tile.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::TofClass;
use crate::error::{Error, Result};
use crate::io::geotiff::{read_geotiff, write_geotiff};
use crate::io::manifest::{read_json, write_json};
use crate::merge::SoftmaxPatch;
use crate::patches::{FlipVariant, Patch};
use crate::raster::{Band, BandData, GeoTransform, RasterGrid};

/// File-name suffix for each augmentation variant.
pub fn flip_suffix(flip: FlipVariant) -> &'static str {
    match flip {
        FlipVariant::Original => "orig",
        FlipVariant::Horizontal => "hflip",
        FlipVariant::Vertical => "vflip",
    }
}

/// `{tile}_{row}_{col}_{aug}` — the shared stem of a patch's files.
pub fn patch_stem(tile_id: &str, patch: &Patch) -> String {
    format!(
        "{tile_id}_{}_{}_{}",
        patch.spec.row,
        patch.spec.col,
        flip_suffix(patch.spec.flip)
    )
}

/// Write one extracted patch as its GeoTIFF pair. Returns the image and
/// label paths. The directory must already exist.
pub fn write_patch_pair(dir: &Path, tile_id: &str, patch: &Patch) -> Result<(PathBuf, PathBuf)> {
    let stem = patch_stem(tile_id, patch);
    let image_path = dir.join(format!("{stem}.tif"));
    let labels_path = dir.join(format!("{stem}_labels.tif"));
    write_geotiff(&image_path, &patch.image)?;
    write_geotiff(&labels_path, &patch.labels)?;
    Ok((image_path, labels_path))
}

/// Sidecar describing where a softmax window sits within its tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSidecar {
    /// `[row, col]` pixel origin of the window.
    pub origin: [usize; 2],
    pub window: usize,
}

/// Write one softmax window as `{stem}.tif` + `{stem}.json`. The TIFF holds
/// one band per class; georeferencing is a unit-pixel frame since the
/// sidecar pins the window to tile pixels.
pub fn write_softmax_patch(dir: &Path, stem: &str, patch: &SoftmaxPatch) -> Result<PathBuf> {
    let pixels = patch.window * patch.window;
    let bands = (0..TofClass::COUNT)
        .map(|class| Band {
            data: BandData::F32(
                (0..pixels)
                    .map(|i| patch.probs[i * TofClass::COUNT + class])
                    .collect(),
            ),
            nodata: None,
        })
        .collect();
    let grid = RasterGrid::new(
        patch.window,
        patch.window,
        bands,
        GeoTransform::new(0.0, patch.window as f64, 1.0, 1.0)?,
    )?;
    let tif_path = dir.join(format!("{stem}.tif"));
    write_geotiff(&tif_path, &grid)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &PatchSidecar {
            origin: [patch.row, patch.col],
            window: patch.window,
        },
    )?;
    Ok(tif_path)
}

/// Read every softmax window in a directory (each `*.tif` with its `*.json`
/// sidecar). Other files are ignored. Returns patches sorted by
/// (row, col, file name) so downstream accumulation is order-stable no
/// matter how the directory iterates.
pub fn read_softmax_dir(dir: &Path) -> Result<Vec<SoftmaxPatch>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::Io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "tif"))
        .collect();
    entries.sort();

    let mut patches = Vec::with_capacity(entries.len());
    for tif_path in entries {
        let sidecar_path = tif_path.with_extension("json");
        if !sidecar_path.exists() {
            return Err(Error::Data(format!(
                "softmax window {} has no {} sidecar",
                tif_path.display(),
                sidecar_path.display()
            )));
        }
        let sidecar: PatchSidecar = read_json(&sidecar_path)?;
        let grid = read_geotiff(&tif_path)?;
        if grid.bands.len() != TofClass::COUNT {
            return Err(Error::Data(format!(
                "{}: expected {} probability bands, found {}",
                tif_path.display(),
                TofClass::COUNT,
                grid.bands.len()
            )));
        }
        if grid.width != sidecar.window || grid.height != sidecar.window {
            return Err(Error::Data(format!(
                "{}: raster is {}x{} but the sidecar declares window {}",
                tif_path.display(),
                grid.width,
                grid.height,
                sidecar.window
            )));
        }
        let pixels = sidecar.window * sidecar.window;
        let mut probs = vec![0f32; pixels * TofClass::COUNT];
        for class in 0..TofClass::COUNT {
            let band = grid.band_f32(class)?;
            for (i, &v) in band.iter().enumerate() {
                probs[i * TofClass::COUNT + class] = v;
            }
        }
        patches.push(SoftmaxPatch::new(
            sidecar.origin[0],
            sidecar.origin[1],
            sidecar.window,
            probs,
        )?);
    }
    patches.sort_by_key(|p| (p.row, p.col));
    Ok(patches)
}
