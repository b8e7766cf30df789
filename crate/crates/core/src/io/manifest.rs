//! Tile manifests as CSV and plans/reports as JSON.
//!
//! The manifest CSV is the hand-off between tile statistics and split
//! selection: one row per survey tile with its study area, pixel extent and
//! woody-class area fractions.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::split::{ClassFractions, TileManifest};

/// Flat CSV row; `forest..tree` are area fractions in [0, 1].
#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    tile_id: String,
    study_area: String,
    width: usize,
    height: usize,
    forest: f64,
    patch: f64,
    linear: f64,
    tree: f64,
}

pub fn write_manifest_csv(path: &Path, tiles: &[TileManifest]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for t in tiles {
        writer.serialize(ManifestRow {
            tile_id: t.tile_id.clone(),
            study_area: t.study_area.clone(),
            width: t.extent.0,
            height: t.extent.1,
            forest: t.class_fractions.forest,
            patch: t.class_fractions.patch,
            linear: t.class_fractions.linear,
            tree: t.class_fractions.tree,
        })?;
    }
    writer.flush().map_err(std::io::Error::from)?;
    Ok(())
}

pub fn read_manifest_csv(path: &Path) -> Result<Vec<TileManifest>> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut tiles = Vec::new();
    for row in reader.deserialize() {
        let row: ManifestRow = row?;
        let tile = TileManifest {
            tile_id: row.tile_id,
            study_area: row.study_area,
            extent: (row.width, row.height),
            class_fractions: ClassFractions {
                forest: row.forest,
                patch: row.patch,
                linear: row.linear,
                tree: row.tree,
            },
        };
        tile.validate()?;
        tiles.push(tile);
    }
    Ok(tiles)
}

/// Write any serializable value as pretty-printed JSON (plans, reports,
/// combinations).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}
