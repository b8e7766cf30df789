//! On-disk formats: GeoTIFF rasters, GeoJSON feature layers, CSV tile
//! manifests, JSON plans/reports, and the patch directory layouts used for
//! training extraction and softmax merging.

pub mod geojson;
pub mod geotiff;
pub mod manifest;
pub mod patchdir;
