//! GeoJSON (RFC 7946) serialization of classified feature layers.
//!
//! The in-memory ring conventions already match the RFC — exterior rings
//! counterclockwise, holes clockwise, rings closed — so geometry maps 1:1.
//! Properties carry the class (integer code + name) and the shape
//! descriptors, making the files self-describing in any GIS.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{TofClass, TofFeature};
use crate::error::{Error, Result};
use crate::geometry::ShapeDescriptors;
use crate::polygon::{PolygonGeom, Pt};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeoJsonGeometry {
    #[serde(rename = "type")]
    pub kind: String,
    /// Ring list: exterior first, then holes; positions are `[x, y]`.
    pub coordinates: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureProperties {
    pub id: u64,
    pub class_code: u8,
    pub class_name: String,
    pub area_m2: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub elongation: f64,
    pub angle_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeoJsonFeature {
    #[serde(rename = "type")]
    pub kind: String,
    pub geometry: GeoJsonGeometry,
    pub properties: FeatureProperties,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureCollection {
    #[serde(rename = "type")]
    pub kind: String,
    pub features: Vec<GeoJsonFeature>,
}

fn ring_to_positions(ring: &[Pt]) -> Vec<[f64; 2]> {
    ring.iter().map(|p| [p.x, p.y]).collect()
}

fn positions_to_ring(positions: &[[f64; 2]]) -> Vec<Pt> {
    positions.iter().map(|&[x, y]| Pt::new(x, y)).collect()
}

/// Build the GeoJSON document for a feature layer.
pub fn feature_collection(features: &[TofFeature]) -> FeatureCollection {
    FeatureCollection {
        kind: "FeatureCollection".into(),
        features: features
            .iter()
            .map(|f| {
                let mut coordinates = vec![ring_to_positions(&f.geometry.exterior)];
                coordinates.extend(f.geometry.holes.iter().map(|h| ring_to_positions(h)));
                GeoJsonFeature {
                    kind: "Feature".into(),
                    geometry: GeoJsonGeometry {
                        kind: "Polygon".into(),
                        coordinates,
                    },
                    properties: FeatureProperties {
                        id: f.id,
                        class_code: f.tof_class.code(),
                        class_name: f.tof_class.name().into(),
                        area_m2: f.descriptors.area_m2,
                        length_m: f.descriptors.length_m,
                        width_m: f.descriptors.width_m,
                        elongation: f.descriptors.elongation,
                        angle_deg: f.descriptors.angle_deg,
                    },
                }
            })
            .collect(),
    }
}

/// Rebuild the feature layer from a parsed document. Geometry is validated
/// (ring closure, orientation); descriptors and class are taken as stored.
pub fn collection_to_features(doc: &FeatureCollection) -> Result<Vec<TofFeature>> {
    if doc.kind != "FeatureCollection" {
        return Err(Error::Data(format!(
            "expected a FeatureCollection, found type {:?}",
            doc.kind
        )));
    }
    doc.features
        .iter()
        .map(|f| {
            if f.kind != "Feature" {
                return Err(Error::Data(format!(
                    "expected a Feature, found type {:?}",
                    f.kind
                )));
            }
            if f.geometry.kind != "Polygon" {
                return Err(Error::Data(format!(
                    "feature {}: only Polygon geometry is supported, found {:?}",
                    f.properties.id, f.geometry.kind
                )));
            }
            let mut rings = f.geometry.coordinates.iter();
            let exterior = rings
                .next()
                .ok_or_else(|| {
                    Error::Data(format!("feature {}: polygon has no rings", f.properties.id))
                })
                .map(|r| positions_to_ring(r))?;
            let holes = rings.map(|r| positions_to_ring(r)).collect();
            let geometry = PolygonGeom::new(exterior, holes)?;
            Ok(TofFeature {
                id: f.properties.id,
                geometry,
                descriptors: ShapeDescriptors {
                    area_m2: f.properties.area_m2,
                    length_m: f.properties.length_m,
                    width_m: f.properties.width_m,
                    elongation: f.properties.elongation,
                    angle_deg: f.properties.angle_deg,
                },
                tof_class: TofClass::from_code(f.properties.class_code)?,
            })
        })
        .collect()
}

pub fn write_geojson(path: &Path, features: &[TofFeature]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, &feature_collection(features))?;
    Ok(())
}

pub fn read_geojson(path: &Path) -> Result<Vec<TofFeature>> {
    let file = BufReader::new(File::open(path)?);
    let doc: FeatureCollection = serde_json::from_reader(file)?;
    collection_to_features(&doc)
}
