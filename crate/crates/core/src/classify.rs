//! Rule-based classification of woody-vegetation polygons into
//! Forest / Patch / Linear / Tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{shape_descriptors, ShapeDescriptors};
use crate::polygon::PolygonGeom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum TofClass {
    Background = 0,
    Forest = 1,
    Patch = 2,
    Linear = 3,
    Tree = 4,
}

impl TofClass {
    pub const COUNT: usize = 5;
    /// The four mapped classes; Background is a raster-only concept and is
    /// never assigned to a polygon.
    pub const WOODY: [TofClass; 4] = [
        TofClass::Forest,
        TofClass::Patch,
        TofClass::Linear,
        TofClass::Tree,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<TofClass> {
        Ok(match code {
            0 => TofClass::Background,
            1 => TofClass::Forest,
            2 => TofClass::Patch,
            3 => TofClass::Linear,
            4 => TofClass::Tree,
            other => {
                return Err(Error::Data(format!("unknown class code {other}")));
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TofClass::Background => "Background",
            TofClass::Forest => "Forest",
            TofClass::Patch => "Patch",
            TofClass::Linear => "Linear",
            TofClass::Tree => "Tree",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ClassifyParams {
    /// Swap the Tree/Linear rule order: when set, an elongated shape wins
    /// Linear even below the Tree area cutoff. Default follows the class
    /// definitions, whose Tree rule carries no elongation qualifier.
    pub linear_first: bool,
}

/// Rule cascade, first match wins. All comparisons strict, so exact
/// boundary values fall through to the later rule:
///  1. width > 20 m and area > 5000 m²  → Forest (the FAO forest floor)
///  2. area < 500 m²                    → Tree
///  3. elongation > 3                   → Linear
///  4. otherwise                        → Patch
pub fn classify_feature(d: &ShapeDescriptors, params: &ClassifyParams) -> TofClass {
    if d.width_m > 20.0 && d.area_m2 > 5000.0 {
        return TofClass::Forest;
    }
    if params.linear_first {
        if d.elongation > 3.0 {
            return TofClass::Linear;
        }
        if d.area_m2 < 500.0 {
            return TofClass::Tree;
        }
    } else {
        if d.area_m2 < 500.0 {
            return TofClass::Tree;
        }
        if d.elongation > 3.0 {
            return TofClass::Linear;
        }
    }
    TofClass::Patch
}

/// A classified reference polygon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TofFeature {
    pub id: u64,
    pub geometry: PolygonGeom,
    pub descriptors: ShapeDescriptors,
    pub tof_class: TofClass,
}

impl TofFeature {
    pub fn from_polygon(id: u64, geometry: PolygonGeom, params: &ClassifyParams) -> Result<Self> {
        let descriptors = shape_descriptors(&geometry)
            .map_err(|e| Error::DegenerateGeometry(format!("feature {id}: {e}")))?;
        let tof_class = classify_feature(&descriptors, params);
        Ok(TofFeature {
            id,
            geometry,
            descriptors,
            tof_class,
        })
    }
}

/// (Re)classify a layer: descriptors are recomputed from the geometry, so
/// stored descriptors can never drift from the geometry they describe.
/// Order is preserved; running it twice is a no-op.
pub fn classify_layer(features: Vec<TofFeature>, params: &ClassifyParams) -> Result<Vec<TofFeature>> {
    features
        .into_iter()
        .map(|f| TofFeature::from_polygon(f.id, f.geometry, params))
        .collect()
}

/// Feature count per class code (index = code).
pub fn class_counts(features: &[TofFeature]) -> [usize; TofClass::COUNT] {
    let mut counts = [0usize; TofClass::COUNT];
    for f in features {
        counts[f.tof_class.code() as usize] += 1;
    }
    counts
}
