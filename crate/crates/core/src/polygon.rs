//! Polygon representation shared by the vectorizer, shape descriptors and
//! rasterization. Coordinates are map units (meters), y increasing north.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

impl Pt {
    pub fn new(x: f64, y: f64) -> Self {
        Pt { x, y }
    }
}

/// Signed shoelace area of a closed ring (first == last vertex).
/// Positive for counterclockwise rings in a y-up coordinate system.
pub fn ring_signed_area(ring: &[Pt]) -> f64 {
    let mut acc = 0.0;
    for pair in ring.windows(2) {
        acc += pair[0].x * pair[1].y - pair[1].x * pair[0].y;
    }
    0.5 * acc
}

/// Polygon with one exterior ring (counterclockwise, positive area) and any
/// number of hole rings (clockwise, negative area). Rings are closed: the
/// first vertex is repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonGeom {
    pub exterior: Vec<Pt>,
    pub holes: Vec<Vec<Pt>>,
}

impl PolygonGeom {
    pub fn new(exterior: Vec<Pt>, holes: Vec<Vec<Pt>>) -> Result<Self> {
        let poly = PolygonGeom { exterior, holes };
        poly.validate()?;
        Ok(poly)
    }

    pub fn validate(&self) -> Result<()> {
        check_ring(&self.exterior)?;
        if ring_signed_area(&self.exterior) <= 0.0 {
            return Err(Error::DegenerateGeometry(
                "exterior ring must be counterclockwise with positive area".into(),
            ));
        }
        for hole in &self.holes {
            check_ring(hole)?;
            if ring_signed_area(hole) >= 0.0 {
                return Err(Error::DegenerateGeometry(
                    "hole rings must be clockwise with negative area".into(),
                ));
            }
        }
        Ok(())
    }

    /// Net enclosed area: exterior minus holes (shoelace; hole rings carry
    /// negative signed area, so a plain sum does the subtraction).
    pub fn area(&self) -> f64 {
        let mut a = ring_signed_area(&self.exterior);
        for hole in &self.holes {
            a += ring_signed_area(hole);
        }
        a
    }

    pub fn perimeter(&self) -> f64 {
        ring_length(&self.exterior) + self.holes.iter().map(|h| ring_length(h)).sum::<f64>()
    }

    /// Even-odd containment over all rings: inside the exterior and outside
    /// every hole. Points exactly on an edge are not guaranteed either way.
    pub fn contains_point(&self, p: Pt) -> bool {
        let mut inside = point_in_ring(p, &self.exterior);
        for hole in &self.holes {
            if point_in_ring(p, hole) {
                inside = false;
            }
        }
        inside
    }

    /// Axis-aligned bounds of the exterior ring: (min_x, min_y, max_x, max_y).
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.exterior {
            b.0 = b.0.min(p.x);
            b.1 = b.1.min(p.y);
            b.2 = b.2.max(p.x);
            b.3 = b.3.max(p.y);
        }
        b
    }
}

fn check_ring(ring: &[Pt]) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::DegenerateGeometry(format!(
            "ring needs at least 4 vertices including closure, got {}",
            ring.len()
        )));
    }
    let (first, last) = (ring[0], ring[ring.len() - 1]);
    if first != last {
        return Err(Error::DegenerateGeometry(
            "ring is not closed (first vertex != last)".into(),
        ));
    }
    Ok(())
}

pub fn ring_length(ring: &[Pt]) -> f64 {
    ring.windows(2)
        .map(|p| ((p[1].x - p[0].x).powi(2) + (p[1].y - p[0].y).powi(2)).sqrt())
        .sum()
}

/// Even-odd ray crossing test with the half-open edge rule
/// (p.y <= y < q.y or q.y <= y < p.y), which counts each crossing once.
fn point_in_ring(p: Pt, ring: &[Pt]) -> bool {
    let mut inside = false;
    for pair in ring.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a.y <= p.y) != (b.y <= p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
