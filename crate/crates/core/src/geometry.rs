//! Shape descriptors for classification: area, minimum-area rotated
//! enclosing rectangle, width/length/elongation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{PolygonGeom, Pt};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeDescriptors {
    /// Net polygon area (exterior minus holes), m².
    pub area_m2: f64,
    /// Longer side of the minimum-area enclosing rotated rectangle, m.
    pub length_m: f64,
    /// Shorter side of that rectangle, m; the operative "width" for the class rules.
    pub width_m: f64,
    /// length / width, >= 1.
    pub elongation: f64,
    /// Orientation of the rectangle's long side, degrees in [0, 180).
    pub angle_deg: f64,
}

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull (Andrew's monotone chain), counterclockwise, no repeated
/// first point. Collinear points on the hull boundary are dropped.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut pts: Vec<Pt> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let half_hull = |iter: &mut dyn Iterator<Item = Pt>| {
        let mut chain: Vec<Pt> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop(); // endpoint repeats in the other chain
        chain
    };
    let mut hull = half_hull(&mut pts.iter().copied());
    hull.extend(half_hull(&mut pts.iter().rev().copied()));
    hull
}

/// Minimum-area enclosing rotated rectangle of the polygon's exterior.
/// One side of the optimum is collinear with a hull edge, so the search
/// walks hull edges and projects onto each edge frame.
///
/// The minimum is not always unique — for an acute triangle all three
/// edge-flush rectangles have area 2·(triangle area) — so ties (relative
/// 1e-9 in area) are broken toward the narrowest rectangle, then the
/// shortest, then the smallest angle. The candidate set is intrinsic to the
/// polygon, which keeps the reported side lengths deterministic and
/// invariant under rigid motion even at ties.
///
/// Returns (length, width, angle°): length >= width, angle is the long
/// side's orientation in [0, 180).
pub fn min_rotated_rect(poly: &PolygonGeom) -> Result<(f64, f64, f64)> {
    let hull = convex_hull(&poly.exterior);
    if hull.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "minimum rectangle needs a 2-D polygon, hull has {} points",
            hull.len()
        )));
    }

    // (area, length, width, angle of the long side in degrees)
    let mut candidates: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(hull.len());
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        let u = (ex / len, ey / len);
        let v = (-u.1, u.0);
        let (mut min_u, mut max_u) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_v, mut max_v) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let pu = p.x * u.0 + p.y * u.1;
            let pv = p.x * v.0 + p.y * v.1;
            min_u = min_u.min(pu);
            max_u = max_u.max(pu);
            min_v = min_v.min(pv);
            max_v = max_v.max(pv);
        }
        let along = max_u - min_u;
        let across = max_v - min_v;
        let edge_angle = u.1.atan2(u.0).to_degrees();
        let long_angle = if along >= across {
            edge_angle
        } else {
            edge_angle + 90.0
        }
        .rem_euclid(180.0);
        candidates.push((
            along * across,
            along.max(across),
            along.min(across),
            long_angle,
        ));
    }

    let min_area = candidates.iter().fold(f64::INFINITY, |m, c| m.min(c.0));
    let (_, length, width, angle) = *candidates
        .iter()
        .filter(|c| c.0 <= min_area * (1.0 + 1e-9))
        .min_by(|a, b| {
            (a.2, a.1, a.3)
                .partial_cmp(&(b.2, b.1, b.3))
                .expect("rectangle extents are finite")
        })
        .expect("hull with >= 3 points yields at least one edge frame");
    if width == 0.0 {
        return Err(Error::DegenerateGeometry(
            "polygon is collinear: minimum rectangle has zero width".into(),
        ));
    }
    Ok((length, width, angle))
}

/// All shape descriptors of a polygon. Holes reduce the area but do not
/// affect the enclosing rectangle (outer form only).
pub fn shape_descriptors(poly: &PolygonGeom) -> Result<ShapeDescriptors> {
    let area = poly.area();
    if !(area > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "polygon area must be positive, got {area}"
        )));
    }
    let (length, width, angle) = min_rotated_rect(poly)?;
    Ok(ShapeDescriptors {
        area_m2: area,
        length_m: length,
        width_m: width,
        elongation: length / width,
        angle_deg: angle,
    })
}
