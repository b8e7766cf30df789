//! Mask → polygon conversion: connected components, pixel-exact boundary
//! tracing (exterior rings + holes), and Douglas–Peucker simplification.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polygon::{ring_signed_area, PolygonGeom, Pt};
use crate::raster::{BinaryMask, GeoTransform};

/// Foreground components of a mask, 8-connected, with a shared label image.
/// Component order is deterministic: by row-major position of each
/// component's first (top-left) pixel.
#[derive(Debug, Clone)]
pub struct ComponentSet {
    pub width: usize,
    pub height: usize,
    /// 0 = background, i+1 = component i.
    pub labels: Vec<u32>,
    pub components: Vec<ComponentInfo>,
}

#[derive(Debug, Clone)]
pub struct ComponentInfo {
    pub min_col: usize,
    pub min_row: usize,
    pub max_col: usize,
    pub max_row: usize,
    pub pixel_count: usize,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Pixels of one component in row-major order.
    pub fn pixels_of(&self, idx: usize) -> Vec<(usize, usize)> {
        let info = &self.components[idx];
        let want = (idx + 1) as u32;
        let mut out = Vec::with_capacity(info.pixel_count);
        for row in info.min_row..=info.max_row {
            for col in info.min_col..=info.max_col {
                if self.labels[row * self.width + col] == want {
                    out.push((col, row));
                }
            }
        }
        out
    }
}

/// Partition foreground pixels into 8-connected components.
pub fn extract_components(mask: &BinaryMask) -> ComponentSet {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![0u32; w * h];
    let mut components = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            if !mask.bits[i] || labels[i] != 0 {
                continue;
            }
            let id = components.len() as u32 + 1;
            let mut info = ComponentInfo {
                min_col: col,
                min_row: row,
                max_col: col,
                max_row: row,
                pixel_count: 0,
            };
            labels[i] = id;
            stack.push((col, row));
            while let Some((c, r)) = stack.pop() {
                info.pixel_count += 1;
                info.min_col = info.min_col.min(c);
                info.max_col = info.max_col.max(c);
                info.min_row = info.min_row.min(r);
                info.max_row = info.max_row.max(r);
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                        if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                            continue;
                        }
                        let ni = nr as usize * w + nc as usize;
                        if mask.bits[ni] && labels[ni] == 0 {
                            labels[ni] = id;
                            stack.push((nc as usize, nr as usize));
                        }
                    }
                }
            }
            components.push(info);
        }
    }

    ComponentSet {
        width: w,
        height: h,
        labels,
        components,
    }
}

// Directed boundary-edge directions in pixel space (y grows downward):
// 0 = +x, 1 = +y, 2 = -x, 3 = -y. Each foreground pixel contributes one
// directed unit edge per side that faces background, oriented so the
// interior is on the consistent side of the walk.
const DIR_VEC: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

struct EdgeGrid {
    vw: usize, // vertices per row = bitmap width + 1
    present: Vec<bool>,
}

impl EdgeGrid {
    fn edge_id(&self, vc: usize, vr: usize, dir: usize) -> usize {
        (vr * self.vw + vc) * 4 + dir
    }
}

/// Trace all boundary rings of a local bitmap. Returned rings are closed
/// vertex loops in local pixel-corner coordinates, one vertex per unit edge.
/// Positive pixel-space signed area = exterior, negative = hole.
fn trace_rings(bitmap: &[bool], w: usize, h: usize) -> Vec<Vec<(usize, usize)>> {
    let at = |c: i64, r: i64| -> bool {
        c >= 0 && r >= 0 && c < w as i64 && r < h as i64 && bitmap[r as usize * w + c as usize]
    };
    let mut grid = EdgeGrid {
        vw: w + 1,
        present: vec![false; (w + 1) * (h + 1) * 4],
    };
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            if !at(c, r) {
                continue;
            }
            let (cu, ru) = (c as usize, r as usize);
            if !at(c, r - 1) {
                let id = grid.edge_id(cu, ru, 0); // top, heading +x
                grid.present[id] = true;
            }
            if !at(c + 1, r) {
                let id = grid.edge_id(cu + 1, ru, 1); // right, heading +y
                grid.present[id] = true;
            }
            if !at(c, r + 1) {
                let id = grid.edge_id(cu + 1, ru + 1, 2); // bottom, heading -x
                grid.present[id] = true;
            }
            if !at(c - 1, r) {
                let id = grid.edge_id(cu, ru + 1, 3); // left, heading -y
                grid.present[id] = true;
            }
        }
    }

    let mut used = vec![false; grid.present.len()];
    let mut rings = Vec::new();
    for start in 0..grid.present.len() {
        if !grid.present[start] || used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut edge = start;
        loop {
            used[edge] = true;
            let (vertex, dir) = (edge / 4, edge % 4);
            let (vc, vr) = (vertex % grid.vw, vertex / grid.vw);
            ring.push((vc, vr));
            let (dc, dr) = DIR_VEC[dir];
            let (nc, nr) = ((vc as i64 + dc) as usize, (vr as i64 + dr) as usize);
            // Successor edge at the end vertex. At a checkerboard vertex two
            // outgoing edges exist; taking the clockwise-rotated direction
            // keeps diagonal foreground connected as one pinched ring while
            // diagonal background stays split into separate holes.
            let preferred = grid.edge_id(nc, nr, (dir + 3) % 4);
            let next = if grid.present[preferred] {
                preferred
            } else {
                let mut found = None;
                for d in 0..4 {
                    let cand = grid.edge_id(nc, nr, d);
                    if grid.present[cand] && !used[cand] || cand == start {
                        found = Some(cand);
                        break;
                    }
                }
                found.expect("boundary walk must continue: edge flux is balanced")
            };
            if next == start {
                break;
            }
            edge = next;
        }
        rings.push(ring);
    }
    rings
}

/// Convert a pixel set into a polygon whose rings follow the pixel edges
/// exactly; enclosed area equals pixel_count × pixel_area. Interior holes
/// become hole rings, all of them kept regardless of size.
pub fn polygonize_pixels(pixels: &[(usize, usize)], transform: &GeoTransform) -> Result<PolygonGeom> {
    if pixels.is_empty() {
        return Err(Error::EmptyInput("polygonize of empty component".into()));
    }
    let min_col = pixels.iter().map(|p| p.0).min().unwrap();
    let min_row = pixels.iter().map(|p| p.1).min().unwrap();
    let max_col = pixels.iter().map(|p| p.0).max().unwrap();
    let max_row = pixels.iter().map(|p| p.1).max().unwrap();
    let (w, h) = (max_col - min_col + 1, max_row - min_row + 1);
    let mut bitmap = vec![false; w * h];
    for (c, r) in pixels {
        bitmap[(r - min_row) * w + (c - min_col)] = true;
    }
    rings_to_polygon(trace_rings(&bitmap, w, h), min_col, min_row, transform)
}

/// `polygonize_pixels` for one component of a `ComponentSet`.
pub fn polygonize(set: &ComponentSet, idx: usize, transform: &GeoTransform) -> Result<PolygonGeom> {
    let info = &set.components[idx];
    let want = (idx + 1) as u32;
    let (w, h) = (info.max_col - info.min_col + 1, info.max_row - info.min_row + 1);
    let mut bitmap = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            bitmap[r * w + c] =
                set.labels[(r + info.min_row) * set.width + (c + info.min_col)] == want;
        }
    }
    rings_to_polygon(trace_rings(&bitmap, w, h), info.min_col, info.min_row, transform)
}

fn rings_to_polygon(
    rings: Vec<Vec<(usize, usize)>>,
    off_col: usize,
    off_row: usize,
    transform: &GeoTransform,
) -> Result<PolygonGeom> {
    let mut exterior: Option<Vec<Pt>> = None;
    let mut holes = Vec::new();
    for ring in rings {
        // orientation from the exact integer pixel-space shoelace sum
        let mut doubled = 0i64;
        for i in 0..ring.len() {
            let (x0, y0) = ring[i];
            let (x1, y1) = ring[(i + 1) % ring.len()];
            doubled += x0 as i64 * y1 as i64 - x1 as i64 * y0 as i64;
        }
        // map conversion flips y, so reverse each ring to keep exteriors
        // counterclockwise (positive) in map coordinates
        let mut pts: Vec<Pt> = ring
            .iter()
            .rev()
            .map(|(vc, vr)| {
                let (x, y) =
                    transform.pixel_to_map((vc + off_col) as f64, (vr + off_row) as f64);
                Pt::new(x, y)
            })
            .collect();
        let first = pts[0];
        pts.push(first);
        if doubled > 0 {
            if exterior.is_some() {
                return Err(Error::DegenerateGeometry(
                    "pixel set is not a single connected component".into(),
                ));
            }
            exterior = Some(pts);
        } else {
            holes.push(pts);
        }
    }
    let exterior = exterior.ok_or_else(|| {
        Error::DegenerateGeometry("no exterior ring traced for component".into())
    })?;
    Ok(PolygonGeom { exterior, holes })
}

/// Vectorize a whole mask: all components, traced in parallel, output order
/// matching `extract_components`.
pub fn vectorize_mask(mask: &BinaryMask) -> Result<Vec<PolygonGeom>> {
    let set = extract_components(mask);
    (0..set.len())
        .into_par_iter()
        .map(|i| polygonize(&set, i, &mask.transform))
        .collect()
}

/// Drop hole rings with area below `min_area_m2` (slivers from single-pixel
/// gaps that survived closing).
pub fn drop_small_holes(poly: PolygonGeom, min_area_m2: f64) -> PolygonGeom {
    PolygonGeom {
        exterior: poly.exterior,
        holes: poly
            .holes
            .into_iter()
            .filter(|h| ring_signed_area(h).abs() >= min_area_m2)
            .collect(),
    }
}

fn seg_dist(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return ((p.x - a.x).powi(2) + (p.y - a.y).powi(2)).sqrt();
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    let (cx, cy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
}

fn simplify_ring(ring: &[Pt], tolerance: f64) -> Vec<Pt> {
    // Anchor selection decides which vertices can never be removed. The
    // trace starts a ring at an arbitrary boundary pixel, so anchoring there
    // would let the closing chord cut a real corner that happens to lie
    // within tolerance of it. Instead: rotate the ring to its lexicographic
    // extreme (always a convex-hull corner) and take the vertex farthest
    // from it (also a hull vertex) as the second anchor, then simplify the
    // two chains between them with ordinary chord-based recursion.
    if ring.len() < 5 {
        // A triangle is already minimal and anything smaller is degenerate.
        return ring.to_vec();
    }
    let open = &ring[..ring.len() - 1];
    let n = open.len();
    let start = (0..n)
        .min_by(|&i, &j| {
            (open[i].y, open[i].x)
                .partial_cmp(&(open[j].y, open[j].x))
                .expect("ring coordinates are finite")
        })
        .expect("ring is non-empty");
    let mut pts: Vec<Pt> = Vec::with_capacity(n + 1);
    pts.extend((0..n).map(|k| open[(start + k) % n]));
    pts.push(pts[0]);

    let second = (1..n)
        .max_by(|&i, &j| {
            let d = |p: Pt| (p.x - pts[0].x).powi(2) + (p.y - pts[0].y).powi(2);
            d(pts[i])
                .partial_cmp(&d(pts[j]))
                .expect("ring coordinates are finite")
        })
        .expect("ring has at least two vertices");

    let mut keep = vec![false; n + 1];
    keep[0] = true;
    keep[second] = true;
    keep[n] = true;
    let mut stack = vec![(0usize, second), (second, n)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let mut far = (0.0f64, a);
        for i in a + 1..b {
            let d = seg_dist(pts[i], pts[a], pts[b]);
            if d > far.0 {
                far = (d, i);
            }
        }
        if far.0 > tolerance {
            keep[far.1] = true;
            stack.push((a, far.1));
            stack.push((far.1, b));
        }
    }
    let simplified: Vec<Pt> = pts
        .iter()
        .zip(&keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect();
    // a ring that collapses below 4 vertices (or degenerates) is kept as-is
    if simplified.len() < 4 {
        return ring.to_vec();
    }
    let (orig, simp) = (ring_signed_area(ring), ring_signed_area(&simplified));
    if simp == 0.0 || orig.signum() != simp.signum() {
        return ring.to_vec();
    }
    simplified
}

/// Douglas–Peucker simplification, applied to each ring independently.
/// Every removed vertex lies within `tolerance` of the simplified ring.
/// Tolerance 0 is the identity.
pub fn simplify_dp(poly: &PolygonGeom, tolerance: f64) -> Result<PolygonGeom> {
    if tolerance < 0.0 {
        return Err(Error::Parameter(format!(
            "simplification tolerance must be >= 0, got {tolerance}"
        )));
    }
    if tolerance == 0.0 {
        return Ok(poly.clone());
    }
    Ok(PolygonGeom {
        exterior: simplify_ring(&poly.exterior, tolerance),
        holes: poly
            .holes
            .iter()
            .map(|h| simplify_ring(h, tolerance))
            .collect(),
    })
}
