//! Painting classified polygons back into a label raster. A pixel gets a
//! feature's class code exactly when its center lies inside the feature's
//! geometry, which makes rasterization the inverse of the pixel-exact
//! boundary tracing.

use crate::classify::TofFeature;
use crate::error::Result;
use crate::polygon::{PolygonGeom, Pt};
use crate::raster::{GeoTransform, RasterGrid};

/// Paint one polygon onto a label plane, overwriting whatever is there
/// (painter order: later features win).
///
/// Scanline evaluation of the same even-odd, half-open rule as
/// `PolygonGeom::contains_point`: per pixel row, every ring edge spanning
/// the row center contributes a crossing computed with the identical
/// expression, and a center is inside between odd and even crossings. The
/// two routes agree pixel-for-pixel (see the equivalence property test).
pub fn paint_polygon(
    labels: &mut [u8],
    width: usize,
    height: usize,
    transform: &GeoTransform,
    poly: &PolygonGeom,
    code: u8,
) {
    let (min_x, min_y, max_x, max_y) = poly.bounds();
    let mut crossings: Vec<f64> = Vec::new();
    for row in 0..height {
        let y = transform.pixel_center(0, row).1;
        // Exact skip: outside the y-range every half-open edge test has the
        // same outcome on both endpoints, so no crossings exist.
        if y < min_y || y > max_y {
            continue;
        }
        crossings.clear();
        for ring in std::iter::once(&poly.exterior).chain(&poly.holes) {
            for pair in ring.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if (a.y <= y) != (b.y <= y) {
                    crossings.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
        }
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_unstable_by(|p, q| p.partial_cmp(q).expect("finite crossings"));
        // A center is inside when an odd number of crossings lie strictly
        // to its right: the spans [c0, c1), [c2, c3), ...
        for span in crossings.chunks_exact(2) {
            let (x0, x1) = (span[0], span[1]);
            if x1 <= min_x || x0 > max_x {
                continue;
            }
            // Candidate column range, one wider than the span on each side;
            // each candidate center is tested with exact float compares.
            let lo = ((x0 - transform.origin_x) / transform.pixel_size_x - 0.5).floor() as i64 - 1;
            let hi = ((x1 - transform.origin_x) / transform.pixel_size_x - 0.5).ceil() as i64 + 1;
            for col in lo.max(0)..=hi.min(width as i64 - 1) {
                let cx = transform.pixel_center(col as usize, row).0;
                if cx >= x0 && cx < x1 {
                    labels[row * width + col as usize] = code;
                }
            }
        }
    }
}

/// Rasterize a classified feature layer into a single-band label grid.
/// Features are painted in order; the reference workflow produces disjoint
/// features, so order only matters for hand-built overlapping inputs.
pub fn rasterize_features(
    features: &[TofFeature],
    width: usize,
    height: usize,
    transform: GeoTransform,
) -> Result<RasterGrid> {
    let mut labels = vec![0u8; width * height];
    for f in features {
        paint_polygon(
            &mut labels,
            width,
            height,
            &transform,
            &f.geometry,
            f.tof_class.code(),
        );
    }
    RasterGrid::single_u8(width, height, labels, None, transform)
}

/// Reference implementation: test every pixel center directly. Used to pin
/// the scanline down in tests and available for debugging.
pub fn paint_polygon_per_pixel(
    labels: &mut [u8],
    width: usize,
    height: usize,
    transform: &GeoTransform,
    poly: &PolygonGeom,
    code: u8,
) {
    for row in 0..height {
        for col in 0..width {
            let (x, y) = transform.pixel_center(col, row);
            if poly.contains_point(Pt::new(x, y)) {
                labels[row * width + col] = code;
            }
        }
    }
}
