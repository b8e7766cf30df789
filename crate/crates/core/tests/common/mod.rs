//! Independent oracles shared by the integration tests. Each one recomputes
//! a result the library produces, using a deliberately different (usually
//! slower, exhaustive) algorithm, so agreement is evidence rather than
//! tautology.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tofmap_core::classify::TofClass;
use tofmap_core::merge::SoftmaxPatch;
use tofmap_core::polygon::{PolygonGeom, Pt};

/// Exact optimal 1-D 2-means by exhaustive split search. In one dimension
/// the optimal clusters are contiguous in sorted order, so trying every
/// split point finds the global minimum of the within-cluster sum of
/// squares. Returns ascending centers.
pub fn two_means_exact(values: &[f64]) -> [f64; 2] {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    assert!(n >= 2, "oracle needs at least two values");

    // Prefix sums for O(1) segment cost: wcss = sum_sq - sum^2 / len.
    let mut sum = vec![0.0f64; n + 1];
    let mut sum_sq = vec![0.0f64; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        sum[i + 1] = sum[i] + v;
        sum_sq[i + 1] = sum_sq[i] + v * v;
    }
    let seg_cost = |a: usize, b: usize| -> f64 {
        let len = (b - a) as f64;
        let s = sum[b] - sum[a];
        (sum_sq[b] - sum_sq[a]) - s * s / len
    };

    let mut best = (f64::INFINITY, 1usize);
    for k in 1..n {
        let cost = seg_cost(0, k) + seg_cost(k, n);
        if cost < best.0 {
            best = (cost, k);
        }
    }
    let k = best.1;
    [sum[k] / k as f64, (sum[n] - sum[k]) / (n - k) as f64]
}

/// Brute-force softmax merging: for every pixel, find all covering windows
/// directly and average their probabilities in f64. Returns
/// (means `[pixel][class]`, labels) with the same lowest-index tie-break the
/// library documents. Panics on an uncovered pixel (callers arrange full
/// coverage).
pub fn merge_oracle(
    width: usize,
    height: usize,
    patches: &[SoftmaxPatch],
) -> (Vec<f64>, Vec<u8>) {
    let classes = TofClass::COUNT;
    let mut means = vec![0.0f64; width * height * classes];
    let mut labels = vec![0u8; width * height];
    for row in 0..height {
        for col in 0..width {
            let mut sums = vec![0.0f64; classes];
            let mut covering = 0u32;
            for p in patches {
                let inside = row >= p.row
                    && row < p.row + p.window
                    && col >= p.col
                    && col < p.col + p.window;
                if inside {
                    let v = p.pixel(row - p.row, col - p.col);
                    for (s, &x) in sums.iter_mut().zip(v) {
                        *s += x as f64;
                    }
                    covering += 1;
                }
            }
            assert!(covering > 0, "oracle pixel ({row}, {col}) uncovered");
            let mut arg = 0usize;
            for c in 0..classes {
                let mean = sums[c] / covering as f64;
                means[(row * width + col) * classes + c] = mean;
                if mean > means[(row * width + col) * classes + arg] {
                    arg = c;
                }
            }
            labels[row * width + col] = arg as u8;
        }
    }
    (means, labels)
}

/// Minimum enclosing-rectangle area by rotation sweep: rotate the exterior
/// by every angle in [0°, 180°) at the given step and take the smallest
/// axis-aligned bounding-box area. With a fine step this brackets the true
/// minimum from above within O(step²).
pub fn min_rect_area_sweep(poly: &PolygonGeom, step_deg: f64) -> f64 {
    let pts = &poly.exterior[..poly.exterior.len() - 1];
    let mut best = f64::INFINITY;
    let mut angle = 0.0f64;
    while angle < 180.0 {
        let (sin, cos) = angle.to_radians().sin_cos();
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            let x = p.x * cos + p.y * sin;
            let y = -p.x * sin + p.y * cos;
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        best = best.min((max_x - min_x) * (max_y - min_y));
        angle += step_deg;
    }
    best
}

/// Random convex polygon: vertices in angular order on a randomly scaled,
/// rotated and translated ellipse. Angular order on a convex curve makes the
/// ring convex and counterclockwise by construction.
pub fn random_convex_polygon(rng: &mut ChaCha8Rng, max_semi_axis: f64) -> PolygonGeom {
    let vertices = rng.random_range(3..=25usize);
    let a = rng.random_range(0.2 * max_semi_axis..max_semi_axis);
    let b = rng.random_range(0.2 * max_semi_axis..max_semi_axis);
    let tilt = rng.random_range(0.0..std::f64::consts::PI);
    let (cx, cy) = (
        rng.random_range(-1000.0..1000.0),
        rng.random_range(-1000.0..1000.0),
    );
    // Jittered uniform spacing keeps consecutive vertices well separated,
    // so no draw is close to collinear-degenerate.
    let angles: Vec<f64> = (0..vertices)
        .map(|i| {
            std::f64::consts::TAU * (i as f64 + rng.random_range(0.05..0.95)) / vertices as f64
        })
        .collect();
    let (sin_t, cos_t) = tilt.sin_cos();
    let mut ring: Vec<Pt> = angles
        .iter()
        .map(|t| {
            let (ex, ey) = (a * t.cos(), b * t.sin());
            Pt::new(
                cx + ex * cos_t - ey * sin_t,
                cy + ex * sin_t + ey * cos_t,
            )
        })
        .collect();
    ring.push(ring[0]);
    PolygonGeom::new(ring, vec![]).expect("ellipse samples form a valid convex ring")
}

/// Seeded generator for reproducible randomized oracles.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
