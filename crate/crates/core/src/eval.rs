//! Pixel-wise accuracy assessment: confusion matrix accumulation, per-class
//! precision/recall/F1/IoU, unweighted macro means over the woody classes,
//! and the row-normalized error matrix.

use serde::{Deserialize, Serialize};

use crate::classify::TofClass;
use crate::error::{Error, Result};
use crate::raster::RasterGrid;

const N: usize = TofClass::COUNT;

/// 5x5 pixel count matrix; rows are ground truth, columns are prediction,
/// class order Background, Forest, Patch, Linear, Tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N]; N],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [[u64; N]; N]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    /// Count one code pair per pixel. The slices must be parallel views of
    /// the same pixels.
    pub fn accumulate_codes(&mut self, gt: &[u8], pred: &[u8]) -> Result<()> {
        if gt.len() != pred.len() {
            return Err(Error::Alignment(format!(
                "ground truth has {} pixels but prediction has {}",
                gt.len(),
                pred.len()
            )));
        }
        for (&g, &p) in gt.iter().zip(pred) {
            let g = TofClass::from_code(g)?.code() as usize;
            let p = TofClass::from_code(p)?.code() as usize;
            self.counts[g][p] += 1;
        }
        Ok(())
    }

    /// Count every pixel of a ground-truth/prediction raster pair. Streaming:
    /// call once per tile to evaluate a whole survey.
    pub fn accumulate(&mut self, gt: &RasterGrid, pred: &RasterGrid) -> Result<()> {
        if !gt.same_grid(pred) {
            return Err(Error::Alignment(format!(
                "ground truth is {}x{} but prediction is {}x{} (or transforms differ)",
                gt.width, gt.height, pred.width, pred.height
            )));
        }
        self.accumulate_codes(gt.band_u8(0)?, pred.band_u8(0)?)
    }

    /// Add another matrix (parallel per-tile reduction; integer counts make
    /// the reduction order irrelevant).
    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (mine, theirs) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten())
        {
            *mine += theirs;
        }
    }
}

/// Precision, recall, F1, and IoU for one class. Zero-denominator cases are
/// defined as 0 so sparse fixtures still produce stable macro means.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
}

/// Per-class metrics for all five classes, in class-code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: [ClassMetrics; N],
    pub pixels: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Derive per-class metrics from a confusion matrix. For class c: TP is the
/// diagonal entry, FP the rest of its column, FN the rest of its row.
pub fn per_class_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix has no pixels".into()));
    }
    let mut per_class = [ClassMetrics::default(); N];
    for (c, m) in per_class.iter_mut().enumerate() {
        let tp = cm.counts[c][c];
        let fp = cm.col_sum(c) - tp;
        let fn_ = cm.row_sum(c) - tp;
        m.precision = ratio(tp, tp + fp);
        m.recall = ratio(tp, tp + fn_);
        m.iou = ratio(tp, tp + fp + fn_);
        m.f1 = if m.precision + m.recall > 0.0 {
            2.0 * m.precision * m.recall / (m.precision + m.recall)
        } else {
            0.0
        };
    }
    Ok(MetricsReport {
        per_class,
        pixels: total,
    })
}

/// Unweighted macro means (mIoU, mF1) over the four woody classes;
/// Background is excluded so the small classes carry equal weight.
pub fn macro_summary(report: &MetricsReport) -> (f64, f64) {
    let mut iou = 0.0;
    let mut f1 = 0.0;
    for class in TofClass::WOODY {
        let m = &report.per_class[class.code() as usize];
        iou += m.iou;
        f1 += m.f1;
    }
    let n = TofClass::WOODY.len() as f64;
    (iou / n, f1 / n)
}

/// Row-normalized confusion matrix in percent. Ground-truth classes with no
/// pixels keep an all-zero row and are listed in `empty_rows` so callers can
/// warn about them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    /// Percentages per row; each non-empty row sums to 100 up to f64
    /// rounding.
    pub rows: [[f64; N]; N],
    pub empty_rows: Vec<usize>,
}

pub fn normalized_matrix(cm: &ConfusionMatrix) -> NormalizedMatrix {
    let mut rows = [[0.0f64; N]; N];
    let mut empty_rows = Vec::new();
    for (r, row) in rows.iter_mut().enumerate() {
        let sum = cm.row_sum(r);
        if sum == 0 {
            empty_rows.push(r);
            continue;
        }
        for (c, out) in row.iter_mut().enumerate() {
            *out = 100.0 * cm.counts[r][c] as f64 / sum as f64;
        }
    }
    NormalizedMatrix { rows, empty_rows }
}

impl NormalizedMatrix {
    /// Two-decimal CSV rendering with class-name header and row labels.
    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = (0..N as u8)
            .map(|c| TofClass::from_code(c).expect("codes 0-4 are valid").name())
            .collect();
        let mut out = String::from("gt\\pred");
        for name in &names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            out.push_str(names[r]);
            for v in row {
                out.push_str(&format!(",{v:.2}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_rasters_give_diagonal() {
        let mut cm = ConfusionMatrix::new();
        let codes = [0u8, 1, 2, 3, 4, 4, 3, 0];
        cm.accumulate_codes(&codes, &codes).unwrap();
        for r in 0..N {
            for c in 0..N {
                if r != c {
                    assert_eq!(cm.counts[r][c], 0);
                }
            }
        }
        assert_eq!(cm.counts[0][0], 2);
        assert_eq!(cm.counts[3][3], 2);
        assert_eq!(cm.counts[4][4], 2);
        assert_eq!(cm.total(), 8);
    }

    #[test]
    fn hand_counted_two_by_two() {
        let mut cm = ConfusionMatrix::new();
        cm.accumulate_codes(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert_eq!(cm.counts[0][0], 1);
        assert_eq!(cm.counts[0][1], 1);
        assert_eq!(cm.counts[1][1], 2);
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn accumulation_is_additive() {
        let gt_a = [0u8, 1, 2];
        let pr_a = [0u8, 2, 2];
        let gt_b = [3u8, 4];
        let pr_b = [3u8, 3];

        let mut split = ConfusionMatrix::new();
        split.accumulate_codes(&gt_a, &pr_a).unwrap();
        split.accumulate_codes(&gt_b, &pr_b).unwrap();

        let mut joined = ConfusionMatrix::new();
        let gt: Vec<u8> = gt_a.iter().chain(&gt_b).copied().collect();
        let pr: Vec<u8> = pr_a.iter().chain(&pr_b).copied().collect();
        joined.accumulate_codes(&gt, &pr).unwrap();
        assert_eq!(split, joined);

        // Reduction by addition matches too.
        let mut reduced = ConfusionMatrix::new();
        let mut part = ConfusionMatrix::new();
        part.accumulate_codes(&gt_a, &pr_a).unwrap();
        reduced.add(&part);
        let mut part = ConfusionMatrix::new();
        part.accumulate_codes(&gt_b, &pr_b).unwrap();
        reduced.add(&part);
        assert_eq!(reduced, joined);
    }

    #[test]
    fn invalid_code_rejected() {
        let mut cm = ConfusionMatrix::new();
        assert!(cm.accumulate_codes(&[5], &[0]).is_err());
        assert!(cm.accumulate_codes(&[0], &[9]).is_err());
        assert!(matches!(
            cm.accumulate_codes(&[0, 1], &[0]),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn hand_arithmetic_metrics() {
        // Class 1: TP=3, FP=1, FN=2.
        let mut counts = [[0u64; N]; N];
        counts[1][1] = 3;
        counts[0][1] = 1;
        counts[1][0] = 2;
        counts[0][0] = 10;
        let report = per_class_metrics(&ConfusionMatrix::from_counts(counts)).unwrap();
        let m = report.per_class[1];
        assert!((m.precision - 0.75).abs() < 1e-12);
        assert!((m.recall - 0.6).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.iou - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let mut counts = [[0u64; N]; N];
        for (c, row) in counts.iter_mut().enumerate() {
            row[c] = (c + 1) as u64;
        }
        let report = per_class_metrics(&ConfusionMatrix::from_counts(counts)).unwrap();
        for m in &report.per_class {
            assert_eq!(
                (m.precision, m.recall, m.f1, m.iou),
                (1.0, 1.0, 1.0, 1.0)
            );
        }
    }

    #[test]
    fn absent_class_scores_zero() {
        let mut counts = [[0u64; N]; N];
        counts[0][0] = 5; // only Background present
        let report = per_class_metrics(&ConfusionMatrix::from_counts(counts)).unwrap();
        let m = report.per_class[TofClass::Tree.code() as usize];
        assert_eq!((m.precision, m.recall, m.f1, m.iou), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(matches!(
            per_class_metrics(&ConfusionMatrix::new()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn macro_means_exclude_background() {
        let mut report = MetricsReport {
            per_class: [ClassMetrics::default(); N],
            pixels: 1,
        };
        // Background gets extreme values that must not leak into the means.
        report.per_class[0] = ClassMetrics {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            iou: 1.0,
        };
        let ious = [0.952, 0.606, 0.774, 0.626];
        let f1s = [0.975, 0.754, 0.872, 0.770];
        for (i, class) in TofClass::WOODY.iter().enumerate() {
            let m = &mut report.per_class[class.code() as usize];
            m.iou = ious[i];
            m.f1 = f1s[i];
        }
        let (miou, mf1) = macro_summary(&report);
        assert_eq!(format!("{miou:.3}"), "0.739");
        assert_eq!(format!("{mf1:.3}"), "0.843");
    }

    #[test]
    fn normalized_rows_are_percentages() {
        let mut counts = [[0u64; N]; N];
        counts[2] = [561, 811, 7319, 916, 393];
        counts[0] = [1, 1, 2, 0, 0];
        counts[1][1] = 7;
        let norm = normalized_matrix(&ConfusionMatrix::from_counts(counts));
        assert_eq!(norm.rows[2], [5.61, 8.11, 73.19, 9.16, 3.93]);
        assert_eq!(norm.rows[0], [25.0, 25.0, 50.0, 0.0, 0.0]);
        assert_eq!(norm.rows[1][1], 100.0);
        assert_eq!(norm.empty_rows, vec![3, 4]);
        assert_eq!(norm.rows[3], [0.0; N]);
    }

    #[test]
    fn csv_rendering_uses_two_decimals() {
        let mut counts = [[0u64; N]; N];
        counts[2] = [561, 811, 7319, 916, 393];
        let norm = normalized_matrix(&ConfusionMatrix::from_counts(counts));
        let csv = norm.to_csv();
        let patch_line = csv
            .lines()
            .find(|l| l.starts_with("Patch"))
            .expect("patch row present");
        assert_eq!(patch_line, "Patch,5.61,8.11,73.19,9.16,3.93");
        assert!(csv.starts_with("gt\\pred,Background,Forest,Patch,Linear,Tree"));
    }

    proptest! {
        // F1 and IoU are tied by F1 = 2*IoU/(1+IoU); holds exactly (to f64
        // noise) for every class with any support.
        #[test]
        fn f1_iou_identity(counts in proptest::collection::vec(0u64..500, N * N)) {
            let mut cm = ConfusionMatrix::new();
            for r in 0..N {
                for c in 0..N {
                    cm.counts[r][c] = counts[r * N + c];
                }
            }
            prop_assume!(cm.total() > 0);
            let report = per_class_metrics(&cm).unwrap();
            for m in &report.per_class {
                if m.iou > 0.0 {
                    prop_assert!((m.f1 - 2.0 * m.iou / (1.0 + m.iou)).abs() < 1e-12);
                    prop_assert!(m.iou <= m.f1 + 1e-15);
                }
            }
        }

        // Metrics derived from the matrix agree with a direct per-pixel
        // counting oracle on random labelings.
        #[test]
        fn matches_counting_oracle(
            gt in proptest::collection::vec(0u8..5, 200),
            pred in proptest::collection::vec(0u8..5, 200),
        ) {
            let mut cm = ConfusionMatrix::new();
            cm.accumulate_codes(&gt, &pred).unwrap();
            let report = per_class_metrics(&cm).unwrap();
            for class in 0..N as u8 {
                let tp = gt.iter().zip(&pred).filter(|(&g, &p)| g == class && p == class).count() as f64;
                let fp = gt.iter().zip(&pred).filter(|(&g, &p)| g != class && p == class).count() as f64;
                let fn_ = gt.iter().zip(&pred).filter(|(&g, &p)| g == class && p != class).count() as f64;
                let m = report.per_class[class as usize];
                let expect = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
                prop_assert_eq!(m.precision, expect(tp, tp + fp));
                prop_assert_eq!(m.recall, expect(tp, tp + fn_));
                prop_assert_eq!(m.iou, expect(tp, tp + fp + fn_));
            }
        }

        // Non-empty normalized rows sum to 100 within f64 rounding.
        #[test]
        fn normalized_rows_sum_to_100(counts in proptest::collection::vec(0u64..1000, N * N)) {
            let mut cm = ConfusionMatrix::new();
            for r in 0..N {
                for c in 0..N {
                    cm.counts[r][c] = counts[r * N + c];
                }
            }
            let norm = normalized_matrix(&cm);
            for r in 0..N {
                if cm.row_sum(r) > 0 {
                    let sum: f64 = norm.rows[r].iter().sum();
                    prop_assert!((sum - 100.0).abs() < 1e-9);
                } else {
                    prop_assert!(norm.empty_rows.contains(&r));
                }
            }
        }
    }
}
