use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::anyhow;
use rayon::prelude::*;
use serde_json::json;
use tofmap_core::classify::TofClass;
use tofmap_core::eval::{macro_summary, normalized_matrix, per_class_metrics, ConfusionMatrix};
use tofmap_core::io::geotiff::read_geotiff;
use tofmap_core::io::manifest::write_json;

use crate::commands::{create_out_dir, print_json};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ground-truth label GeoTIFFs; repeat for multiple tiles
    #[arg(long = "gt", required = true, num_args = 1..)]
    gt: Vec<PathBuf>,
    /// Predicted label GeoTIFFs, same order and count as --gt
    #[arg(long = "pred", required = true, num_args = 1..)]
    pred: Vec<PathBuf>,
    /// Directory receiving metrics.csv/.json and the matrix CSVs
    #[arg(long)]
    out_dir: PathBuf,
}

fn class_names() -> Vec<&'static str> {
    (0..TofClass::COUNT as u8)
        .map(|c| TofClass::from_code(c).expect("codes 0-4 are valid").name())
        .collect()
}

fn counts_csv(cm: &ConfusionMatrix) -> String {
    let names = class_names();
    let mut out = String::from("gt\\pred");
    for name in &names {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for (r, row) in cm.counts.iter().enumerate() {
        out.push_str(names[r]);
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    if args.gt.len() != args.pred.len() {
        return Err(anyhow!(
            "--gt and --pred must pair up: got {} ground-truth and {} prediction rasters",
            args.gt.len(),
            args.pred.len()
        ));
    }

    // One confusion matrix per tile pair, accumulated in parallel, then
    // summed: counts are additive across tiles.
    let partials: Vec<ConfusionMatrix> = args
        .gt
        .par_iter()
        .zip(args.pred.par_iter())
        .map(|(gt_path, pred_path)| -> tofmap_core::Result<ConfusionMatrix> {
            let gt = read_geotiff(gt_path)?;
            let pred = read_geotiff(pred_path)?;
            let mut cm = ConfusionMatrix::new();
            cm.accumulate(&gt, &pred)?;
            Ok(cm)
        })
        .collect::<tofmap_core::Result<_>>()?;
    let mut counts = [[0u64; TofClass::COUNT]; TofClass::COUNT];
    for part in &partials {
        for (acc_row, row) in counts.iter_mut().zip(&part.counts) {
            for (acc, v) in acc_row.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    let cm = ConfusionMatrix::from_counts(counts);

    let report = per_class_metrics(&cm)?;
    let (macro_iou, macro_f1) = macro_summary(&report);
    let normalized = normalized_matrix(&cm);

    create_out_dir(&args.out_dir)?;
    let names = class_names();
    let mut metrics_csv = String::from("class,precision,recall,f1,iou\n");
    for (c, name) in names.iter().enumerate() {
        let m = &report.per_class[c];
        writeln!(
            metrics_csv,
            "{name},{:.6},{:.6},{:.6},{:.6}",
            m.precision, m.recall, m.f1, m.iou
        )
        .unwrap();
    }
    writeln!(metrics_csv, "macro_woody,,,{macro_f1:.6},{macro_iou:.6}").unwrap();
    fs::write(args.out_dir.join("metrics.csv"), metrics_csv)?;
    fs::write(args.out_dir.join("confusion_matrix.csv"), counts_csv(&cm))?;
    fs::write(
        args.out_dir.join("normalized_matrix.csv"),
        normalized.to_csv(),
    )?;
    write_json(
        &args.out_dir.join("metrics.json"),
        &json!({
            "pixels": report.pixels,
            "tiles": args.gt.len(),
            "per_class": names
                .iter()
                .enumerate()
                .map(|(c, name)| (name.to_string(), json!(report.per_class[c])))
                .collect::<serde_json::Map<String, serde_json::Value>>(),
            "macro_woody": { "iou": macro_iou, "f1": macro_f1 },
            "confusion_matrix": cm.counts,
            "normalized_rows": normalized.rows,
        }),
    )?;

    print_json(&json!({
        "out_dir": args.out_dir,
        "tiles": args.gt.len(),
        "pixels": report.pixels,
        "macro_iou": macro_iou,
        "macro_f1": macro_f1,
    }))
}
