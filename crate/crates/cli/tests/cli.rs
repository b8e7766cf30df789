//! End-to-end tests of the compiled binary: every subcommand, the JSON
//! error contract, config precedence, and output determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tofmap() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tofmap"));
    cmd.env_remove("TOFMAP_THREADS");
    cmd
}

fn run_ok(cmd: &mut Command) -> Value {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON object")
}

fn run_err(cmd: &mut Command) -> (Option<i32>, Value) {
    let out: Output = cmd.output().expect("binary runs");
    assert!(!out.status.success(), "expected failure, command succeeded");
    let stderr = String::from_utf8_lossy(&out.stderr);
    let body: Value = serde_json::from_str(stderr.trim())
        .unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {stderr}"));
    (out.status.code(), body)
}

fn demo_fixture(dir: &Path, seed: u64) -> PathBuf {
    let fx = dir.join(format!("fx_{seed}"));
    run_ok(
        tofmap()
            .args(["fixture", "--demo", "--seed"])
            .arg(seed.to_string())
            .arg("--out-dir")
            .arg(&fx),
    );
    fx
}

#[test]
fn help_and_version_exit_zero() {
    assert!(tofmap().arg("--help").output().unwrap().status.success());
    assert!(tofmap().arg("--version").output().unwrap().status.success());
}

#[test]
fn usage_error_is_machine_readable() {
    let (code, body) = run_err(tofmap().arg("build-mask")); // missing required flags
    assert_eq!(code, Some(2));
    assert_eq!(body["error"]["kind"], "usage");
}

#[test]
fn fixture_run_eval_closes_perfectly() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 7);
    for file in ["ndsm.tif", "dop.tif", "labels.tif", "scene.json", "fixture.json"] {
        assert!(fx.join(file).exists(), "missing {file}");
    }

    let out = tmp.path().join("out");
    let summary = run_ok(
        tofmap()
            .arg("run")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out-dir")
            .arg(&out),
    );
    assert_eq!(summary["features"], 4);
    for class in ["Forest", "Patch", "Linear", "Tree"] {
        assert_eq!(summary["class_counts"][class], 1, "{class}");
    }
    assert!(out.join("features.geojson").exists());
    assert!(out.join("config.toml").exists());

    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["class_counts"], serde_json::json!([0, 1, 1, 1, 1]));

    let eval_dir = tmp.path().join("eval");
    let eval = run_ok(
        tofmap()
            .arg("eval")
            .arg("--gt")
            .arg(fx.join("labels.tif"))
            .arg("--pred")
            .arg(out.join("labels.tif"))
            .arg("--out-dir")
            .arg(&eval_dir),
    );
    assert_eq!(eval["macro_iou"], 1.0);
    assert_eq!(eval["macro_f1"], 1.0);
    assert_eq!(eval["pixels"], 1_000_000);
    let metrics = fs::read_to_string(eval_dir.join("metrics.csv")).unwrap();
    assert!(metrics.ends_with("macro_woody,,,1.000000,1.000000\n"));
    let norm = fs::read_to_string(eval_dir.join("normalized_matrix.csv")).unwrap();
    assert!(norm.starts_with("gt\\pred,Background,Forest,Patch,Linear,Tree"));
}

#[test]
fn identical_inputs_give_bit_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let fx_a = demo_fixture(tmp.path(), 11);
    let fx_b = demo_fixture(tmp.path(), 11);
    assert_eq!(
        fs::read(fx_a.join("ndsm.tif")).unwrap(),
        fs::read(fx_b.join("ndsm.tif")).unwrap(),
        "same scene and seed must render identical rasters"
    );

    let mut outputs = Vec::new();
    for name in ["run_a", "run_b"] {
        let out = tmp.path().join(name);
        run_ok(
            tofmap()
                .arg("run")
                .arg("--ndsm")
                .arg(fx_a.join("ndsm.tif"))
                .arg("--dop")
                .arg(fx_a.join("dop.tif"))
                .arg("--out-dir")
                .arg(&out),
        );
        outputs.push(out);
    }
    // config.toml legitimately differs (it records each run's out_dir);
    // the data artifacts must not.
    for file in ["labels.tif", "features.geojson"] {
        assert_eq!(
            fs::read(outputs[0].join(file)).unwrap(),
            fs::read(outputs[1].join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn stagewise_commands_match_the_single_run() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 3);
    let out = tmp.path().join("out");
    run_ok(
        tofmap()
            .arg("run")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out-dir")
            .arg(&out),
    );

    let mask = tmp.path().join("mask.tif");
    run_ok(
        tofmap()
            .arg("build-mask")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out")
            .arg(&mask),
    );
    let polys = tmp.path().join("polys.geojson");
    let summary = run_ok(
        tofmap()
            .arg("vectorize")
            .arg("--mask")
            .arg(&mask)
            .arg("--out")
            .arg(&polys),
    );
    assert_eq!(summary["features"], 4);

    let tof = tmp.path().join("tof.geojson");
    run_ok(
        tofmap()
            .arg("classify")
            .arg("--in")
            .arg(&polys)
            .arg("--out")
            .arg(&tof),
    );
    // Default rules twice are a fixed point, so the stagewise GeoJSON must
    // equal the single-run artifact byte for byte.
    assert_eq!(
        fs::read(&tof).unwrap(),
        fs::read(out.join("features.geojson")).unwrap()
    );
}

#[test]
fn config_file_applies_and_cli_overrides_it() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 5);
    let cfg = tmp.path().join("cfg.toml");
    fs::write(&cfg, "[mask]\nheight_threshold = 99.0\n").unwrap();

    // File beats defaults: a 99 m floor leaves nothing to map.
    let out_file = tmp.path().join("out_file");
    let summary = run_ok(
        tofmap()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out-dir")
            .arg(&out_file),
    );
    assert_eq!(summary["features"], 0);

    // Command line beats file: restoring the default finds all four shapes.
    let out_cli = tmp.path().join("out_cli");
    let summary = run_ok(
        tofmap()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out-dir")
            .arg(&out_cli)
            .args(["--height-threshold", "3.0"]),
    );
    assert_eq!(summary["features"], 4);

    // The emitted effective config records the override.
    let effective = fs::read_to_string(out_cli.join("config.toml")).unwrap();
    assert!(effective.contains("height_threshold = 3.0"));
}

#[test]
fn config_typos_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.toml");
    fs::write(&cfg, "[mask]\nheigth_threshold = 4.0\n").unwrap();
    let (_, body) = run_err(
        tofmap()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .args(["--ndsm", "x", "--dop", "y", "--out-dir", "z"]),
    );
    assert_eq!(body["error"]["kind"], "validation");
    assert!(body["error"]["message"]
        .as_str()
        .unwrap()
        .contains("heigth_threshold"));
}

#[test]
fn missing_input_fails_before_compute_with_config_kind() {
    let tmp = TempDir::new().unwrap();
    let (code, body) = run_err(
        tofmap()
            .current_dir(tmp.path())
            .arg("run")
            .args(["--ndsm", "missing.tif", "--dop", "also_missing.tif"])
            .args(["--out-dir", "never_created"]),
    );
    assert_eq!(code, Some(1));
    assert_eq!(body["error"]["kind"], "config");
    assert!(!tmp.path().join("never_created").exists());
}

#[test]
fn misaligned_inputs_report_the_failing_stage() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 2);
    // A second fixture with a different extent cannot co-register.
    let small_dir = tmp.path().join("small");
    let scene = serde_json::json!({
        "width": 100, "height": 100,
        "shapes": [{"kind": "rect", "min_x": 2.0, "min_y": 2.0,
                     "size_x": 10.0, "size_y": 10.0,
                     "height_m": 8.0, "ndvi": 0.7}]
    });
    let scene_path = tmp.path().join("small.json");
    fs::write(&scene_path, scene.to_string()).unwrap();
    run_ok(
        tofmap()
            .arg("fixture")
            .arg("--scene")
            .arg(&scene_path)
            .arg("--out-dir")
            .arg(&small_dir),
    );

    let (_, body) = run_err(
        tofmap()
            .arg("run")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(small_dir.join("dop.tif"))
            .args(["--out-dir"])
            .arg(tmp.path().join("never")),
    );
    assert_eq!(body["error"]["kind"], "alignment");
    assert_eq!(body["error"]["stage"], "mask");
}

#[test]
fn wrong_mask_input_is_a_data_error() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 4);
    let (_, body) = run_err(
        tofmap()
            .arg("vectorize")
            .arg("--mask")
            .arg(fx.join("dop.tif")) // 4-band imagery, not a mask
            .arg("--out")
            .arg(tmp.path().join("p.geojson")),
    );
    assert_eq!(body["error"]["kind"], "data");
}

#[test]
fn linear_first_flag_reorders_the_cascade() {
    let tmp = TempDir::new().unwrap();
    // 100 m x 4 m strip: 400 m² (< 500), elongation 25 (> 3). Default rules
    // say Tree (area rule first); --linear-first says Linear.
    let scene = serde_json::json!({
        "width": 600, "height": 600,
        "shapes": [{"kind": "rect", "min_x": 10.0, "min_y": 10.0,
                     "size_x": 100.0, "size_y": 4.0,
                     "height_m": 8.0, "ndvi": 0.7},
                    {"kind": "rect", "min_x": 10.0, "min_y": 40.0,
                     "size_x": 30.0, "size_y": 30.0,
                     "height_m": 8.0, "ndvi": 0.0}]
    });
    let scene_path = tmp.path().join("strip.json");
    fs::write(&scene_path, scene.to_string()).unwrap();
    let fx = tmp.path().join("fx");
    run_ok(
        tofmap()
            .arg("fixture")
            .arg("--scene")
            .arg(&scene_path)
            .arg("--out-dir")
            .arg(&fx),
    );
    let mask = tmp.path().join("mask.tif");
    run_ok(
        tofmap()
            .arg("build-mask")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out")
            .arg(&mask),
    );
    let polys = tmp.path().join("polys.geojson");
    let default_run = run_ok(
        tofmap()
            .arg("vectorize")
            .arg("--mask")
            .arg(&mask)
            .arg("--out")
            .arg(&polys),
    );
    assert_eq!(default_run["class_counts"]["Tree"], 1);
    assert_eq!(default_run["class_counts"]["Linear"], 0);

    let reclassified = run_ok(
        tofmap()
            .arg("classify")
            .arg("--in")
            .arg(&polys)
            .arg("--out")
            .arg(tmp.path().join("tof.geojson"))
            .arg("--linear-first"),
    );
    assert_eq!(reclassified["class_counts"]["Linear"], 1);
    assert_eq!(reclassified["class_counts"]["Tree"], 0);
}

#[test]
fn split_is_deterministic_and_leave_one_area_out_lists_all_areas() {
    let tmp = TempDir::new().unwrap();
    let manifest = tmp.path().join("tiles.csv");
    let mut csv = String::from("tile_id,study_area,width,height,forest,patch,linear,tree\n");
    for area in ["BB", "NRW", "SH"] {
        for i in 0..20 {
            csv.push_str(&format!(
                "{area}_{i:03},{area},5000,5000,0.2,0.01,0.03,0.01\n"
            ));
        }
    }
    fs::write(&manifest, csv).unwrap();

    let plan_a = tmp.path().join("a.json");
    let plan_b = tmp.path().join("b.json");
    for plan in [&plan_a, &plan_b] {
        let summary = run_ok(
            tofmap()
                .arg("split")
                .arg("--manifest")
                .arg(&manifest)
                .arg("--out")
                .arg(plan)
                .args(["--seed", "9"]),
        );
        assert_eq!(summary["val"], 15);
        assert_eq!(summary["test"], 15);
        assert_eq!(summary["train"], 30);
    }
    assert_eq!(fs::read(&plan_a).unwrap(), fs::read(&plan_b).unwrap());

    let combos_path = tmp.path().join("combos.json");
    run_ok(
        tofmap()
            .arg("split")
            .arg("--manifest")
            .arg(&manifest)
            .arg("--out")
            .arg(&combos_path)
            .arg("--leave-one-area-out"),
    );
    let combos: Value =
        serde_json::from_str(&fs::read_to_string(&combos_path).unwrap()).unwrap();
    assert_eq!(combos.as_array().unwrap().len(), 3);
    assert_eq!(combos[0]["test"], "BB");
    assert_eq!(combos[2]["train_val"], serde_json::json!(["BB", "NRW"]));
}

#[test]
fn extract_patches_then_merge_reconstructs_a_tile() {
    use tofmap_core::io::patchdir::write_softmax_patch;
    use tofmap_core::merge::SoftmaxPatch;

    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 6);
    let patch_dir = tmp.path().join("patches");
    let summary = run_ok(
        tofmap()
            .arg("extract-patches")
            .arg("--image")
            .arg(fx.join("dop.tif"))
            .arg("--labels")
            .arg(fx.join("labels.tif"))
            .args(["--tile-id", "DEMO_001"])
            .arg("--out-dir")
            .arg(&patch_dir)
            .args(["--window", "512", "--stride", "512"]),
    );
    // 1000 px / 512 stride -> origins {0, 488}: 4 windows x 3 variants.
    assert_eq!(summary["patches"], 12);
    assert!(patch_dir.join("DEMO_001_0_0_orig.tif").exists());
    assert!(patch_dir.join("DEMO_001_488_488_vflip_labels.tif").exists());

    // Synthetic prediction windows: class 2 everywhere except class 4 in
    // the window starting at column 8.
    let pred_dir = tmp.path().join("preds");
    fs::create_dir(&pred_dir).unwrap();
    let window = 8usize;
    for (i, (row, col, class)) in [(0, 0, 2u8), (0, 8, 4u8), (8, 0, 2u8), (8, 8, 2u8)]
        .into_iter()
        .enumerate()
    {
        let mut probs = vec![0.0f32; window * window * 5];
        for px in probs.chunks_exact_mut(5) {
            px[class as usize] = 0.7;
            px[0] = 0.3;
        }
        let patch = SoftmaxPatch::new(row, col, window, probs).unwrap();
        write_softmax_patch(&pred_dir, &format!("w{i}"), &patch).unwrap();
    }

    let labels_out = tmp.path().join("merged.tif");
    let probs_out = tmp.path().join("probs.tif");
    let summary = run_ok(
        tofmap()
            .arg("merge")
            .arg("--in-dir")
            .arg(&pred_dir)
            .arg("--out-labels")
            .arg(&labels_out)
            .arg("--out-probs")
            .arg(&probs_out),
    );
    assert_eq!(summary["windows"], 4);
    assert_eq!(summary["width"], 16);
    assert_eq!(summary["height"], 16);

    let merged = tofmap_core::io::geotiff::read_geotiff(&labels_out).unwrap();
    let labels = merged.band_u8(0).unwrap();
    assert_eq!(labels[0], 2);
    assert_eq!(labels[15], 4); // row 0, col 15 sits in the class-4 window
    assert_eq!(labels[16 * 15 + 15], 2);
    let probs = tofmap_core::io::geotiff::read_geotiff(&probs_out).unwrap();
    assert_eq!(probs.bands.len(), 5);
    assert!((probs.value(2, 0, 0) - 0.7).abs() < 1e-6);
}

#[test]
fn eval_accumulates_over_multiple_tile_pairs() {
    let tmp = TempDir::new().unwrap();
    let fx_a = demo_fixture(tmp.path(), 8);
    let fx_b = demo_fixture(tmp.path(), 9);
    let eval_dir = tmp.path().join("eval");
    let summary = run_ok(
        tofmap()
            .args(["--threads", "2"])
            .arg("eval")
            .arg("--gt")
            .arg(fx_a.join("labels.tif"))
            .arg(fx_b.join("labels.tif"))
            .arg("--pred")
            .arg(fx_a.join("labels.tif"))
            .arg(fx_b.join("labels.tif"))
            .arg("--out-dir")
            .arg(&eval_dir),
    );
    assert_eq!(summary["tiles"], 2);
    assert_eq!(summary["pixels"], 2_000_000);
    assert_eq!(summary["macro_iou"], 1.0);

    let (_, body) = run_err(
        tofmap()
            .arg("eval")
            .arg("--gt")
            .arg(fx_a.join("labels.tif"))
            .arg("--pred")
            .arg(fx_a.join("labels.tif"))
            .arg(fx_b.join("labels.tif"))
            .arg("--out-dir")
            .arg(tmp.path().join("never")),
    );
    assert_eq!(body["error"]["kind"], "config");
}

#[test]
fn thread_cap_env_var_is_honored_and_validated() {
    let tmp = TempDir::new().unwrap();
    let fx = demo_fixture(tmp.path(), 12);
    run_ok(
        tofmap()
            .env("TOFMAP_THREADS", "1")
            .arg("run")
            .arg("--ndsm")
            .arg(fx.join("ndsm.tif"))
            .arg("--dop")
            .arg(fx.join("dop.tif"))
            .arg("--out-dir")
            .arg(tmp.path().join("out")),
    );

    let (_, body) = run_err(tofmap().env("TOFMAP_THREADS", "many").arg("split").args([
        "--manifest",
        "x.csv",
        "--out",
        "y.json",
    ]));
    assert_eq!(body["error"]["kind"], "config");
    assert!(body["error"]["message"]
        .as_str()
        .unwrap()
        .contains("TOFMAP_THREADS"));
}
