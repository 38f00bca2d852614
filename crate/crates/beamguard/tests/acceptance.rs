//! Acceptance suite: one test per release criterion, each with its
//! tolerance pinned in the assertion and a `ACCEPTANCE <n> ... PASS` line.
//!
//! Run `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use beamguard::config::{ResolvedScenario, ScenarioConfig};
use beamguard::contour::extract_contour;
use beamguard::distance::{min_contour_distance_exact, min_contour_distance_sparse};
use beamguard::metrics::{all_view_subsets, AccuracyAccumulator, DistanceErrorAccumulator};
use beamguard::model::{CategoryId, CategoryPair, Mask};
use beamguard::pipeline::GateStatus;
use beamguard::runner::{run_scenario, MonitorEngine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn load_scenario(name: &str) -> (ScenarioConfig, ResolvedScenario) {
    let config = ScenarioConfig::load(&scenario_path(name)).expect("scenario parses");
    let resolved = config.resolve().expect("scenario resolves");
    (config, resolved)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beamguard"))
}

fn stdout_of(cmd: &mut Command) -> (String, i32) {
    let out = cmd.output().expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        out.status.code().expect("exit code"),
    )
}

fn pass(n: u32, name: &str, detail: String) {
    println!("ACCEPTANCE {n} ({name}): PASS - {detail}");
}

fn parse_field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("missing '{key}' in output:\n{stdout}"))
        .parse()
        .expect("numeric field")
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs()
}

#[test]
fn acceptance_01_reliability_arithmetic() {
    let (out, code) = stdout_of(binary().args(["reliability", "0.002", "2", "1", "10"]));
    assert_eq!(code, 0);
    let dual = parse_field(&out, "p_combined");
    assert!(rel_err(dual, 4.0e-6) <= 0.01, "dual-system error {dual}");

    let (out, code) = stdout_of(binary().args(["reliability", "0.002", "2", "2", "10"]));
    assert_eq!(code, 0);
    let both = parse_field(&out, "p_combined");
    let years = parse_field(&out, "mtbe_years");
    assert!(rel_err(both, 1.6e-11) <= 0.01, "combined error {both}");
    assert!(rel_err(years, 198.05) <= 0.01, "MTBE years {years}");

    pass(
        1,
        "reliability arithmetic",
        format!("p(r=2,k=1)={dual:.3e}, p(r=2,k=2)={both:.3e}, MTBE={years:.2} years"),
    );
}

#[test]
fn acceptance_02_threshold_calibration() {
    // a report whose worst cell is 3.9 / 2.8, surrounded by smaller cells
    let report = serde_json::json!({
        "cameras": [
            { "camera_name": "front", "cells": {
                "holder-detector": { "mae": 0.2, "std": 0.4, "frames": 100 },
                "detector-stage": { "mae": 3.9, "std": 2.8, "frames": 100 },
                "holder-stage": { "mae": 2.6, "std": 2.4, "frames": 100 }
            }},
            { "camera_name": "top", "cells": {
                "holder-detector": { "mae": 1.2, "std": 0.9, "frames": 100 },
                "detector-stage": null
            }}
        ]
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("distance_error.json");
    std::fs::write(&path, report.to_string()).unwrap();

    let (out, code) = stdout_of(binary().args(["calibrate", "--report", path.to_str().unwrap()]));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "10", "calibrated threshold");
    pass(2, "threshold calibration", "MAE 3.9 / STD 2.8 -> delta = 10 px".into());
}

#[test]
fn acceptance_03_sparse_distance_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let strides = [1usize, 2, 4, 8, 16];
    let blob = |rng: &mut ChaCha8Rng| {
        let mut m = Mask::empty(120, 120);
        for _ in 0..rng.gen_range(1..4) {
            let r = rng.gen_range(0..100u32);
            let c = rng.gen_range(0..100u32);
            let h = rng.gen_range(1..22u32);
            let w = rng.gen_range(1..22u32);
            m.fill_rect(r, (r + h).min(119), c, (c + w).min(119));
        }
        m
    };
    let pairs = 220;
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = extract_contour(&blob(&mut rng)).unwrap();
        let b = extract_contour(&blob(&mut rng)).unwrap();
        let exact = min_contour_distance_exact(&a, &b).unwrap();
        for &s in &strides {
            let sparse = min_contour_distance_sparse(&a, &b, s).unwrap();
            let err = sparse - exact;
            assert!(err >= 0.0, "sparse undershoots exact");
            assert!(
                err <= s as f64 * f64::sqrt(2.0) + 1e-9,
                "stride {s}: error {err} exceeds bound"
            );
            worst = worst.max(err / (s as f64 * f64::sqrt(2.0)));
        }
    }
    pass(
        3,
        "sparse-distance error bound",
        format!("{pairs} random pairs x strides {strides:?}; worst error/bound = {worst:.2}"),
    );
}

/// Collect MAE/STD cells of a scenario run, measured against the analytic
/// oracle.
fn distance_error_cells(resolved: &ResolvedScenario) -> Vec<(String, String, f64, f64)> {
    let cameras: Vec<_> = resolved
        .scenario
        .cameras
        .iter()
        .map(|c| c.camera.clone())
        .collect();
    let mut acc = DistanceErrorAccumulator::new(cameras, resolved.scenario.categories.clone());
    run_scenario(resolved, |decisions, frame| {
        for out in &decisions.per_camera {
            for (pair, measured) in &out.distances {
                let exact = frame
                    .truth
                    .view_distance_px
                    .get(&out.camera)
                    .and_then(|m| m.get(pair));
                if let (Some(m), Some(e)) = (measured, exact) {
                    acc.add_sample(out.camera, *pair, *m, *e);
                }
            }
        }
        Ok(())
    })
    .unwrap();
    acc.finish()
        .cameras
        .into_iter()
        .flat_map(|cam| {
            cam.cells
                .into_iter()
                .filter_map(move |(pair, cell)| {
                    cell.map(|c| (cam.camera_name.clone(), pair, c.mae, c.std))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn acceptance_04_distance_fidelity() {
    let (_, resolved) = load_scenario("noisefree_sweep.toml");
    assert_eq!(resolved.scenario.frame_count, 600);
    let cells = distance_error_cells(&resolved);
    assert!(!cells.is_empty());
    let mut worst = (String::new(), String::new(), 0.0f64, 0.0f64);
    for (cam, pair, mae, std) in &cells {
        assert!(
            *mae <= 2.0,
            "MAE {mae:.3} px exceeds 2.0 for {cam}/{pair}"
        );
        assert!(
            *std <= 2.0,
            "STD {std:.3} px exceeds 2.0 for {cam}/{pair}"
        );
        if *mae > worst.2 {
            worst = (cam.clone(), pair.clone(), *mae, *std);
        }
    }
    pass(
        4,
        "distance fidelity",
        format!(
            "{} defined (view, pair) cells; worst MAE {:.2} / STD {:.2} px ({} {})",
            cells.len(),
            worst.2,
            worst.3,
            worst.0,
            worst.1
        ),
    );
}

#[test]
fn acceptance_05_end_to_end_detection() {
    // k = 1: every ground-truth warning unit raw-flagged, almost no units
    // falsely flagged
    let (config, resolved) = load_scenario("approach_collide.toml");
    assert_eq!(resolved.monitor.delta_px, 10.0);
    assert_eq!(resolved.monitor.consecutive_k, 1);
    let mut warn_units = 0u64;
    let mut missed = 0u64;
    let mut nonwarn_units = 0u64;
    let mut false_positives = 0u64;
    run_scenario(&resolved, |decisions, frame| {
        for e in &decisions.events {
            match frame.truth.warning.get(&e.pair).copied().flatten() {
                Some(true) => {
                    warn_units += 1;
                    if !e.raw {
                        missed += 1;
                    }
                }
                Some(false) => {
                    nonwarn_units += 1;
                    if e.raw {
                        false_positives += 1;
                    }
                }
                None => {}
            }
        }
        Ok(())
    })
    .unwrap();
    assert!(warn_units > 100, "scenario must contain real warnings");
    assert_eq!(missed, 0, "recall must be 100% of {warn_units} warning units");
    let fp_rate = false_positives as f64 / nonwarn_units as f64;
    assert!(
        fp_rate <= 0.005,
        "false-positive rate {fp_rate:.4} exceeds 0.5%"
    );

    // k = 2: no confirmation may arise without two consecutive raw flags,
    // and none may land on a ground-truth-false unit
    let mut config_k2 = config;
    config_k2.monitor.consecutive_k = 2;
    let resolved_k2 = config_k2.resolve().unwrap();
    let mut last_raw: BTreeMap<CategoryPair, bool> = BTreeMap::new();
    let mut confirmed_units = 0u64;
    let mut false_confirms = 0u64;
    run_scenario(&resolved_k2, |decisions, frame| {
        for e in &decisions.events {
            let prev = last_raw.insert(e.pair, e.raw).unwrap_or(false);
            if e.confirmed {
                confirmed_units += 1;
                assert!(e.raw && prev, "confirmation without two consecutive raws");
                if frame.truth.warning.get(&e.pair).copied().flatten() == Some(false) {
                    false_confirms += 1;
                }
            }
        }
        Ok(())
    })
    .unwrap();
    assert!(confirmed_units > 100);
    assert_eq!(false_confirms, 0, "isolated-frame false confirmations");

    pass(
        5,
        "end-to-end detection",
        format!(
            "recall {warn_units}/{warn_units}, FP {false_positives}/{nonwarn_units} ({:.3}%); k=2: {confirmed_units} confirms, 0 false",
            fp_rate * 100.0
        ),
    );
}

#[test]
fn acceptance_06_multi_view_fusion_trend() {
    let (_, resolved) = load_scenario("fusion_trend.toml");
    let cameras: Vec<_> = resolved
        .scenario
        .cameras
        .iter()
        .map(|c| c.camera.clone())
        .collect();
    let mut acc = AccuracyAccumulator::new(
        all_view_subsets(&cameras),
        resolved.monitor.delta_px,
        resolved.monitor.absent_view_policy,
    );
    run_scenario(&resolved, |decisions, frame| {
        for e in &decisions.events {
            acc.add_unit(
                &e.min_distances_px,
                frame.truth.warning.get(&e.pair).copied().flatten(),
            );
        }
        Ok(())
    })
    .unwrap();
    let report = acc.finish();
    let fused = report
        .subsets
        .last()
        .unwrap()
        .accuracy
        .expect("fused subset decided");
    let singles: Vec<(String, f64)> = report
        .subsets
        .iter()
        .filter(|s| s.cameras.len() == 1)
        .map(|s| (s.label.clone(), s.accuracy.expect("single view decided")))
        .collect();
    assert_eq!(singles.len(), 3);
    for (label, acc_v) in &singles {
        assert!(
            fused >= *acc_v,
            "fusion {fused:.4} below single view {label} {acc_v:.4}"
        );
    }
    assert!(
        singles.iter().any(|(_, a)| fused > *a),
        "fusion must beat at least one single view strictly"
    );
    pass(
        6,
        "multi-view fusion trend",
        format!(
            "fused {:.2}% vs singles {}",
            fused * 100.0,
            singles
                .iter()
                .map(|(l, a)| format!("{l}={:.2}%", a * 100.0))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

#[test]
fn acceptance_07_smoothing_ablation_trend() {
    let mean_mae = |window: usize| -> f64 {
        let (mut config, _) = load_scenario("drift_jitter.toml");
        config.tracking.window = window;
        let resolved = config.resolve().unwrap();
        let cells = distance_error_cells(&resolved);
        cells.iter().map(|c| c.2).sum::<f64>() / cells.len() as f64
    };
    let smoothed = mean_mae(3);
    let raw = mean_mae(1);
    assert!(
        smoothed < raw,
        "smoothing must strictly lower MAE: w3={smoothed:.4} vs w1={raw:.4}"
    );
    pass(
        7,
        "smoothing ablation trend",
        format!("MAE w=3: {smoothed:.3} px < w=1: {raw:.3} px"),
    );
}

#[test]
fn acceptance_08_temporal_gate() {
    let config = ScenarioConfig::from_toml_str(
        r#"
name = "gate-accept"
fps = 10.0
duration_s = 5.0
seed = 0
categories = ["holder", "detector"]
[[cameras]]
name = "front"
view = "front"
width = 320
height = 240
scale = 8.0
origin_row = 120.0
origin_col = 160.0
[[objects]]
category = "holder"
half_extents = [3.0, 3.0, 3.0]
waypoints = [{ t = 0.0, center = [-8.0, 0.0, 0.0] }]
[[objects]]
category = "detector"
half_extents = [3.0, 3.0, 3.0]
waypoints = [{ t = 0.0, center = [8.0, 0.0, 0.0] }]
[gate]
change_iou_threshold = 0.5
max_streak = 5
"#,
    )
    .unwrap();
    let resolved = config.resolve().unwrap();
    let holder = CategoryId(0);
    let empty = Mask::empty(320, 240);

    // part one: dropout streaks of 3 and 4 frames (both under the cap)
    let drop_frames = |i: u64| (10..13).contains(&i) || (20..24).contains(&i);
    let mut engine = MonitorEngine::new(&resolved);
    let mut raw_missing = 0u64;
    let mut gated_missing = 0u64;
    for frame in resolved.scenario.simulate() {
        let mut bundle = frame.truth_masks[0].clone();
        if drop_frames(frame.frame_index) {
            bundle.masks.insert(holder, empty.clone());
        }
        if bundle.masks[&holder].is_empty() {
            raw_missing += 1;
        }
        let decisions = engine.process_frame(&[bundle]).unwrap();
        let out = &decisions.per_camera[0];
        let present = out.processed.mask(holder).is_some_and(|m| !m.is_empty());
        if !present {
            gated_missing += 1;
        }
        assert_ne!(out.statuses[&holder], GateStatus::Lost);
    }
    assert!(raw_missing >= 1, "raw stream must have missing frames");
    assert_eq!(gated_missing, 0, "gated stream must have none");

    // part two: a streak of 6 produces exactly one lost status
    let mut engine = MonitorEngine::new(&resolved);
    let mut lost = 0u64;
    for frame in resolved.scenario.simulate() {
        let mut bundle = frame.truth_masks[0].clone();
        if (10..16).contains(&frame.frame_index) {
            bundle.masks.insert(holder, empty.clone());
        }
        let decisions = engine.process_frame(&[bundle]).unwrap();
        if decisions.per_camera[0].statuses[&holder] == GateStatus::Lost {
            lost += 1;
        }
    }
    assert_eq!(lost, 1, "a 6-frame streak past cap 5 is lost exactly once");

    pass(
        8,
        "temporal gate",
        format!("streaks 3+4 bridged ({raw_missing} raw gaps, 0 gated); streak 6 -> 1 lost"),
    );
}

#[test]
fn acceptance_09_throughput() {
    let (_, resolved) = load_scenario("bench_fullres.toml");
    let cam = &resolved.scenario.cameras[0].camera;
    assert_eq!((cam.width, cam.height), (2064, 1544));
    assert_eq!(resolved.scenario.cameras.len(), 3);
    assert_eq!(resolved.scenario.categories.len(), 4);
    let report = beamguard::bench::run_bench(&resolved, Some(50)).unwrap();
    assert!(
        report.pipeline_fps >= 10.0,
        "pipeline {:.1} FPS below the 10 FPS real-time target",
        report.pipeline_fps
    );
    pass(
        9,
        "throughput",
        format!(
            "{:.1} FPS at 2064x1544 x 3 views (mean {:.1} ms, p95 {:.1} ms)",
            report.pipeline_fps, report.pipeline_mean_ms, report.pipeline_p95_ms
        ),
    );
}

fn dir_snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn acceptance_10_determinism() {
    let scenario = scenario_path("smoke.toml");
    let scenario = scenario.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(label);
        let out = out.to_str().unwrap();
        let (_, code) =
            stdout_of(binary().args(["simulate", "--config", scenario, "--out", out]));
        assert_eq!(code, 0);
        let (_, code) = stdout_of(binary().args([
            "monitor", "--stream", out, "--out", out, "--threads", threads,
        ]));
        assert_eq!(code, 3, "smoke scenario ends in a confirmed warning");
        snapshots.push(dir_snapshot(&dir.path().join(label)));
    }
    assert_eq!(snapshots[0].len(), snapshots[1].len());
    for (path, bytes) in &snapshots[0] {
        assert_eq!(
            Some(bytes),
            snapshots[1].get(path),
            "artifact {path} differs between runs"
        );
    }
    pass(
        10,
        "determinism",
        format!(
            "{} artifacts byte-identical across runs and thread counts",
            snapshots[0].len()
        ),
    );
}
