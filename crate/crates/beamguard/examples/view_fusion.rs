//! Multi-view integration: collision-decision accuracy for every camera
//! subset on a scenario with single-view occlusions and uneven noise.
//! Views that see two objects overlap while they are far apart in 3D
//! mislabel those pairs alone; fused across views, another camera vetoes.
//!
//!     cargo run --release --example view_fusion

use beamguard::config::ScenarioConfig;
use beamguard::metrics::{all_view_subsets, AccuracyAccumulator};
use beamguard::monitor::fuse_replicas;
use beamguard::runner::run_scenario;
use std::path::Path;

fn main() -> beamguard::Result<()> {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/fusion_trend.toml");
    let resolved = ScenarioConfig::load(&scenario_path)?.resolve()?;
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
    })?;
    let report = acc.finish();
    println!("{}", report.to_table());

    let fused = report.subsets.last().unwrap().accuracy.unwrap();
    let best_single = report
        .subsets
        .iter()
        .filter(|s| s.cameras.len() == 1)
        .filter_map(|s| s.accuracy)
        .fold(0.0f64, f64::max);
    println!(
        "all-view fusion {:.2}% vs best single view {:.2}%",
        fused * 100.0,
        best_single * 100.0
    );

    // replica voting on top of view fusion: unanimity passes through,
    // disagreement fails safe toward a warning
    println!("\nreplica fusion (fail-safe):");
    for decisions in [[false, false], [false, true], [true, true]] {
        println!("  {:?} -> {}", decisions, fuse_replicas(&decisions));
    }
    Ok(())
}
