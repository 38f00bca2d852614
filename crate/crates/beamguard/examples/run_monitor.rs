//! End-to-end collision monitoring of the approach-and-collide scenario:
//! gate, track, measure, and fuse every frame, printing the first confirmed
//! warning and a closing summary.
//!
//!     cargo run --release --example run_monitor

use beamguard::config::ScenarioConfig;
use beamguard::runner::run_scenario;
use std::path::Path;

fn main() -> beamguard::Result<()> {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/approach_collide.toml");
    let resolved = ScenarioConfig::load(&scenario_path)?.resolve()?;
    let names: Vec<&str> = resolved
        .scenario
        .categories
        .iter()
        .map(|c| c.name.as_str())
        .collect();

    let mut first_confirm_logged = false;
    let summary = run_scenario(&resolved, |decisions, frame| {
        for e in &decisions.events {
            if e.confirmed && !first_confirm_logged {
                first_confirm_logged = true;
                let d: Vec<String> = e
                    .min_distances_px
                    .iter()
                    .map(|(cam, d)| {
                        let cam = &resolved.scenario.cameras[cam.0].camera.name;
                        match d {
                            Some(d) => format!("{cam}={d:.1}px"),
                            None => format!("{cam}=n/a"),
                        }
                    })
                    .collect();
                println!(
                    "frame {:>3} t={:>5.1}s  CONFIRMED {}-{}  [{}]",
                    e.frame_index,
                    frame.frame_index as f64 / resolved.scenario.fps,
                    names[e.pair.0 .0 as usize],
                    names[e.pair.1 .0 as usize],
                    d.join(", ")
                );
            }
        }
        Ok(())
    })?;

    println!(
        "monitored {} frames: {} raw warnings, {} confirmed",
        summary.frames, summary.raw_warnings, summary.confirmed_warnings
    );
    println!(
        "process exit code contract: {}",
        if summary.any_confirmed() {
            "3 (confirmed warning)"
        } else {
            "0 (no warning)"
        }
    );
    Ok(())
}
