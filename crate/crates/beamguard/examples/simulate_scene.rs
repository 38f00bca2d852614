//! Render a scenario into a mask stream with analytic ground truth, then
//! read a frame back to show the artifact layout.
//!
//!     cargo run --release --example simulate_scene

use beamguard::config::ScenarioConfig;
use beamguard::model::CategoryId;
use beamguard::storage::{Manifest, RunDir};
use std::path::Path;

fn main() -> beamguard::Result<()> {
    let scenario_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/smoke.toml");
    let config = ScenarioConfig::load(&scenario_path)?;
    let resolved = config.resolve()?;

    let out = std::env::temp_dir().join("beamguard_example_sim");
    let _ = std::fs::remove_dir_all(&out);
    let run = RunDir::new(&out);
    let manifest = Manifest::for_config(&config);
    run.write_manifest(&manifest)?;

    for frame in resolved.scenario.simulate() {
        run.write_frame(&manifest, &frame.observed, frame.frame_index)?;
    }
    println!(
        "wrote {} frames x {} cameras under {}",
        manifest.frame_count,
        manifest.cameras.len(),
        out.display()
    );
    println!("  manifest: {}", run.manifest_path().display());
    println!(
        "  sample mask: {}",
        run.mask_path("front", 0, "holder").display()
    );

    // round-trip one frame and inspect it
    let bundles = run.read_frame(&manifest, 0)?;
    for bundle in &bundles {
        let cam = &manifest.cameras[bundle.camera.0];
        for (cat, mask) in &bundle.masks {
            println!(
                "  frame 0, {cam}: {} has {} foreground px",
                manifest.categories[cat.0 as usize],
                mask.count()
            );
        }
    }

    // ground truth for the same frame, straight from the simulator
    let frame0 = resolved.scenario.render_frame(0);
    let pair = beamguard::model::CategoryPair::new(CategoryId(0), CategoryId(1));
    for cam in &resolved.scenario.cameras {
        if let Some(d) = frame0.truth.view_distance_px[&cam.camera.id].get(&pair) {
            println!(
                "  exact holder-detector distance in {}: {d:.1} px",
                cam.camera.name
            );
        }
    }
    Ok(())
}
