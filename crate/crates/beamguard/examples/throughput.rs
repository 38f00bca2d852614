//! Pipeline throughput at full camera resolution (2064x1544, three views,
//! four categories). Rendering is excluded from the pipeline timing — in a
//! deployment the masks arrive from a segmenter.
//!
//!     cargo run --release --example throughput

use beamguard::bench::run_bench;
use beamguard::config::ScenarioConfig;
use std::path::Path;

fn main() -> beamguard::Result<()> {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/bench_fullres.toml");
    let resolved = ScenarioConfig::load(&scenario_path)?.resolve()?;
    let report = run_bench(&resolved, Some(60))?;
    print!("{}", report.to_text());
    println!(
        "\nreal-time target is 10 FPS; headroom {:.1}x",
        report.pipeline_fps / 10.0
    );
    Ok(())
}
