//! Throughput measurement of the monitoring pipeline.
//!
//! Frames are rendered just-in-time and only the pipeline portion
//! (gate → track → measure → fuse) is timed; rendering cost is reported
//! separately since a deployment receives masks from a segmenter, not from
//! this simulator.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ResolvedScenario;
use crate::error::Result;
use crate::runner::MonitorEngine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub width: u32,
    pub height: u32,
    pub cameras: usize,
    pub categories: usize,
    pub frames: u64,
    /// End-to-end pipeline throughput, frames per second.
    pub pipeline_fps: f64,
    pub pipeline_mean_ms: f64,
    pub pipeline_p95_ms: f64,
    /// Simulator rendering, measured separately.
    pub render_mean_ms: f64,
    /// Per-stage totals summed over views and frames, in milliseconds.
    pub stage_gate_ms: f64,
    pub stage_track_ms: f64,
    pub stage_measure_ms: f64,
    pub stage_fuse_ms: f64,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "benchmark: {} ({}x{}, {} cameras, {} categories, {} frames)\n",
            self.scenario, self.width, self.height, self.cameras, self.categories, self.frames
        ));
        s.push_str(&format!(
            "pipeline: {:.1} FPS  (mean {:.2} ms, p95 {:.2} ms per frame)\n",
            self.pipeline_fps, self.pipeline_mean_ms, self.pipeline_p95_ms
        ));
        s.push_str(&format!(
            "render (excluded): mean {:.2} ms per frame\n",
            self.render_mean_ms
        ));
        s.push_str(&format!(
            "stages (summed over views): gate {:.1} ms, track {:.1} ms, measure {:.1} ms, fuse {:.1} ms\n",
            self.stage_gate_ms, self.stage_track_ms, self.stage_measure_ms, self.stage_fuse_ms
        ));
        s
    }
}

/// Run the pipeline over `frames` frames of the scenario (default: the
/// scenario's full length) and measure throughput.
pub fn run_bench(resolved: &ResolvedScenario, frames: Option<u64>) -> Result<BenchReport> {
    let scenario = &resolved.scenario;
    let frame_count = frames
        .unwrap_or(scenario.frame_count)
        .min(scenario.frame_count)
        .max(1);

    let mut engine = MonitorEngine::new(resolved);
    let mut pipeline_ms = Vec::with_capacity(frame_count as usize);
    let mut render_total = 0.0f64;

    for frame_index in 0..frame_count {
        let t_render = Instant::now();
        let frame = scenario.render_frame(frame_index);
        render_total += t_render.elapsed().as_secs_f64();

        let t_pipe = Instant::now();
        engine.process_frame(&frame.observed)?;
        pipeline_ms.push(t_pipe.elapsed().as_secs_f64() * 1e3);
    }

    let total_ms: f64 = pipeline_ms.iter().sum();
    let mut sorted = pipeline_ms.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let p95 = sorted[((sorted.len() as f64 * 0.95).ceil() as usize - 1).min(sorted.len() - 1)];
    let stages = engine.stage_totals();

    let cam = &scenario.cameras[0].camera;
    Ok(BenchReport {
        scenario: scenario.name.clone(),
        width: cam.width,
        height: cam.height,
        cameras: scenario.cameras.len(),
        categories: scenario.categories.len(),
        frames: frame_count,
        pipeline_fps: frame_count as f64 / (total_ms / 1e3),
        pipeline_mean_ms: total_ms / frame_count as f64,
        pipeline_p95_ms: p95,
        render_mean_ms: render_total * 1e3 / frame_count as f64,
        stage_gate_ms: stages.gate_s * 1e3,
        stage_track_ms: stages.track_s * 1e3,
        stage_measure_ms: stages.measure_s * 1e3,
        stage_fuse_ms: stages.fuse_s * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn bench_runs_and_reports_positive_numbers() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
name = "bench-smoke"
fps = 10.0
duration_s = 1.0
categories = ["holder", "detector"]
[[cameras]]
name = "front"
view = "front"
width = 320
height = 240
scale = 10.0
origin_row = 120.0
origin_col = 160.0
[[objects]]
category = "holder"
half_extents = [1.0, 1.0, 1.0]
waypoints = [{ t = 0.0, center = [-5.0, 0.0, 0.0] }]
[[objects]]
category = "detector"
half_extents = [1.0, 1.0, 1.0]
waypoints = [{ t = 0.0, center = [5.0, 0.0, 0.0] }]
"#,
        )
        .unwrap();
        let resolved = cfg.resolve().unwrap();
        let report = run_bench(&resolved, Some(5)).unwrap();
        assert_eq!(report.frames, 5);
        assert!(report.pipeline_fps > 0.0);
        assert!(report.pipeline_p95_ms >= 0.0);
        let text = report.to_text();
        assert!(text.contains("FPS"));
    }
}
