//! Command-line surface over the library.
//!
//! Exit codes: 0 = ok / no confirmed warning, 2 = usage or config error,
//! 3 = confirmed collision warning occurred, 4 = stream-gap or data error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::run_bench;
use crate::config::{ResolvedScenario, ScenarioConfig, StrideMode};
use crate::error::{Error, Result};
use crate::metrics::{
    all_view_subsets, parse_view_subset, AccuracyAccumulator, DistanceErrorAccumulator,
    IoUAccumulator, IoUReport,
};
use crate::model::{CameraId, CategoryId, CategoryPair};
use crate::monitor::{
    combined_error, mean_time_between_errors, ReliabilityModel,
};
use crate::runner::{drive, MonitorEngine, SimMaskSource, StreamMaskSource};
use crate::sim::Scenario;
use crate::storage::{
    read_jsonl, EventRecord, EventStatus, JsonlWriter, Manifest, RunDir, TruthRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_WARNING: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "beamguard",
    version,
    about = "Multi-camera collision monitoring with a synthetic workcell simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scenario into a mask stream plus analytic ground truth.
    Simulate(SimulateArgs),
    /// Run the monitoring pipeline over a scenario or a recorded stream.
    Monitor(MonitorArgs),
    /// Derive the collision threshold from a distance-error report.
    Calibrate(CalibrateArgs),
    /// Evaluate a finished run against its ground truth.
    Metrics(MetricsArgs),
    /// Redundancy reliability arithmetic (combined error, MTBE).
    Reliability(ReliabilityArgs),
    /// Measure pipeline throughput on a scenario.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Scenario config (TOML); simulates and monitors in one pass.
    #[arg(long, conflicts_with = "stream")]
    pub config: Option<PathBuf>,
    /// Recorded run directory to monitor instead of simulating.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    /// Output directory for the event log (and, in config mode, the full
    /// run artifacts).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the collision threshold delta (pixels).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Override the consecutive-frame confirmation count.
    #[arg(long)]
    pub k: Option<u32>,
    /// Override the replica count (reliability bookkeeping only).
    #[arg(long)]
    pub replicas: Option<u32>,
    /// Override contour sampling with a fixed stride.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Restrict monitoring to a camera subset, e.g. "front+side".
    #[arg(long)]
    pub views: Option<String>,
    /// Worker threads (default: one per camera).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Distance-error report (JSON, as written by `metrics`).
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Run directory holding manifest, masks, and events.
    #[arg(long)]
    pub run: PathBuf,
    /// Ground-truth file (default: <run>/ground_truth.jsonl).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Comma-separated view subsets to evaluate (default: all combinations),
    /// e.g. "front,side,front+side".
    #[arg(long)]
    pub views: Option<String>,
    /// Where to write reports (default: <run>/metrics).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    /// Per-frame error probability of one system.
    pub p: f64,
    /// Independent replicas fused.
    pub r: u32,
    /// Consecutive frames required to confirm.
    pub k: u32,
    /// Frame rate in frames per second.
    pub fps: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Frames to measure (default: the scenario's full length).
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Optional JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse argv and run; returns the process exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version on stdout with code 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command, stdout) {
        Ok(code) => code,
        // a downstream pipe closing early (e.g. `| head`) is not an error
        Err(Error::Io(io)) if io.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

pub fn run_command(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(args) => cmd_simulate(args, stdout),
        Command::Monitor(args) => cmd_monitor(args, stdout),
        Command::Calibrate(args) => cmd_calibrate(args, stdout),
        Command::Metrics(args) => cmd_metrics(args, stdout),
        Command::Reliability(args) => cmd_reliability(args, stdout),
        Command::Bench(args) => cmd_bench(args, stdout),
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).map_err(|e| match e {
        // an unreadable --config path is a usage error, not a data error
        Error::Io(io) => Error::config(path.display().to_string(), io.to_string()),
        other => other,
    })
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<(ScenarioConfig, ResolvedScenario)> {
    let mut config = read_config(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let resolved = config.resolve()?;
    Ok((config, resolved))
}

fn truth_records(scenario: &Scenario, truth: &crate::sim::GroundTruthFrame) -> Vec<TruthRecord> {
    let cat_name = |id: CategoryId| scenario.categories[id.0 as usize].name.clone();
    scenario
        .pairs()
        .into_iter()
        .map(|pair| {
            let px: BTreeMap<String, Option<f64>> = scenario
                .cameras
                .iter()
                .map(|cam| {
                    (
                        cam.camera.name.clone(),
                        truth
                            .view_distance_px
                            .get(&cam.camera.id)
                            .and_then(|m| m.get(&pair))
                            .copied(),
                    )
                })
                .collect();
            TruthRecord {
                frame_index: truth.frame_index,
                pair: [cat_name(pair.0), cat_name(pair.1)],
                px,
                world_gap: truth.world_gap.get(&pair).copied(),
                warning: truth.warning.get(&pair).copied().flatten(),
            }
        })
        .collect()
}

/// Write the full simulated artifact set (manifest, masks, ground truth).
fn write_simulation(
    config: &ScenarioConfig,
    scenario: &Scenario,
    run: &RunDir,
) -> Result<Manifest> {
    let manifest = Manifest::for_config(config);
    run.write_manifest(&manifest)?;
    let mut gt: JsonlWriter<TruthRecord> = JsonlWriter::create(&run.ground_truth_path())?;
    for frame in scenario.simulate() {
        run.write_frame(&manifest, &frame.observed, frame.frame_index)?;
        for record in truth_records(scenario, &frame.truth) {
            gt.append(&record)?;
        }
    }
    gt.finish()?;
    Ok(manifest)
}

fn cmd_simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (config, resolved) = load_config(&args.config, args.seed)?;
    let run = RunDir::new(&args.out);
    write_simulation(&config, &resolved.scenario, &run)?;
    writeln!(
        stdout,
        "wrote {} frames x {} cameras to {}",
        resolved.scenario.frame_count,
        resolved.scenario.cameras.len(),
        args.out.display()
    )?;
    Ok(EXIT_OK)
}

fn apply_monitor_overrides(config: &mut ScenarioConfig, args: &MonitorArgs) {
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(delta) = args.delta {
        config.monitor.delta_px = delta;
    }
    if let Some(k) = args.k {
        config.monitor.consecutive_k = k;
    }
    if let Some(r) = args.replicas {
        config.monitor.replicas = r;
    }
    if let Some(s) = args.stride {
        config.stride.mode = StrideMode::Fixed;
        config.stride.stride = s;
    }
}

fn with_thread_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

fn cmd_monitor(args: MonitorArgs, stdout: &mut dyn Write) -> Result<i32> {
    // Resolve the scenario from either the config file or the stream's
    // embedded manifest config.
    enum Input {
        Config(ScenarioConfig),
        Stream(RunDir, Manifest),
    }
    let input = match (&args.config, &args.stream) {
        (Some(path), None) => Input::Config(read_config(path)?),
        (None, Some(dir)) => {
            let run = RunDir::new(dir);
            let manifest = run.read_manifest()?;
            Input::Stream(run, manifest)
        }
        _ => {
            return Err(Error::InvalidParameter {
                name: "input",
                reason: "exactly one of --config or --stream is required".into(),
            })
        }
    };

    let mut config = match &input {
        Input::Config(c) => c.clone(),
        Input::Stream(_, m) => m.config.clone(),
    };
    apply_monitor_overrides(&mut config, &args);
    let resolved = config.resolve()?;

    let camera_subset = match &args.views {
        None => None,
        Some(spec) => {
            let cameras: Vec<_> = resolved
                .scenario
                .cameras
                .iter()
                .map(|c| c.camera.clone())
                .collect();
            Some(parse_view_subset(spec, &cameras)?.0)
        }
    };

    let out_run = RunDir::new(&args.out);
    let summary = with_thread_pool(args.threads, || -> Result<_> {
        let mut engine = MonitorEngine::with_cameras(&resolved, camera_subset.as_deref());
        let mut events: JsonlWriter<EventRecord> = JsonlWriter::create(&out_run.events_path())?;
        let cat_name =
            |id: CategoryId| resolved.scenario.categories[id.0 as usize].name.clone();
        let cam_name = |id: CameraId| resolved.scenario.cameras[id.0].camera.name.clone();

        let mut emit = |decisions: &crate::runner::FrameDecisions| -> Result<()> {
            for e in &decisions.events {
                events.append(&EventRecord {
                    frame_index: e.frame_index,
                    pair: [cat_name(e.pair.0), cat_name(e.pair.1)],
                    d: e
                        .min_distances_px
                        .iter()
                        .map(|(cam, d)| (cam_name(*cam), *d))
                        .collect(),
                    raw: e.raw,
                    confirmed: e.confirmed,
                    status: if e.unknown {
                        EventStatus::Unknown
                    } else if e.degraded {
                        EventStatus::Degraded
                    } else {
                        EventStatus::Ok
                    },
                })?;
            }
            Ok(())
        };

        let summary = match &input {
            Input::Config(_) => {
                // config mode also persists the simulated stream so a later
                // `metrics` invocation has everything it needs
                write_simulation(&config, &resolved.scenario, &out_run)?;
                let mut source = SimMaskSource::new(resolved.scenario.clone());
                drive(&mut engine, &mut source, &mut emit)?
            }
            Input::Stream(run, manifest) => {
                let mut source = StreamMaskSource::new(run.clone(), manifest.clone());
                drive(&mut engine, &mut source, &mut emit)?
            }
        };
        events.finish()?;
        Ok(summary)
    })?;

    writeln!(
        stdout,
        "monitored {} frames: {} raw warnings, {} confirmed",
        summary.frames, summary.raw_warnings, summary.confirmed_warnings
    )?;
    Ok(if summary.any_confirmed() {
        EXIT_WARNING
    } else {
        EXIT_OK
    })
}

fn cmd_calibrate(args: CalibrateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&args.report)?;
    let report: crate::metrics::DistanceErrorReport = serde_json::from_str(&text)
        .map_err(|e| Error::format(args.report.display().to_string(), e.to_string()))?;
    let Some((mae, std)) = report.max_mae_cell() else {
        return Err(Error::format(
            args.report.display().to_string(),
            "no defined distance-error cells to calibrate from",
        ));
    };
    let (delta, degenerate) = crate::monitor::calibrate_threshold(mae, std);
    writeln!(stdout, "{delta}")?;
    if degenerate {
        eprintln!("warning: all-zero error report; threshold {delta} px is degenerate");
    }
    Ok(EXIT_OK)
}

fn cmd_metrics(args: MetricsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let run = RunDir::new(&args.run);
    let manifest = run.read_manifest()?;
    let resolved = manifest.config.resolve()?;
    let scenario = &resolved.scenario;
    let cameras: Vec<_> = scenario.cameras.iter().map(|c| c.camera.clone()).collect();
    let categories = scenario.categories.clone();

    let gt_path = args
        .gt
        .clone()
        .unwrap_or_else(|| run.ground_truth_path());
    let truth: Vec<TruthRecord> = read_jsonl(&gt_path)?;
    let events: Vec<EventRecord> = read_jsonl(&run.events_path())?;

    let subsets = match &args.views {
        None => all_view_subsets(&cameras),
        Some(spec) => spec
            .split(',')
            .map(|s| parse_view_subset(s, &cameras))
            .collect::<Result<Vec<_>>>()?,
    };

    let reports = build_reports(
        &run, &manifest, scenario, &truth, &events, subsets,
    )?;

    let out_dir = args.out.clone().unwrap_or_else(|| run.metrics_dir());
    std::fs::create_dir_all(&out_dir)?;
    let write_pair = |name: &str, table: &str, json: String| -> Result<()> {
        std::fs::write(out_dir.join(format!("{name}.txt")), table)?;
        std::fs::write(out_dir.join(format!("{name}.json")), json)?;
        Ok(())
    };

    let iou_table = reports.iou.to_table(&categories);
    write_pair(
        "iou",
        &iou_table,
        serde_json::to_string_pretty(&reports.iou).expect("serializable"),
    )?;
    let dist_table = reports.distance.to_table(&categories);
    write_pair(
        "distance_error",
        &dist_table,
        serde_json::to_string_pretty(&reports.distance).expect("serializable"),
    )?;
    let acc_table = reports.accuracy.to_table();
    write_pair(
        "accuracy",
        &acc_table,
        serde_json::to_string_pretty(&reports.accuracy).expect("serializable"),
    )?;

    writeln!(stdout, "Mask IoU\n{iou_table}")?;
    writeln!(stdout, "Distance errors (MAE / STD, px)\n{dist_table}")?;
    writeln!(stdout, "Collision accuracy by view subset\n{acc_table}")?;
    Ok(EXIT_OK)
}

pub struct RunReports {
    pub iou: IoUReport,
    pub distance: crate::metrics::DistanceErrorReport,
    pub accuracy: crate::metrics::AccuracyReport,
}

/// Build all three reports for a recorded run: observed masks vs re-rendered
/// ground-truth masks, measured vs exact distances, and subset accuracy.
pub fn build_reports(
    run: &RunDir,
    manifest: &Manifest,
    scenario: &Scenario,
    truth: &[TruthRecord],
    events: &[EventRecord],
    subsets: Vec<(Vec<CameraId>, String)>,
) -> Result<RunReports> {
    let cameras: Vec<_> = scenario.cameras.iter().map(|c| c.camera.clone()).collect();
    let categories = scenario.categories.clone();
    let cat_id = |name: &str| -> Result<CategoryId> {
        categories
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.id)
            .ok_or_else(|| Error::Alignment(format!("unknown category '{name}' in record")))
    };
    let cam_id = |name: &str| -> Result<CameraId> {
        cameras
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.id)
            .ok_or_else(|| Error::Alignment(format!("unknown camera '{name}' in record")))
    };

    // Index ground truth by (frame, pair).
    let mut truth_by_unit: BTreeMap<(u64, CategoryPair), &TruthRecord> = BTreeMap::new();
    for t in truth {
        let pair = CategoryPair::new(cat_id(&t.pair[0])?, cat_id(&t.pair[1])?);
        truth_by_unit.insert((t.frame_index, pair), t);
    }

    // IoU: observed stream vs re-rendered noise-free masks.
    let mut iou_acc = IoUAccumulator::new(cameras.clone(), categories.clone());
    for frame_index in 0..manifest.frame_count {
        let observed = run.read_frame(manifest, frame_index)?;
        let rendered = scenario.render_frame(frame_index);
        iou_acc.add_frame(&observed, &rendered.truth_masks)?;
    }

    // Distance errors and subset accuracy from the event log.
    let mut dist_acc = DistanceErrorAccumulator::new(cameras.clone(), categories.clone());
    let mut acc_acc = AccuracyAccumulator::new(
        subsets,
        scenario.delta_px,
        scenario.absent_view_policy,
    );
    for e in events {
        let pair = CategoryPair::new(cat_id(&e.pair[0])?, cat_id(&e.pair[1])?);
        let Some(t) = truth_by_unit.get(&(e.frame_index, pair)) else {
            return Err(Error::Alignment(format!(
                "event at frame {} pair {:?} has no ground-truth record",
                e.frame_index, e.pair
            )));
        };
        let mut distances = BTreeMap::new();
        for (cam_name, measured) in &e.d {
            let cam = cam_id(cam_name)?;
            distances.insert(cam, *measured);
            if let (Some(m), Some(Some(exact))) = (measured, t.px.get(cam_name)) {
                dist_acc.add_sample(cam, pair, *m, *exact);
            }
        }
        acc_acc.add_unit(&distances, t.warning);
    }

    Ok(RunReports {
        iou: iou_acc.finish(),
        distance: dist_acc.finish(),
        accuracy: acc_acc.finish(),
    })
}

fn cmd_reliability(args: ReliabilityArgs, stdout: &mut dyn Write) -> Result<i32> {
    if !(0.0..=1.0).contains(&args.p) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("probability must be in [0, 1], got {}", args.p),
        });
    }
    if args.r < 1 || args.k < 1 {
        return Err(Error::InvalidParameter {
            name: "r/k",
            reason: "replicas and confirmation count must be >= 1".into(),
        });
    }
    if !(args.fps.is_finite() && args.fps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "fps",
            reason: format!("must be > 0, got {}", args.fps),
        });
    }
    let model = ReliabilityModel {
        per_frame_error_p: args.p,
        replicas_r: args.r,
        consecutive_k: args.k,
        fps: args.fps,
    };
    let p_combined = combined_error(&model);
    writeln!(stdout, "p_combined = {p_combined:.6e}")?;
    match mean_time_between_errors(&model) {
        Some(m) => {
            writeln!(stdout, "mtbe_seconds = {:.6e}", m.seconds)?;
            writeln!(stdout, "mtbe_years = {:.2}", m.years)?;
        }
        None => writeln!(stdout, "mtbe = unbounded (zero combined error probability)")?,
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (_, resolved) = load_config(&args.config, None)?;
    let report = with_thread_pool(args.threads, || run_bench(&resolved, args.frames))?;
    write!(stdout, "{}", report.to_text())?;
    if let Some(path) = &args.out {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(
            path,
            serde_json::to_string_pretty(&report).expect("serializable"),
        )?;
    }
    Ok(EXIT_OK)
}
