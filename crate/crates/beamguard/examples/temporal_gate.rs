//! The temporal-consistency gate bridging segmenter dropouts: short streaks
//! substitute the last accepted mask, a streak past the cap fails open with
//! a lost status, and the gate re-acquires on its own.
//!
//!     cargo run --release --example temporal_gate

use beamguard::model::Mask;
use beamguard::pipeline::{GateConfig, GateState, GateStatus};

fn main() {
    let cfg = GateConfig {
        change_iou_threshold: 0.5,
        max_streak: 5,
    };
    let mut mask = Mask::empty(64, 64);
    mask.fill_rect(20, 40, 20, 40);

    // 3 good frames, a 4-frame dropout (bridged), 2 good frames,
    // a 6-frame dropout (exhausts the streak cap), then recovery.
    let script: Vec<(&str, Option<&Mask>)> = [
        ("ok", true), ("ok", true), ("ok", true),
        ("drop", false), ("drop", false), ("drop", false), ("drop", false),
        ("ok", true), ("ok", true),
        ("drop", false), ("drop", false), ("drop", false),
        ("drop", false), ("drop", false), ("drop", false),
        ("ok", true), ("ok", true),
    ]
    .iter()
    .map(|&(label, present)| (label, present.then_some(&mask)))
    .collect();

    let mut gate = GateState::new();
    println!("frame  input  status       emitted-mask");
    for (i, (label, current)) in script.iter().enumerate() {
        let (out, status) = gate.step(*current, &cfg, true);
        let emitted = match &out {
            Some(m) if !m.is_empty() => format!("{} px", m.count()),
            _ => "none".to_string(),
        };
        println!(
            "{i:>5}  {label:<5}  {:<11}  {emitted}",
            match status {
                GateStatus::Fresh => "fresh",
                GateStatus::Substituted => "substituted",
                GateStatus::Lost => "LOST",
            }
        );
    }
    println!();
    println!("a streak shorter than the cap ({}) is fully bridged;", cfg.max_streak);
    println!("the sixth consecutive dropout fails open as LOST, and the next");
    println!("real mask is accepted fresh again.");
}
