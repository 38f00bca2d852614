//! Redundancy reliability cascade: how replica fusion and consecutive-frame
//! confirmation multiply a per-frame error probability down to one expected
//! error in centuries.
//!
//!     cargo run --release --example reliability

use beamguard::monitor::{combined_error, mean_time_between_errors, ReliabilityModel};

fn main() {
    let p = 0.002; // one system: 99.8% per-frame accuracy
    let fps = 10.0;
    println!("per-frame error p = {p}, {fps} FPS");
    println!();
    println!("replicas  consecutive  combined-error  mean time between errors");
    for (r, k) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let model = ReliabilityModel {
            per_frame_error_p: p,
            replicas_r: r,
            consecutive_k: k,
            fps,
        };
        let combined = combined_error(&model);
        let mtbe = mean_time_between_errors(&model).expect("p > 0");
        let horizon = if mtbe.years >= 1.0 {
            format!("{:.2} years", mtbe.years)
        } else if mtbe.seconds >= 3600.0 {
            format!("{:.1} hours", mtbe.seconds / 3600.0)
        } else {
            format!("{:.1} s", mtbe.seconds)
        };
        println!("{r:>8}  {k:>11}  {combined:>14.3e}  {horizon}");
    }
    println!();
    println!("two independent systems with two-frame confirmation reach one");
    println!("expected detection error every ~198 years at 10 FPS.");
}
