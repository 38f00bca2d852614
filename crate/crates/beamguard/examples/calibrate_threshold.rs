//! Threshold calibration from distance-error statistics: the worst MAE
//! cell plus two standard deviations covers ~95% of measurement error, so
//! the collision threshold rounds that up to whole pixels.
//!
//!     cargo run --release --example calibrate_threshold

use beamguard::monitor::calibrate_threshold;

fn main() {
    println!("worst cell (MAE, STD)  ->  threshold delta (px)");
    for (mae, std) in [(3.9, 2.8), (2.0, 1.0), (1.8, 1.2), (0.5, 0.3)] {
        let (delta, degenerate) = calibrate_threshold(mae, std);
        let note = if degenerate { "  (degenerate)" } else { "" };
        println!(
            "  ({mae:>4.1}, {std:>4.1})  ->  ceil({:.1}) = {delta}{note}",
            mae + 2.0 * std
        );
    }
    println!();
    println!("a rig with worst-case 3.9 / 2.8 px measurement error monitors");
    println!("safely with a 10 px threshold.");
}
