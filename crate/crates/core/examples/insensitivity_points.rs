//! Locates insensitivity points and compares them with the known lattices.
//!
//! Run with `cargo run --release --example insensitivity_points`.

use std::f64::consts::PI;

use lindey::analysis::{detect, uniform_grid};
use lindey::{default_config_for, EstimatorChoice, InputState, NoiseOp};

fn main() -> lindey::Result<()> {
    let grid = uniform_grid(0.5, 4.0 * PI + 0.25, 0.02);
    let cases = [
        (InputState::N0, 1, 0.05),
        (InputState::Noon, 1, 0.05),
        (InputState::TwinFock, 2, 0.05),
        (InputState::N0, 5, 0.05),
        (InputState::TwinFock, 6, 0.0),
        (InputState::Noon, 4, 0.01),
    ];
    for (input, n, gamma) in cases {
        let mut cfg = default_config_for(input, n)?;
        if gamma > 0.0 {
            cfg = cfg.with_noise(NoiseOp::Sz, gamma);
        }
        let (_, report) = detect(&cfg, &grid, EstimatorChoice::default_for(input))?;
        let in_pi: Vec<String> = report.locations.iter().map(|t| format!("{:.3}", t / PI)).collect();
        println!(
            "{input:>9} N={n} gamma={gamma}: {} points per pi, at T_H/pi = [{}]",
            report.per_period_count.map_or("-".into(), |d| format!("{d:.2}")),
            in_pi.join(", ")
        );
    }
    Ok(())
}
