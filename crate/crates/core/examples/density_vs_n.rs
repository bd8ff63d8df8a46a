//! Number of insensitivity points per period π as the particle number grows.
//!
//! Run with `cargo run --release --example density_vs_n`.

use std::f64::consts::PI;

use lindey::analysis::{count_density_vs_n, uniform_grid};
use lindey::{InputState, NoiseOp};

fn main() -> lindey::Result<()> {
    let grid = uniform_grid(0.5, 4.0 * PI + 0.25, 0.02);
    for (input, ns) in [(InputState::TwinFock, vec![2, 4, 6, 8, 10]), (InputState::N0, vec![2, 3, 4, 5])] {
        println!("{input}:");
        for row in count_density_vs_n(input, &ns, NoiseOp::Sz, &[0.01], &grid)? {
            let fmt = |d: Option<f64>| d.map_or("-".into(), |d| format!("{d:.2}"));
            println!(
                "  N = {:>2}: noiseless {} per pi, gamma = 0.01 {} per pi",
                row.n,
                fmt(row.noiseless_per_pi),
                fmt(row.noisy[0].1)
            );
        }
    }
    Ok(())
}
