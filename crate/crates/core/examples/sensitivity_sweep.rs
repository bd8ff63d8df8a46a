//! Sensitivity and quantum Cramér-Rao bound along a holding-time grid.
//!
//! Run with `cargo run --release --example sensitivity_sweep -- [tf|n0|noon] [N] [gamma]`.

use lindey::analysis::uniform_grid;
use lindey::estimation::sweep_sensitivity;
use lindey::{default_config_for, EstimatorChoice, InputState, NoiseOp};

fn main() -> lindey::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let input = args.first().and_then(|s| InputState::from_key(s)).unwrap_or(InputState::TwinFock);
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let gamma: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.01);

    let cfg = default_config_for(input, n)?.with_noise(NoiseOp::Sz, gamma);
    let o = EstimatorChoice::default_for(input);
    let curve = sweep_sensitivity(&cfg, &uniform_grid(0.5, 6.5, 0.25), o)?;

    println!("{input}, N = {n}, gamma = {gamma}, readout = {}", o.key());
    println!("{:>6} {:>10} {:>10} {:>12} {:>10}", "T_H", "<O>", "Var O", "sensitivity", "CRLB");
    for p in &curve.points {
        let s = if p.divergent { "inf".to_string() } else { format!("{:.5}", p.sensitivity) };
        println!("{:>6.2} {:>10.5} {:>10.5} {:>12} {:>10.5}", p.t_hold, p.mean, p.variance, s, p.crlb);
    }
    println!(
        "integrator: {} steps, max trace drift {:.1e}, min eigenvalue {:.1e}",
        curve.stats.steps, curve.stats.max_trace_drift, curve.stats.min_eigenvalue
    );
    Ok(())
}
