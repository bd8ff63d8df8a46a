//! Noise during the beam splitters as well as the hold, for one particle.
//!
//! Run with `cargo run --release --example whole_process_noise`.

use lindey::estimation::sensitivity;
use lindey::{default_config_for, EstimatorChoice, InputState, NoiseOp, NoisePlacement};

fn main() -> lindey::Result<()> {
    let gamma = 0.1;
    let base = default_config_for(InputState::N0, 1)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "T_H", "hold only", "whole Sz", "whole S-", "whole S+");
    for t in [2.0, 5.0, 8.0, 11.0, 14.0, 17.0, 20.0] {
        let hold = sensitivity(&base.with_noise(NoiseOp::Sz, gamma), t, EstimatorChoice::Imbalance, None)?;
        let mut row = format!("{t:>5.1} {:>10.5}", hold.sensitivity);
        for op in [NoiseOp::Sz, NoiseOp::SMinus, NoiseOp::SPlus] {
            let mut cfg = base.with_noise(op, gamma);
            cfg.noise_placement = NoisePlacement::WholeProcess;
            row += &format!(" {:>10.5}", sensitivity(&cfg, t, EstimatorChoice::Imbalance, None)?.sensitivity);
        }
        println!("{row}");
    }
    Ok(())
}
