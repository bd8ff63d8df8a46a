//! Checks the numerical pipeline against the closed-form single-particle
//! solution: the post-hold density matrix and the sensitivity.
//!
//! Run with `cargo run --example single_particle_oracle`.

use lindey::linalg::max_abs_diff;
use lindey::oracles::{analytic_sensitivity, analytic_state, AnalyticCase, Stage};
use lindey::estimation::sensitivity;
use lindey::{default_config_for, run_protocol, EstimatorChoice, InputState, NoiseOp};

fn main() -> lindey::Result<()> {
    let (gamma, delta) = (0.1, 0.5);
    for op in NoiseOp::CONSERVING {
        let case = AnalyticCase::new(1, InputState::N0, op)?;
        let cfg = default_config_for(InputState::N0, 1)?.with_noise(op, gamma).with_delta(delta);
        let mut worst_state: f64 = 0.0;
        let mut worst_sens: f64 = 0.0;
        for t in [1.0, 2.5, 4.0, 7.5, 11.0, 17.0] {
            let run = run_protocol(&cfg, t)?;
            let exact = analytic_state(&case, Stage::AfterHold, gamma, delta, t)?;
            worst_state = worst_state.max(max_abs_diff(run.rho_after_hold.matrix(), exact.matrix()));
            let numeric = sensitivity(&cfg, t, EstimatorChoice::Imbalance, None)?.sensitivity;
            let closed = analytic_sensitivity(&case, gamma, delta, t)?;
            worst_sens = worst_sens.max((numeric - closed).abs() / closed);
        }
        println!("L = {op:>3}: max |rho - rho_exact| = {worst_state:.2e}, max relative sensitivity error = {worst_sens:.2e}");
    }
    Ok(())
}
