//! How each Lindblad operator acts on a two-particle state during the hold:
//! number-conserving operators stay in the N = 2 sector, α leaks population
//! downwards.
//!
//! Run with `cargo run --example noise_operators`.

use lindey::dynamics::{evolve_rk4, IntegratorConfig, JumpOperator, LindbladGenerator};
use lindey::{build_basis, build_input_state, build_operators, BasisKind, InputState};

fn main() -> lindey::Result<()> {
    let basis = build_basis(BasisKind::Truncated, 2)?;
    let ops = build_operators(basis, 1.0, 0.5);
    let rho0 = build_input_state(basis, InputState::TwinFock)?;
    let cases = [
        ("S_z", ops.s_z.clone()),
        ("S_-", ops.s_minus.clone()),
        ("S_+", ops.s_plus.clone()),
        ("alpha", ops.alpha()?.clone()),
    ];
    for (name, l) in cases {
        let gen = LindbladGenerator::new(ops.h_delta.clone(), vec![JumpOperator::new(l, 0.2)])?;
        let rho = evolve_rk4(&gen, &rho0, 5.0, &IntegratorConfig::default())?;
        let sectors: Vec<String> = (0..=2).rev().map(|m| format!("P(N={m}) = {:.4}", rho.sector_population(m))).collect();
        println!("{name:>5}: {}  <n_total> = {:.4}", sectors.join(", "), rho.expectation(&ops.n_total)?.re);
    }
    Ok(())
}
