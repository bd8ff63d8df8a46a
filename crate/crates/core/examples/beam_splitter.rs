//! A 50:50 beam splitter acting on `|4,0⟩`, twin-Fock and NOON inputs.
//!
//! Run with `cargo run --example beam_splitter`.

use std::f64::consts::FRAC_PI_4;

use lindey::dynamics::{apply_propagator, unitary_propagator};
use lindey::{build_basis, build_input_state, build_operators, BasisKind, InputState};

fn main() -> lindey::Result<()> {
    let basis = build_basis(BasisKind::FixedN, 4)?;
    let ops = build_operators(basis, 1.0, 0.0);
    let bs = unitary_propagator(basis, &ops.h_j, FRAC_PI_4)?;
    println!("unitarity error of the splitter: {:.1e}", bs.unitarity_error());

    for input in [InputState::N0, InputState::TwinFock, InputState::Noon] {
        let rho = apply_propagator(&bs, &build_input_state(basis, input)?)?;
        let populations: Vec<String> = basis
            .states()
            .enumerate()
            .map(|(i, s)| format!("{s}: {:.4}", rho.matrix()[(i, i)].re))
            .collect();
        let jz = rho.expectation(&ops.s_z)?.re;
        println!("{input:>9} -> {}   <S_z> = {jz:+.3}", populations.join("  "));
    }
    Ok(())
}
