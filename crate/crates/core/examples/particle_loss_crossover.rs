//! Number-conserving noise (S+) against particle loss (α) for twin-Fock
//! inputs: sensitivity and CRLB at the first minimum after T_H = π.
//!
//! Run with `cargo run --release --example particle_loss_crossover -- 2:12:2`.

use std::f64::consts::PI;

use lindey::analysis::{crossover_experiment, uniform_grid};
use lindey::io::config::parse_n_list;

fn main() -> lindey::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "2:10:2".into());
    let ns = parse_n_list("n-list", &spec)?;
    let table = crossover_experiment(&ns, 0.03, 0.5, &uniform_grid(0.5, 4.0 * PI, 0.02))?;
    println!("{:>3} | {:>9} {:>9} {:>9} | {:>9} {:>9} {:>9}", "N", "T(S+)", "sens", "CRLB", "T(alpha)", "sens", "CRLB");
    for (c, l) in table.conserving.per_n.iter().zip(&table.loss.per_n) {
        println!(
            "{:>3} | {:>9.4} {:>9.5} {:>9.5} | {:>9.4} {:>9.5} {:>9.5}",
            c.n, c.t_min, c.sensitivity_at_min, c.crlb_at_min, l.t_min, l.sensitivity_at_min, l.crlb_at_min
        );
    }
    println!("measured sensitivities cross at N = {:?}", table.sensitivity_crossings());
    Ok(())
}
