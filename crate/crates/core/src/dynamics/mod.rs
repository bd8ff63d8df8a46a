//! Time evolution: exact unitary propagators for the beam splitters and a
//! fixed-step RK4 integrator for the Lindblad master equation.

mod integrator;
mod lindblad;
mod liouvillian;
mod unitary;

pub use integrator::{evolve_rk4, evolve_rk4_with_stats, EvolutionStats, IntegratorConfig, Rk4Integrator};
pub use lindblad::{lindblad_rhs, JumpOperator, LindbladGenerator};
pub use liouvillian::Liouvillian;
pub use unitary::{apply_propagator, unitary_propagator, Propagator};
