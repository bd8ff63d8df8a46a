//! Simulation and analysis of a two-mode atom interferometer coupled to an
//! environment.
//!
//! The pipeline is: build a Fock basis and operators ([`fock`]), prepare an
//! input state, run the beam-splitter / noisy hold / beam-splitter sequence
//! ([`protocol`], built on [`dynamics`]), then extract phase sensitivity and
//! the quantum Cramér-Rao bound ([`estimation`]). [`analysis`] locates the
//! insensitivity points (holding times where the sensitivity diverges) and
//! runs the scaling experiments; [`oracles`] holds closed-form results for
//! one and two particles; [`io`] parses configs and writes CSV/JSON/SVG.

pub mod analysis;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod protocol;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use estimation::{EstimatorChoice, SensitivityCurve, SensitivityPoint};
pub use fock::{build_basis, build_input_state, build_operators, BasisKind, BasisSpec, InputState, OperatorSet};
pub use protocol::{default_config_for, run_protocol, NoiseOp, NoisePlacement, ProtocolConfig, ProtocolRun};
