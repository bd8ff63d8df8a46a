//! The interferometric sequence: beam splitter, noisy phase accumulation,
//! beam splitter.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::dynamics::{
    apply_propagator, evolve_rk4_with_stats, unitary_propagator, EvolutionStats, IntegratorConfig,
    JumpOperator, LindbladGenerator, Propagator, Rk4Integrator,
};
use crate::error::{Error, Result};
use crate::fock::{build_basis, build_input_state, build_operators, BasisKind, BasisSpec, InputState, OperatorSet};
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseOp {
    Sz,
    SMinus,
    SPlus,
    /// Symmetric single-particle loss `(â + b̂)/√2`.
    Alpha,
    None,
}

impl NoiseOp {
    pub const CONSERVING: [NoiseOp; 3] = [NoiseOp::Sz, NoiseOp::SMinus, NoiseOp::SPlus];

    pub fn key(&self) -> &'static str {
        match self {
            NoiseOp::Sz => "sz",
            NoiseOp::SMinus => "s-",
            NoiseOp::SPlus => "s+",
            NoiseOp::Alpha => "alpha",
            NoiseOp::None => "none",
        }
    }

    /// File-name friendly variant of [`key`](Self::key).
    pub fn slug(&self) -> &'static str {
        match self {
            NoiseOp::SMinus => "sminus",
            NoiseOp::SPlus => "splus",
            other => other.key(),
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key.to_ascii_lowercase().as_str() {
            "sz" => Some(NoiseOp::Sz),
            "s-" | "sminus" => Some(NoiseOp::SMinus),
            "s+" | "splus" => Some(NoiseOp::SPlus),
            "alpha" => Some(NoiseOp::Alpha),
            "none" => Some(NoiseOp::None),
            _ => None,
        }
    }

    pub fn conserves_number(&self) -> bool {
        !matches!(self, NoiseOp::Alpha)
    }
}

impl fmt::Display for NoiseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoisePlacement {
    HoldOnly,
    WholeProcess,
}

impl NoisePlacement {
    pub fn key(&self) -> &'static str {
        match self {
            NoisePlacement::HoldOnly => "hold",
            NoisePlacement::WholeProcess => "whole",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key.to_ascii_lowercase().as_str() {
            "hold" => Some(NoisePlacement::HoldOnly),
            "whole" => Some(NoisePlacement::WholeProcess),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub input: InputState,
    pub noise_op: NoiseOp,
    pub gamma: f64,
    pub delta: f64,
    pub j: f64,
    pub t_bs_first: f64,
    pub t_bs_second: f64,
    pub noise_placement: NoisePlacement,
    pub integrator: IntegratorConfig,
}

/// Defaults for an input state: `J = 1`, `δ = 0.5`, `π/4` splitters, noise
/// during the hold only, no noise operator.
///
/// A NOON input with `N ≥ 2` gets a `π/2` first splitter. With `π/4`, even-N
/// NOON states already lose all phase information at isolated holding times
/// without any noise; `π/2` recovers the noiseless `1/(N T_H)` behaviour.
pub fn default_config_for(input: InputState, n: usize) -> Result<ProtocolConfig> {
    let cfg = ProtocolConfig {
        n,
        input,
        noise_op: NoiseOp::None,
        gamma: 0.0,
        delta: 0.5,
        j: 1.0,
        t_bs_first: if input == InputState::Noon && n >= 2 { FRAC_PI_2 } else { FRAC_PI_4 },
        t_bs_second: FRAC_PI_4,
        noise_placement: NoisePlacement::HoldOnly,
        integrator: IntegratorConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ProtocolConfig {
    pub fn with_noise(mut self, op: NoiseOp, gamma: f64) -> Self {
        self.noise_op = op;
        self.gamma = gamma;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("particle count must be at least 1"));
        }
        if self.input == InputState::TwinFock && self.n % 2 != 0 {
            return Err(Error::invalid(format!(
                "twin-Fock input needs an even particle number, got {}",
                self.n
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        for (name, v) in [("t_bs_first", self.t_bs_first), ("t_bs_second", self.t_bs_second)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !self.delta.is_finite() || !self.j.is_finite() {
            return Err(Error::invalid("delta and J must be finite"));
        }
        self.integrator.validate()
    }

    pub fn basis(&self) -> BasisSpec {
        let kind = match self.noise_op {
            NoiseOp::Alpha => BasisKind::Truncated,
            _ => BasisKind::FixedN,
        };
        build_basis(kind, self.n.max(1)).expect("n >= 1 after validation")
    }

    /// Human-readable remarks on choices that differ from the plain `π/4` convention.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.input == InputState::Noon && self.n >= 2 && self.t_bs_first != FRAC_PI_4 {
            notes.push(format!(
                "NOON input uses a first beam splitter of {:.6} instead of pi/4",
                self.t_bs_first
            ));
        }
        if self.noise_op == NoiseOp::None && self.gamma > 0.0 {
            notes.push("gamma is ignored because no noise operator is selected".into());
        }
        notes
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub config: ProtocolConfig,
    pub t_hold: f64,
    pub rho_after_bs1: DensityMatrix,
    pub rho_after_hold: DensityMatrix,
    pub rho_final: DensityMatrix,
    pub stats: EvolutionStats,
}

#[derive(Clone, Debug)]
enum Splitter {
    Exact(Propagator),
    Noisy(LindbladGenerator),
}

/// A configured interferometer with the δ-independent first stage already
/// applied, so that many holding times (and several δ) share it.
#[derive(Clone, Debug)]
pub struct Interferometer {
    cfg: ProtocolConfig,
    ops: OperatorSet,
    jump: Option<CMatrix>,
    rho_after_bs1: DensityMatrix,
    bs1_stats: EvolutionStats,
    second: Splitter,
}

impl Interferometer {
    pub fn new(cfg: &ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = cfg.basis();
        let ops = build_operators(basis, cfg.j, cfg.delta);
        let jump = match cfg.noise_op {
            NoiseOp::Sz => Some(ops.s_z.clone()),
            NoiseOp::SMinus => Some(ops.s_minus.clone()),
            NoiseOp::SPlus => Some(ops.s_plus.clone()),
            NoiseOp::Alpha => Some(ops.alpha()?.clone()),
            NoiseOp::None => None,
        };
        let rho0 = build_input_state(basis, cfg.input)?;
        let mut this = Self {
            cfg: *cfg,
            ops,
            jump,
            rho_after_bs1: rho0.clone(),
            bs1_stats: EvolutionStats::default(),
            second: Splitter::Exact(unitary_propagator(basis, &CMatrix::zeros(basis.dim(), basis.dim()), 0.0)?),
        };
        let (rho1, stats) = this.splitter(cfg.t_bs_first, &rho0)?;
        this.rho_after_bs1 = rho1;
        this.bs1_stats = stats;
        this.second = match this.noisy_splitters() {
            true => Splitter::Noisy(this.generator(this.ops.h_j.clone())?),
            false => Splitter::Exact(unitary_propagator(basis, &this.ops.h_j, cfg.t_bs_second)?),
        };
        Ok(this)
    }

    fn noisy_splitters(&self) -> bool {
        self.cfg.noise_placement == NoisePlacement::WholeProcess && self.jump.is_some() && self.cfg.gamma > 0.0
    }

    fn generator(&self, h: CMatrix) -> Result<LindbladGenerator> {
        let jumps = match &self.jump {
            Some(l) if self.cfg.gamma > 0.0 => vec![JumpOperator::new(l.clone(), self.cfg.gamma)],
            _ => Vec::new(),
        };
        LindbladGenerator::new(h, jumps)
    }

    fn splitter(&self, t: f64, rho: &DensityMatrix) -> Result<(DensityMatrix, EvolutionStats)> {
        if self.noisy_splitters() {
            let gen = self.generator(self.ops.h_j.clone())?;
            evolve_rk4_with_stats(&gen, rho, t, &self.cfg.integrator)
        } else {
            let p = unitary_propagator(self.basis(), &self.ops.h_j, t)?;
            Ok((apply_propagator(&p, rho)?, EvolutionStats::default()))
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn basis(&self) -> BasisSpec {
        self.ops.basis
    }

    pub fn operators(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn rho_after_bs1(&self) -> &DensityMatrix {
        &self.rho_after_bs1
    }

    /// Generator of the phase-accumulation stage for an arbitrary shift.
    pub fn hold_generator(&self, delta: f64) -> Result<LindbladGenerator> {
        self.generator(self.ops.hold_hamiltonian(delta))
    }

    /// An integrator positioned at the start of the hold, for shift `delta`.
    pub fn hold_integrator(&self, delta: f64) -> Result<Rk4Integrator> {
        Rk4Integrator::new(&self.hold_generator(delta)?, &self.rho_after_bs1, &self.cfg.integrator)
    }

    /// Applies the second beam splitter.
    pub fn recombine(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, EvolutionStats)> {
        match &self.second {
            Splitter::Exact(p) => Ok((apply_propagator(p, rho)?, EvolutionStats::default())),
            Splitter::Noisy(gen) => evolve_rk4_with_stats(gen, rho, self.cfg.t_bs_second, &self.cfg.integrator),
        }
    }

    pub fn run(&self, t_hold: f64) -> Result<ProtocolRun> {
        self.run_with_delta(self.cfg.delta, t_hold)
    }

    pub fn run_with_delta(&self, delta: f64, t_hold: f64) -> Result<ProtocolRun> {
        if !(t_hold >= 0.0 && t_hold.is_finite()) {
            return Err(Error::invalid(format!("holding time must be finite and >= 0, got {t_hold}")));
        }
        let mut integ = self.hold_integrator(delta)?;
        integ.advance_to(t_hold)?;
        let rho_after_hold = integ.state();
        let (rho_final, bs2_stats) = self.recombine(&rho_after_hold)?;
        let mut stats = self.bs1_stats;
        stats.merge(&integ.stats());
        stats.merge(&bs2_stats);
        let mut config = self.cfg;
        config.delta = delta;
        Ok(ProtocolRun {
            config,
            t_hold,
            rho_after_bs1: self.rho_after_bs1.clone(),
            rho_after_hold,
            rho_final,
            stats,
        })
    }
}

pub fn run_protocol(cfg: &ProtocolConfig, t_hold: f64) -> Result<ProtocolRun> {
    Interferometer::new(cfg)?.run(t_hold)
}
