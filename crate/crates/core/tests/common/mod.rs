//! Helpers shared by the integration tests.
#![allow(dead_code)]

use lindey::dynamics::{evolve_rk4, IntegratorConfig, JumpOperator, LindbladGenerator};
use lindey::estimation::sensitivity;
use lindey::protocol::Interferometer;
use lindey::{build_basis, build_input_state, build_operators, BasisKind, EstimatorChoice, InputState, NoiseOp, NoisePlacement, ProtocolConfig};
use lindey::{default_config_for, run_protocol};

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = -1e-8;
pub const CRAMER_RAO_SLACK: f64 = 1e-6;
pub const SECTOR_LEAK_TOL: f64 = 1e-12;

/// One randomly drawn protocol configuration.
#[derive(Clone, Copy, Debug)]
pub struct Draw {
    pub input: InputState,
    pub n: usize,
    pub op: NoiseOp,
    pub gamma: f64,
    pub t_hold: f64,
    pub whole: bool,
}

impl Draw {
    pub fn config(&self) -> ProtocolConfig {
        let mut cfg = default_config_for(self.input, self.n).unwrap().with_noise(self.op, self.gamma);
        if self.whole {
            cfg.noise_placement = NoisePlacement::WholeProcess;
        }
        cfg
    }
}

/// Maps raw numbers in `[0, 1)` (and small integers) onto a valid draw with
/// N <= 10, gamma <= 0.2, T_H <= 20.
pub fn draw_from(input_ix: usize, n_raw: usize, op_ix: usize, g: f64, t: f64, whole: bool) -> Draw {
    let input = [InputState::N0, InputState::TwinFock, InputState::Noon][input_ix % 3];
    let mut n = 1 + n_raw % 10;
    if input == InputState::TwinFock && n % 2 == 1 {
        n += 1;
    }
    let op = [NoiseOp::Sz, NoiseOp::SMinus, NoiseOp::SPlus, NoiseOp::Alpha][op_ix % 4];
    Draw {
        input,
        n,
        op,
        gamma: 0.2 * g,
        t_hold: 0.05 + 19.95 * t,
        whole,
    }
}

/// Checks every physics invariant on one configuration; returns a
/// description of the first violation.
pub fn check_invariants(d: &Draw) -> Result<(), String> {
    let cfg = d.config();
    let run = run_protocol(&cfg, d.t_hold).map_err(|e| format!("{d:?}: {e}"))?;
    for (stage, rho) in [("hold", &run.rho_after_hold), ("final", &run.rho_final)] {
        let drift = (rho.trace().re - 1.0).abs();
        if drift > TRACE_TOL {
            return Err(format!("{d:?}: trace drift {drift:e} after {stage}"));
        }
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(format!("{d:?}: hermiticity error {herm:e} after {stage}"));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < POSITIVITY_TOL {
            return Err(format!("{d:?}: min eigenvalue {min_eig:e} after {stage}"));
        }
    }
    if run.stats.max_trace_drift > TRACE_TOL {
        return Err(format!("{d:?}: integrator trace drift {:e}", run.stats.max_trace_drift));
    }

    let p = sensitivity(&cfg, d.t_hold, EstimatorChoice::default_for(d.input), None).map_err(|e| format!("{d:?}: {e}"))?;
    if !p.divergent && p.sensitivity.is_finite() && p.sensitivity < p.crlb - CRAMER_RAO_SLACK {
        return Err(format!("{d:?}: sensitivity {} below CRLB {}", p.sensitivity, p.crlb));
    }

    if d.op == NoiseOp::Alpha {
        check_number_decay(&cfg, d.t_hold)?;
    } else {
        check_sector_confinement(d)?;
    }
    Ok(())
}

/// `<n_total>` never increases during a lossy hold.
pub fn check_number_decay(cfg: &ProtocolConfig, t_hold: f64) -> Result<(), String> {
    let ifm = Interferometer::new(cfg).map_err(|e| e.to_string())?;
    let diag: Vec<f64> = ifm.basis().states().map(|s| s.total() as f64).collect();
    let mut integ = ifm.hold_integrator(cfg.delta).map_err(|e| e.to_string())?;
    let mut last = integ.diagonal_expectation(&diag);
    for k in 1..=10 {
        integ.advance_to(t_hold * k as f64 / 10.0).map_err(|e| e.to_string())?;
        let now = integ.diagonal_expectation(&diag);
        if now > last + 1e-12 {
            return Err(format!("<n_total> rose from {last} to {now} at t = {}", integ.time()));
        }
        last = now;
    }
    Ok(())
}

/// A number-conserving jump operator evolved in the truncated basis keeps
/// all population in the initial sector.
pub fn check_sector_confinement(d: &Draw) -> Result<(), String> {
    let basis = build_basis(BasisKind::Truncated, d.n).map_err(|e| e.to_string())?;
    let ops = build_operators(basis, 1.0, 0.5);
    let l = match d.op {
        NoiseOp::Sz => ops.s_z.clone(),
        NoiseOp::SMinus => ops.s_minus.clone(),
        NoiseOp::SPlus => ops.s_plus.clone(),
        _ => return Ok(()),
    };
    let gen = LindbladGenerator::new(&ops.h_delta + &ops.h_j, vec![JumpOperator::new(l, d.gamma)]).map_err(|e| e.to_string())?;
    let rho0 = build_input_state(basis, d.input).map_err(|e| e.to_string())?;
    let t = d.t_hold.min(3.0);
    let rho = evolve_rk4(&gen, &rho0, t, &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let leak = 1.0 - rho.sector_population(d.n);
    if leak.abs() > SECTOR_LEAK_TOL {
        return Err(format!("{d:?}: {leak:e} of the population left the N = {} sector", d.n));
    }
    Ok(())
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}
