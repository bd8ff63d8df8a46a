use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lindblad::LindbladGenerator;
use super::liouvillian::Liouvillian;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fock::BasisSpec;
use crate::linalg::min_eigenvalue;

/// Below this the state is considered unphysical and integration fails.
const POSITIVITY_FLOOR: f64 = -1e-7;
const TRACE_TOLERANCE: f64 = 1e-9;
/// Endpoint agreement required between `dt` and `dt/2` when the
/// convergence check is on.
const CONVERGENCE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Re-run every evolution with `dt/2` and fail if the endpoints disagree.
    pub convergence_check: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            convergence_check: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("integrator step must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Health counters accumulated over an evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStats {
    pub steps: usize,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl Default for EvolutionStats {
    fn default() -> Self {
        Self {
            steps: 0,
            max_trace_drift: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl EvolutionStats {
    pub fn merge(&mut self, other: &EvolutionStats) {
        self.steps += other.steps;
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }
}

/// Classical fixed-step RK4 on the sparse Liouvillian. The state can be
/// advanced repeatedly and inspected at every stop, which is how holding-time
/// sweeps reuse one trajectory for the whole grid.
#[derive(Clone, Debug)]
pub struct Rk4Integrator {
    basis: BasisSpec,
    liouvillian: Arc<Liouvillian>,
    dt: f64,
    time: f64,
    state: Vec<Complex64>,
    initial_trace: f64,
    scratch: [Vec<Complex64>; 5],
    stats: EvolutionStats,
}

impl Rk4Integrator {
    pub fn new(gen: &LindbladGenerator, rho0: &DensityMatrix, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if gen.dim() != rho0.basis().dim() {
            return Err(Error::DimensionMismatch {
                expected: gen.dim(),
                found: rho0.basis().dim(),
            });
        }
        let liouvillian = Arc::new(Liouvillian::new(gen, rho0.matrix()));
        Ok(Self::with_liouvillian(liouvillian, rho0, cfg.dt))
    }

    /// Starts from `rho0` with a prebuilt superoperator; its support must
    /// cover the nonzero entries of `rho0`.
    pub fn with_liouvillian(liouvillian: Arc<Liouvillian>, rho0: &DensityMatrix, dt: f64) -> Self {
        let state = liouvillian.gather(rho0.matrix());
        let n = state.len();
        let initial_trace = liouvillian.trace(&state);
        Self {
            basis: rho0.basis(),
            liouvillian,
            dt,
            time: 0.0,
            state,
            initial_trace,
            scratch: std::array::from_fn(|_| vec![Complex64::ZERO; n]),
            stats: EvolutionStats::default(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn stats(&self) -> EvolutionStats {
        self.stats
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.basis, self.liouvillian.scatter(&self.state))
    }

    /// `tr(ρ D)` for a diagonal operator, without densifying the state.
    pub fn diagonal_expectation(&self, diag: &[f64]) -> f64 {
        self.liouvillian.diagonal_expectation(&self.state, diag)
    }

    fn step(&mut self, h: f64) {
        let l = &self.liouvillian;
        let [k1, k2, k3, k4, tmp] = &mut self.scratch;
        let y = &mut self.state;
        l.apply(y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        l.apply(tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        l.apply(tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + k3[i] * h;
        }
        l.apply(tmp, k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        l.hermitize(y);
        self.stats.steps += 1;
    }

    /// Integrates forward to absolute time `t` (measured from the start state),
    /// shortening the last step to land on `t` exactly, then checks trace and
    /// positivity.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= self.time) {
            return Err(Error::invalid(format!(
                "cannot integrate backwards or to non-finite time ({} -> {t})",
                self.time
            )));
        }
        let start = self.time;
        let total = t - start;
        let full = (total / self.dt).floor() as usize;
        for k in 0..full {
            self.step(self.dt);
            self.time = start + (k + 1) as f64 * self.dt;
        }
        let rest = t - self.time;
        if rest > 1e-12 * self.dt.max(t) {
            self.step(rest);
        }
        self.time = t;
        self.check()
    }

    fn check(&mut self) -> Result<()> {
        let drift = (self.liouvillian.trace(&self.state) - self.initial_trace).abs();
        self.stats.max_trace_drift = self.stats.max_trace_drift.max(drift);
        if drift > TRACE_TOLERANCE {
            return Err(Error::IntegrationFailure {
                time: self.time,
                reason: format!("trace drifted by {drift:e}"),
                suggested_dt: self.dt / 2.0,
            });
        }
        let min_eig = min_eigenvalue(&self.liouvillian.scatter(&self.state));
        self.stats.min_eigenvalue = self.stats.min_eigenvalue.min(min_eig);
        if min_eig < POSITIVITY_FLOOR {
            return Err(Error::IntegrationFailure {
                time: self.time,
                reason: format!("density matrix lost positivity (min eigenvalue {min_eig:e})"),
                suggested_dt: self.dt / 2.0,
            });
        }
        Ok(())
    }
}

pub fn evolve_rk4(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix> {
    Ok(evolve_rk4_with_stats(gen, rho0, t, cfg)?.0)
}

pub fn evolve_rk4_with_stats(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(DensityMatrix, EvolutionStats)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let mut integ = Rk4Integrator::new(gen, rho0, cfg)?;
    integ.advance_to(t)?;
    let out = integ.state();
    if cfg.convergence_check && t > 0.0 {
        let mut fine = Rk4Integrator::new(gen, rho0, &IntegratorConfig { dt: cfg.dt / 2.0, convergence_check: false })?;
        fine.advance_to(t)?;
        let diff = crate::linalg::max_abs_diff(out.matrix(), fine.state().matrix());
        if diff > CONVERGENCE_TOLERANCE {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: format!("step-halving changed the result by {diff:e}"),
                suggested_dt: cfg.dt / 4.0,
            });
        }
    }
    Ok((out, integ.stats()))
}
