//! Observable statistics, error-propagation phase sensitivity and the
//! quantum Cramér-Rao bound.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::dynamics::{EvolutionStats, Rk4Integrator};
use crate::error::{Error, Result};
use crate::fock::{BasisSpec, InputState};
use crate::linalg::{hermitian_eigen, re, submatrix, support_components, CMatrix};
use crate::protocol::{Interferometer, ProtocolConfig};

/// `|∂⟨O⟩/∂δ|` below this marks an insensitivity point.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-9;
/// Pairs of eigenvalues summing to less than this are outside the support.
pub const QFI_SUPPORT_CUTOFF: f64 = 1e-10;
const VARIANCE_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorChoice {
    /// `n_b - n_a`
    Imbalance,
    /// `(-1)^{n_b}`
    ParityB,
}

impl EstimatorChoice {
    pub fn key(&self) -> &'static str {
        match self {
            EstimatorChoice::Imbalance => "imbalance",
            EstimatorChoice::ParityB => "parity",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key.to_ascii_lowercase().as_str() {
            "imbalance" => Some(EstimatorChoice::Imbalance),
            "parity" => Some(EstimatorChoice::ParityB),
            _ => None,
        }
    }

    /// Imbalance for `|N,0⟩`, parity for the balanced inputs where the
    /// imbalance carries no phase information.
    pub fn default_for(input: InputState) -> Self {
        match input {
            InputState::N0 => EstimatorChoice::Imbalance,
            InputState::TwinFock | InputState::Noon => EstimatorChoice::ParityB,
        }
    }

    /// Both estimators are diagonal in the Fock basis; this is that diagonal.
    pub fn diagonal(&self, basis: BasisSpec) -> Vec<f64> {
        basis
            .states()
            .map(|s| match self {
                EstimatorChoice::Imbalance => s.n_b as f64 - s.n_a as f64,
                EstimatorChoice::ParityB => {
                    if s.n_b % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect()
    }

    pub fn matrix(&self, basis: BasisSpec) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            basis.dim(),
            self.diagonal(basis).into_iter().map(re),
        ))
    }
}

impl fmt::Display for EstimatorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

fn clip_variance(variance: f64) -> Result<f64> {
    if variance < VARIANCE_FLOOR {
        return Err(Error::invariant(
            "non-negative variance",
            format!("variance {variance:e} below {VARIANCE_FLOOR:e}"),
        ));
    }
    Ok(variance.max(0.0))
}

/// `(⟨O⟩, ⟨O²⟩ - ⟨O⟩²)` for a Hermitian observable.
pub fn moments_of(rho: &DensityMatrix, op: &CMatrix) -> Result<(f64, f64)> {
    let mean = rho.expectation(op)?;
    if mean.im.abs() > 1e-10 {
        return Err(Error::invariant(
            "real expectation value",
            format!("⟨O⟩ has imaginary part {:e}", mean.im),
        ));
    }
    let second = rho.expectation(&(op * op))?.re;
    Ok((mean.re, clip_variance(second - mean.re * mean.re)?))
}

pub fn moments(rho: &DensityMatrix, o: EstimatorChoice) -> Result<(f64, f64)> {
    let diag = o.diagonal(rho.basis());
    let m = rho.matrix();
    let (mut mean, mut second) = (0.0, 0.0);
    for (i, v) in diag.iter().enumerate() {
        let p = m[(i, i)].re;
        mean += p * v;
        second += p * v * v;
    }
    Ok((mean, clip_variance(second - mean * mean)?))
}

/// SLD quantum Fisher information of the family `ρ(δ)` given `ρ` and `∂ρ/∂δ`.
///
/// The eigenproblem is solved separately on each connected block of the joint
/// sparsity pattern.
pub fn quantum_fisher_information(rho: &CMatrix, drho: &CMatrix) -> f64 {
    let mut total = 0.0;
    for comp in support_components(&[rho, drho]) {
        let (vals, vecs) = hermitian_eigen(&submatrix(rho, &comp));
        let x = vecs.adjoint() * submatrix(drho, &comp) * &vecs;
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                let s = vals[i] + vals[j];
                if s > QFI_SUPPORT_CUTOFF {
                    total += 2.0 * x[(i, j)].norm_sqr() / s;
                }
            }
        }
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub t_hold: f64,
    pub mean: f64,
    pub variance: f64,
    pub dmean_ddelta: f64,
    /// `+∞` at divergent points.
    pub sensitivity: f64,
    pub qfi: f64,
    pub crlb: f64,
    pub divergent: bool,
}

impl SensitivityPoint {
    fn assemble(t_hold: f64, mean: f64, variance: f64, dmean_ddelta: f64, qfi: f64) -> Self {
        let divergent = dmean_ddelta.abs() < DIVERGENCE_THRESHOLD;
        let sensitivity = if divergent {
            f64::INFINITY
        } else {
            variance.sqrt() / dmean_ddelta.abs()
        };
        let crlb = if qfi > 0.0 { 1.0 / qfi.sqrt() } else { f64::INFINITY };
        Self {
            t_hold,
            mean,
            variance,
            dmean_ddelta,
            sensitivity,
            qfi: qfi.max(0.0),
            crlb,
            divergent,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFailure {
    pub t_hold: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub config: ProtocolConfig,
    pub estimator: EstimatorChoice,
    pub fd_step: f64,
    pub points: Vec<SensitivityPoint>,
    pub failures: Vec<PointFailure>,
    pub stats: EvolutionStats,
}

impl SensitivityCurve {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_hold).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn default_fd_step(delta: f64) -> f64 {
    1e-5 * delta.abs().max(1.0)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("holding-time grid is empty"));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("holding times must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("holding-time grid must be strictly increasing"));
    }
    Ok(())
}

/// Final states at `δ`, `δ + h`, `δ - h`.
type Triple = [DensityMatrix; 3];

struct Trajectories<'a> {
    ifm: &'a Interferometer,
    hold: Vec<Rk4Integrator>,
    stats: EvolutionStats,
}

impl<'a> Trajectories<'a> {
    fn new(ifm: &'a Interferometer, h: f64) -> Result<Self> {
        let d = ifm.config().delta;
        let hold = [d, d + h, d - h]
            .iter()
            .map(|&x| ifm.hold_integrator(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ifm,
            hold,
            stats: EvolutionStats::default(),
        })
    }

    fn advance(&mut self, t: f64) -> Result<Triple> {
        let ifm = self.ifm;
        let out: Vec<Result<(DensityMatrix, EvolutionStats)>> = self
            .hold
            .par_iter_mut()
            .map(|integ| {
                integ.advance_to(t)?;
                ifm.recombine(&integ.state())
            })
            .collect();
        let mut finals = Vec::with_capacity(3);
        for r in out {
            let (rho, st) = r?;
            self.stats.merge(&st);
            finals.push(rho);
        }
        for integ in &self.hold {
            let st = integ.stats();
            self.stats.max_trace_drift = self.stats.max_trace_drift.max(st.max_trace_drift);
            self.stats.min_eigenvalue = self.stats.min_eigenvalue.min(st.min_eigenvalue);
        }
        Ok(finals.try_into().expect("three trajectories"))
    }

    fn total_stats(&self) -> EvolutionStats {
        let mut s = self.stats;
        s.steps += self.hold.iter().map(|i| i.stats().steps).sum::<usize>();
        s
    }
}

fn point_from(t: f64, finals: &Triple, o: EstimatorChoice, h: f64) -> Result<SensitivityPoint> {
    let [rho, plus, minus] = finals;
    let (mean, variance) = moments(rho, o)?;
    let (mp, _) = moments(plus, o)?;
    let (mm, _) = moments(minus, o)?;
    let dmean = (mp - mm) / (2.0 * h);
    let drho = (plus.matrix() - minus.matrix()) * re(1.0 / (2.0 * h));
    let qfi = quantum_fisher_information(rho.matrix(), &drho);
    Ok(SensitivityPoint::assemble(t, mean, variance, dmean, qfi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    /// Finite-difference step in δ; `None` uses [`default_fd_step`].
    pub fd_step: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { fd_step: None }
    }
}

/// Sensitivity along a holding-time grid. Each of the three δ-trajectories is
/// integrated once through the whole grid; failures are recorded per point.
pub fn sweep_sensitivity(cfg: &ProtocolConfig, grid: &[f64], o: EstimatorChoice) -> Result<SensitivityCurve> {
    sweep_sensitivity_with(cfg, grid, o, &SweepOptions::default())
}

pub fn sweep_sensitivity_with(
    cfg: &ProtocolConfig,
    grid: &[f64],
    o: EstimatorChoice,
    opts: &SweepOptions,
) -> Result<SensitivityCurve> {
    check_grid(grid)?;
    let h = opts.fd_step.unwrap_or_else(|| default_fd_step(cfg.delta));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let ifm = Interferometer::new(cfg)?;
    let mut traj = Trajectories::new(&ifm, h)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for &t in grid {
        match traj.advance(t).and_then(|f| point_from(t, &f, o, h)) {
            Ok(p) => points.push(p),
            Err(e) => failures.push(PointFailure {
                t_hold: t,
                reason: e.to_string(),
            }),
        }
    }
    Ok(SensitivityCurve {
        config: *cfg,
        estimator: o,
        fd_step: h,
        points,
        failures,
        stats: traj.total_stats(),
    })
}

fn single_point(cfg: &ProtocolConfig, t_hold: f64, o: EstimatorChoice, fd_step: Option<f64>) -> Result<SensitivityPoint> {
    let curve = sweep_sensitivity_with(cfg, &[t_hold], o, &SweepOptions { fd_step })?;
    if let Some(f) = curve.failures.first() {
        return Err(Error::IntegrationFailure {
            time: f.t_hold,
            reason: f.reason.clone(),
            suggested_dt: cfg.integrator.dt / 2.0,
        });
    }
    Ok(curve.points[0])
}

/// Error-propagation sensitivity at one holding time.
pub fn sensitivity(cfg: &ProtocolConfig, t_hold: f64, o: EstimatorChoice, fd_step: Option<f64>) -> Result<SensitivityPoint> {
    single_point(cfg, t_hold, o, fd_step)
}

/// Quantum Fisher information of the final state with respect to δ.
pub fn qfi_of(cfg: &ProtocolConfig, t_hold: f64, fd_step: Option<f64>) -> Result<f64> {
    Ok(single_point(cfg, t_hold, EstimatorChoice::Imbalance, fd_step)?.qfi)
}
