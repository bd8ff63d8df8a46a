//! Insensitivity points and the experiments built on them.
//!
//! An insensitivity point is a holding time where `∂⟨O⟩/∂δ` vanishes while
//! the readout still fluctuates, so the error-propagation sensitivity blows
//! up. Points where the slope and the variance vanish together (the noiseless
//! `|N,0⟩` interferometer at `T_H δ = 2πn`, for example) have a finite limit
//! and are reported separately as removable.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{sensitivity, sweep_sensitivity, EstimatorChoice, SensitivityCurve, DIVERGENCE_THRESHOLD};
use crate::fock::InputState;
use crate::protocol::{default_config_for, NoiseOp, ProtocolConfig};

/// Tunable parts of the detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionSettings {
    /// A grid-level local minimum of `|slope|` below this fraction of the
    /// median `|slope|` is examined as a touching zero.
    pub touch_rel: f64,
    /// A refined touching zero must get below this fraction of the median.
    pub denom_rel: f64,
    /// A zero is genuine when the variance there exceeds this fraction of
    /// the median variance.
    pub variance_rel: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        Self {
            touch_rel: 1e-2,
            denom_rel: 1e-4,
            variance_rel: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionMethod {
    pub grid_step: f64,
    /// Location accuracy, one eighth of the grid step.
    pub accuracy: f64,
    pub settings: DetectionSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaInvariance {
    pub gammas: Vec<f64>,
    pub locations: Vec<Vec<f64>>,
    pub invariant: bool,
    pub max_shift: f64,
    pub tolerance: f64,
    /// Why the sets differ, when they do.
    pub diff: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsensitivityReport {
    pub locations: Vec<f64>,
    /// Zeros of the slope where the variance also vanishes.
    pub removable: Vec<f64>,
    /// Stretches of holding time where the slope stays below the divergence
    /// threshold, so no zero can be located there (the signal has decayed).
    #[serde(default)]
    pub unresolved: Vec<(f64, f64)>,
    /// Mean number of locations per window of length π.
    pub per_period_count: Option<f64>,
    pub periods_counted: usize,
    pub t_range: (f64, f64),
    pub gamma_invariant: Option<GammaInvariance>,
    pub method: DetectionMethod,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Cubic Lagrange interpolation of `ys(ts)` at `t`, through the four grid
/// points surrounding interval `i` (`ts[i] <= t <= ts[i+1]`).
pub fn cubic_interpolate(ts: &[f64], ys: &[f64], i: usize, t: f64) -> f64 {
    let n = ts.len();
    if n < 4 {
        let j = i.min(n.saturating_sub(2));
        if n < 2 {
            return ys[0];
        }
        let w = (t - ts[j]) / (ts[j + 1] - ts[j]);
        return ys[j] * (1.0 - w) + ys[j + 1] * w;
    }
    let start = i.saturating_sub(1).min(n - 4);
    let idx = start..start + 4;
    let mut acc = 0.0;
    for a in idx.clone() {
        let mut w = 1.0;
        for b in idx.clone() {
            if a != b {
                w *= (t - ts[b]) / (ts[a] - ts[b]);
            }
        }
        acc += w * ys[a];
    }
    acc
}

/// Root of `f` on `[a, b]` given a sign change, to within `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Minimiser of a unimodal `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Windows `(kπ, (k+1)π]` for the full periods inside `[lo, hi]`, shifted
/// right by `slack` so that points sitting on a multiple of π are counted
/// consistently.
pub fn per_period_density(
    locations: &[f64],
    lo: f64,
    hi: f64,
    slack: f64,
    unresolved: &[(f64, f64)],
) -> (Option<f64>, usize) {
    let first = (lo / PI).ceil().max(1.0) as usize;
    let mut counts = Vec::new();
    let mut k = first;
    while (k + 1) as f64 * PI + slack <= hi {
        let (a, b) = (k as f64 * PI + slack, (k + 1) as f64 * PI + slack);
        if !unresolved.iter().any(|&(u, v)| u < b && v > a) {
            counts.push(locations.iter().filter(|&&t| t > a && t <= b).count());
        }
        k += 1;
    }
    if counts.is_empty() {
        (None, 0)
    } else {
        (Some(counts.iter().sum::<usize>() as f64 / counts.len() as f64), counts.len())
    }
}

/// Locates insensitivity points on a sampled curve.
///
/// Sign changes of the slope are refined by bisection on the cubic
/// interpolant; grid minima of `|slope|` without a sign change are refined by
/// golden-section search. A refined zero counts when the interpolated
/// variance there is not negligible.
pub fn find_insensitivity_points(curve: &SensitivityCurve, settings: &DetectionSettings) -> Result<InsensitivityReport> {
    let pts = &curve.points;
    if pts.len() < 2 {
        return Err(Error::invalid("need at least two curve points to locate insensitivity points"));
    }
    let ts: Vec<f64> = pts.iter().map(|p| p.t_hold).collect();
    let ds: Vec<f64> = pts.iter().map(|p| p.dmean_ddelta).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.variance).collect();
    let step = ts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let accuracy = step / 8.0;
    let tol = step * 1e-10;
    let d_med = median(ds.iter().map(|d| d.abs()).collect());
    let v_med = median(vs.clone());

    let lost = |i: usize| ds[i].abs() < DIVERGENCE_THRESHOLD && ds[i + 1].abs() < DIVERGENCE_THRESHOLD;
    let mut unresolved: Vec<(f64, f64)> = Vec::new();
    for i in (0..ts.len() - 1).filter(|&i| lost(i)) {
        match unresolved.last_mut() {
            Some(last) if last.1 == ts[i] => last.1 = ts[i + 1],
            _ => unresolved.push((ts[i], ts[i + 1])),
        }
    }

    let mut zeros: Vec<(usize, f64)> = Vec::new();
    for i in 0..ts.len() - 1 {
        if lost(i) {
            continue;
        }
        if ds[i] == 0.0 {
            zeros.push((i, ts[i]));
        } else if ds[i] * ds[i + 1] < 0.0 {
            let f = |t: f64| cubic_interpolate(&ts, &ds, i, t);
            zeros.push((i, bisect(f, ts[i], ts[i + 1], tol)));
        }
    }
    if *ds.last().expect("non-empty") == 0.0 && !lost(ts.len() - 2) {
        zeros.push((ts.len() - 2, ts[ts.len() - 1]));
    }
    for i in 1..ts.len() - 1 {
        let a = ds[i].abs();
        let touching = a < ds[i - 1].abs() && a <= ds[i + 1].abs() && ds[i - 1] * ds[i + 1] > 0.0 && ds[i] * ds[i - 1] > 0.0;
        if touching && !lost(i - 1) && !lost(i) && a < settings.touch_rel * d_med {
            let seg = if ds[i - 1].abs() < ds[i + 1].abs() { i - 1 } else { i };
            let f = |t: f64| cubic_interpolate(&ts, &ds, if t < ts[i] { i - 1 } else { i }, t).abs();
            let t = golden_section(f, ts[i - 1], ts[i + 1], tol);
            if f(t) < settings.denom_rel * d_med {
                zeros.push((seg, t));
            }
        }
    }
    zeros.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut locations = Vec::new();
    let mut removable = Vec::new();
    for (i, t) in zeros {
        let var = cubic_interpolate(&ts, &vs, i, t);
        if var > settings.variance_rel * v_med {
            locations.push(t);
        } else {
            removable.push(t);
        }
    }
    for w in locations.windows(2) {
        if w[1] - w[0] < 3.0 * step {
            return Err(Error::ResolutionFailure {
                separation: w[1] - w[0],
                suggested_step: (w[1] - w[0]) / 6.0,
            });
        }
    }
    let (lo, hi) = (ts[0], ts[ts.len() - 1]);
    let (per_period_count, periods_counted) = per_period_density(&locations, lo, hi, 4.0 * accuracy, &unresolved);
    Ok(InsensitivityReport {
        locations,
        removable,
        unresolved,
        per_period_count,
        periods_counted,
        t_range: (lo, hi),
        gamma_invariant: None,
        method: DetectionMethod {
            grid_step: step,
            accuracy,
            settings: *settings,
        },
    })
}

/// `lo, lo + step, …` up to and including `hi` (within rounding).
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Finest grid step the adaptive detector will fall back to.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-3;

/// Sweeps and detects in one go. When two insensitivity points are too close
/// for the grid, the sweep is repeated on a uniform grid over the same range
/// with the suggested step, down to [`MIN_ADAPTIVE_STEP`].
pub fn detect(cfg: &ProtocolConfig, grid: &[f64], o: EstimatorChoice) -> Result<(SensitivityCurve, InsensitivityReport)> {
    let mut grid = grid.to_vec();
    loop {
        let curve = sweep_sensitivity(cfg, &grid, o)?;
        if let Some(f) = curve.failures.first() {
            return Err(Error::IntegrationFailure {
                time: f.t_hold,
                reason: f.reason.clone(),
                suggested_dt: cfg.integrator.dt / 2.0,
            });
        }
        match find_insensitivity_points(&curve, &DetectionSettings::default()) {
            Ok(report) => return Ok((curve, report)),
            Err(Error::ResolutionFailure { suggested_step, .. }) if grid.len() >= 2 => {
                let step = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                if step <= MIN_ADAPTIVE_STEP * (1.0 + 1e-9) {
                    return find_insensitivity_points(&curve, &DetectionSettings::default()).map(|r| (curve, r));
                }
                let finer = suggested_step.min(step / 2.0).max(MIN_ADAPTIVE_STEP);
                grid = uniform_grid(grid[0], grid[grid.len() - 1], finer);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Compares location sets pairwise; returns `(invariant, max_shift, diff)`.
pub fn compare_location_sets(sets: &[Vec<f64>], tolerance: f64) -> (bool, f64, Option<String>) {
    let mut max_shift: f64 = 0.0;
    for (k, s) in sets.iter().enumerate().skip(1) {
        if s.len() != sets[0].len() {
            return (
                false,
                f64::INFINITY,
                Some(format!(
                    "set {k} has {} locations, set 0 has {}",
                    s.len(),
                    sets[0].len()
                )),
            );
        }
        for (a, b) in sets[0].iter().zip(s) {
            max_shift = max_shift.max((a - b).abs());
        }
    }
    let ok = max_shift <= tolerance;
    let diff = (!ok).then(|| format!("largest location shift {max_shift:.3e} exceeds {tolerance:.3e}"));
    (ok, max_shift, diff)
}

/// Detects insensitivity points for each noise rate and checks that their
/// positions agree within twice the location accuracy.
pub fn check_gamma_invariance(
    cfg_base: &ProtocolConfig,
    gammas: &[f64],
    grid: &[f64],
    o: EstimatorChoice,
) -> Result<GammaInvariance> {
    let mut distinct: Vec<f64> = gammas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 || distinct.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::invalid("need at least two distinct positive noise rates to compare"));
    }
    let reports = gammas
        .par_iter()
        .map(|&g| {
            let mut cfg = *cfg_base;
            cfg.gamma = g;
            detect(&cfg, grid, o).map(|(_, r)| r)
        })
        .collect::<Result<Vec<_>>>()?;
    let tolerance = 2.0 * reports.iter().map(|r| r.method.accuracy).fold(0.0, f64::max);
    // Only compare where every rate still resolves the slope.
    let margin = reports.iter().map(|r| r.method.grid_step).fold(0.0, f64::max);
    let blind: Vec<(f64, f64)> = reports.iter().flat_map(|r| r.unresolved.iter().copied()).collect();
    let locations: Vec<Vec<f64>> = reports
        .into_iter()
        .map(|r| {
            r.locations
                .into_iter()
                .filter(|&t| !blind.iter().any(|&(u, v)| t > u - margin && t < v + margin))
                .collect()
        })
        .collect();
    let (invariant, max_shift, diff) = compare_location_sets(&locations, tolerance);
    Ok(GammaInvariance {
        gammas: gammas.to_vec(),
        locations,
        invariant,
        max_shift,
        tolerance,
        diff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub noiseless_per_pi: Option<f64>,
    pub noiseless_locations: Vec<f64>,
    /// `(γ, per-π count, locations)` for each noisy run.
    pub noisy: Vec<(f64, Option<f64>, Vec<f64>)>,
}

/// Insensitivity-point density per π for each particle number, without noise
/// and for each `(noise_op, γ)`.
pub fn count_density_vs_n(
    input: InputState,
    n_list: &[usize],
    noise_op: NoiseOp,
    gammas: &[f64],
    grid: &[f64],
) -> Result<Vec<DensityRow>> {
    for &n in n_list {
        default_config_for(input, n)?;
    }
    let o = |n: usize| estimator_for(input, n);
    let jobs: Vec<(usize, Option<f64>)> = n_list
        .iter()
        .flat_map(|&n| std::iter::once((n, None)).chain(gammas.iter().map(move |&g| (n, Some(g)))))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, g)| {
            let base = default_config_for(input, n)?;
            let cfg = match g {
                Some(g) => base.with_noise(noise_op, g),
                None => base,
            };
            detect(&cfg, grid, o(n)).map(|(_, r)| r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<DensityRow> = Vec::new();
    for ((n, g), r) in jobs.into_iter().zip(results) {
        match g {
            None => rows.push(DensityRow {
                n,
                noiseless_per_pi: r.per_period_count,
                noiseless_locations: r.locations,
                noisy: Vec::new(),
            }),
            Some(g) => rows
                .last_mut()
                .expect("noiseless row precedes noisy ones")
                .noisy
                .push((g, r.per_period_count, r.locations)),
        }
    }
    Ok(rows)
}

/// Estimator used throughout the experiments: imbalance for `|N,0⟩`, parity
/// otherwise. For a single particle the two coincide up to sign.
pub fn estimator_for(input: InputState, _n: usize) -> EstimatorChoice {
    EstimatorChoice::default_for(input)
}

/// First local minimum of the sensitivity at or after `t_from`, refined on
/// the interpolated curve.
pub fn first_minimum_after(curve: &SensitivityCurve, t_from: f64) -> Option<f64> {
    let pts = &curve.points;
    let ts: Vec<f64> = pts.iter().map(|p| p.t_hold).collect();
    let ss: Vec<f64> = pts.iter().map(|p| p.sensitivity).collect();
    let step = ts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    for i in 1..ts.len().saturating_sub(1) {
        if !(ss[i - 1].is_finite() && ss[i].is_finite() && ss[i + 1].is_finite()) {
            continue;
        }
        if ss[i] <= ss[i - 1] && ss[i] < ss[i + 1] && ts[i + 1] >= t_from {
            let lo = ts[i - 1].max(t_from);
            let f = |t: f64| cubic_interpolate(&ts, &ss, if t < ts[i] { i - 1 } else { i }, t);
            let t = golden_section(f, lo, ts[i + 1], step * 1e-4);
            if t >= t_from {
                return Some(t);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub t_min: f64,
    pub sensitivity_at_min: f64,
    pub crlb_at_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub input: InputState,
    pub noise_op: NoiseOp,
    pub gamma: f64,
    pub per_n: Vec<ScalingRow>,
}

/// Sensitivity and CRLB at the first minimum after π, for each N.
pub fn scaling_experiment(
    input: InputState,
    n_list: &[usize],
    noise_op: NoiseOp,
    gamma: f64,
    delta: f64,
    grid: &[f64],
) -> Result<ScalingResult> {
    let per_n = n_list
        .par_iter()
        .map(|&n| {
            let cfg = default_config_for(input, n)?.with_noise(noise_op, gamma).with_delta(delta);
            let o = estimator_for(input, n);
            let curve = sweep_sensitivity(&cfg, grid, o)?;
            let t_min = first_minimum_after(&curve, PI).ok_or_else(|| {
                Error::invalid(format!("no sensitivity minimum after pi on the grid for N = {n}"))
            })?;
            let p = sensitivity(&cfg, t_min, o, None)?;
            Ok(ScalingRow {
                n,
                t_min,
                sensitivity_at_min: p.sensitivity,
                crlb_at_min: p.crlb,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingResult {
        input,
        noise_op,
        gamma,
        per_n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverTable {
    pub gamma: f64,
    pub delta: f64,
    pub conserving: ScalingResult,
    pub loss: ScalingResult,
}

impl CrossoverTable {
    /// Particle numbers at which the loss channel's measured sensitivity
    /// overtakes the conserving one (sign change of the difference).
    pub fn sensitivity_crossings(&self) -> Vec<usize> {
        let diffs: Vec<(usize, f64)> = self
            .conserving
            .per_n
            .iter()
            .zip(&self.loss.per_n)
            .map(|(c, l)| (c.n, l.sensitivity_at_min - c.sensitivity_at_min))
            .collect();
        diffs
            .windows(2)
            .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
            .map(|w| w[1].0)
            .collect()
    }
}

/// Twin-Fock input with parity readout under `S_+` versus particle loss.
pub fn crossover_experiment(n_list: &[usize], gamma: f64, delta: f64, grid: &[f64]) -> Result<CrossoverTable> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("the crossover experiment needs a positive noise rate"));
    }
    let (conserving, loss) = rayon::join(
        || scaling_experiment(InputState::TwinFock, n_list, NoiseOp::SPlus, gamma, delta, grid),
        || scaling_experiment(InputState::TwinFock, n_list, NoiseOp::Alpha, gamma, delta, grid),
    );
    Ok(CrossoverTable {
        gamma,
        delta,
        conserving: conserving?,
        loss: loss?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoonLatticeRow {
    pub n: usize,
    pub delta: f64,
    pub first_location: Option<f64>,
    pub spacing: Option<f64>,
}

/// First insensitivity point and mean spacing for NOON inputs at several
/// energy shifts. Records what the numerics give; no law is assumed.
pub fn noon_lattice_vs_delta(n_list: &[usize], deltas: &[f64], gamma: f64, grid: &[f64]) -> Result<Vec<NoonLatticeRow>> {
    let jobs: Vec<(usize, f64)> = n_list.iter().flat_map(|&n| deltas.iter().map(move |&d| (n, d))).collect();
    jobs.par_iter()
        .map(|&(n, d)| {
            let cfg = default_config_for(InputState::Noon, n)?.with_noise(NoiseOp::Sz, gamma).with_delta(d);
            let (_, r) = detect(&cfg, grid, EstimatorChoice::ParityB)?;
            let spacing = (r.locations.len() >= 2).then(|| {
                (r.locations[r.locations.len() - 1] - r.locations[0]) / (r.locations.len() - 1) as f64
            });
            Ok(NoonLatticeRow {
                n,
                delta: d,
                first_location: r.locations.first().copied(),
                spacing,
            })
        })
        .collect()
}
