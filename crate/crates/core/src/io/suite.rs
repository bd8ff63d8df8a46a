//! Built-in experiments: each selector runs a pipeline and writes its files.

use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{format_number, Experiment, GridSpec, OutputFormat, RunConfig};
use super::output::{curve_csv, curve_json, curve_label, panel_csv, panel_json, table_csv, write_file, RunManifest};
use super::svg::{Plot, Series};
use crate::analysis::{
    check_gamma_invariance, count_density_vs_n, crossover_experiment, find_insensitivity_points, noon_lattice_vs_delta,
    scaling_experiment, DetectionSettings, ScalingResult,
};
use crate::error::{Error, Result};
use crate::estimation::{sweep_sensitivity, EstimatorChoice, SensitivityCurve};
use crate::fock::InputState;
use crate::oracles::{analytic_insensitivity_times, analytic_sensitivity, AnalyticCase};
use crate::protocol::{default_config_for, NoiseOp, NoisePlacement, ProtocolConfig};

pub const DEFAULT_GAMMAS: [f64; 4] = [0.01, 0.03, 0.05, 0.1];
pub const INVARIANCE_GAMMAS: [f64; 3] = [0.01, 0.05, 0.1];
const ORACLE_REL_TOL: f64 = 1e-5;
const ORACLE_EXCLUSION: f64 = 0.05;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: SuiteOutcome,
}

/// Turns per-point integration failures into an invariant violation that
/// names what broke.
pub fn ensure_clean(curve: &SensitivityCurve) -> Result<()> {
    if let Some(f) = curve.failures.first() {
        let invariant = if f.reason.contains("trace") {
            "trace-preservation"
        } else if f.reason.contains("positivity") {
            "positivity"
        } else if f.reason.contains("step-halving") {
            "step-convergence"
        } else {
            "integration"
        };
        return Err(Error::invariant(invariant, format!("at t_hold = {}: {}", f.t_hold, f.reason)));
    }
    Ok(())
}

/// Compares a simulated curve with the closed-form sensitivity, skipping
/// points close to the analytic insensitivity lattice.
pub fn check_against_oracle(curve: &SensitivityCurve) -> Result<Option<f64>> {
    let cfg = &curve.config;
    if !is_reference_setup(cfg, curve.estimator) {
        return Ok(None);
    }
    let noise = if cfg.noise_op == NoiseOp::None { NoiseOp::Sz } else { cfg.noise_op };
    let gamma = if cfg.noise_op == NoiseOp::None { 0.0 } else { cfg.gamma };
    let Ok(case) = AnalyticCase::new(cfg.n, cfg.input, noise) else {
        return Ok(None);
    };
    let lattice = analytic_insensitivity_times(&case, cfg.delta)?;
    let mut worst: f64 = 0.0;
    for p in &curve.points {
        if lattice.distance(p.t_hold) < ORACLE_EXCLUSION || p.divergent {
            continue;
        }
        let exact = analytic_sensitivity(&case, gamma, cfg.delta, p.t_hold)?;
        if !exact.is_finite() {
            continue;
        }
        let rel = (p.sensitivity - exact).abs() / exact.abs();
        worst = worst.max(rel);
        if rel > ORACLE_REL_TOL {
            return Err(Error::invariant(
                "oracle-agreement",
                format!(
                    "{} at t_hold = {}: simulated {} vs closed form {} (relative {rel:e})",
                    curve_label(cfg, curve.estimator),
                    p.t_hold,
                    p.sensitivity,
                    exact
                ),
            ));
        }
    }
    Ok(Some(worst))
}

/// True when the configuration is the one the closed forms describe.
fn is_reference_setup(cfg: &ProtocolConfig, o: EstimatorChoice) -> bool {
    let Ok(d) = default_config_for(cfg.input, cfg.n) else { return false };
    cfg.noise_placement == NoisePlacement::HoldOnly
        && o == EstimatorChoice::default_for(cfg.input)
        && cfg.t_bs_first == d.t_bs_first
        && cfg.t_bs_second == d.t_bs_second
        && cfg.j == d.j
}

impl<'a> Ctx<'a> {
    fn delta(&self) -> f64 {
        if self.cfg.is_set("delta") { self.cfg.protocol.delta } else { 0.5 }
    }

    fn gammas(&self, default: &[f64]) -> Vec<f64> {
        self.cfg.gammas.clone().unwrap_or_else(|| default.to_vec())
    }

    fn n_list(&self, default: &[usize]) -> Vec<usize> {
        self.cfg.n_list.clone().unwrap_or_else(|| default.to_vec())
    }

    fn grid(&self) -> GridSpec {
        self.cfg.grid
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.cfg.formats.contains(&f)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.cfg.out_dir.join(name);
        write_file(&path, contents)?;
        self.out.files.push(path);
        Ok(())
    }

    fn base(&self, input: InputState, n: usize) -> Result<ProtocolConfig> {
        let mut p = default_config_for(input, n)?.with_delta(self.delta());
        p.integrator = self.cfg.protocol.integrator;
        Ok(p)
    }

    fn sweep_all(&self, cfgs: &[(String, ProtocolConfig)]) -> Result<Vec<(String, SensitivityCurve)>> {
        let grid = self.grid().points();
        cfgs.par_iter()
            .map(|(label, c)| {
                let curve = sweep_sensitivity(c, &grid, EstimatorChoice::default_for(c.input))?;
                ensure_clean(&curve)?;
                Ok((label.clone(), curve))
            })
            .collect()
    }

    /// Writes one multi-curve panel in every requested format.
    fn panel(
        &mut self,
        stem: &str,
        title: &str,
        curves: &[(String, SensitivityCurve)],
        reference: Option<(&str, fn(f64) -> f64)>,
    ) -> Result<()> {
        let first = &curves[0].1;
        let mut manifest = RunManifest::new(self.cfg.experiment.to_string(), first.config, first.estimator, self.grid())
            .with_extra("panel", stem);
        for (label, c) in curves {
            manifest = manifest.with_extra("series", format!("{label}: {}", curve_label(&c.config, c.estimator)));
        }
        let mut stats = first.stats;
        for (_, c) in curves.iter().skip(1) {
            stats.merge(&c.stats);
        }
        let manifest = manifest.with_diagnostics(stats);
        let labelled: Vec<(String, &SensitivityCurve)> = curves
            .iter()
            .map(|(l, c)| (format!("{l}: {}", curve_label(&c.config, c.estimator)), c))
            .collect();
        if self.wants(OutputFormat::Csv) {
            self.write(&format!("{stem}.csv"), &panel_csv(&manifest, &labelled)?)?;
        }
        if self.wants(OutputFormat::Json) {
            self.write(&format!("{stem}.json"), &panel_json(&manifest, &labelled)?)?;
        }
        if self.wants(OutputFormat::Svg) {
            let mut plot = Plot::new(title, "T_H", "sensitivity");
            let mut markers = Vec::new();
            for (label, c) in curves {
                plot.series.push(Series::new(
                    label.clone(),
                    c.points.iter().map(|p| (p.t_hold, p.sensitivity)).collect(),
                ));
                if let Ok(r) = find_insensitivity_points(c, &DetectionSettings::default()) {
                    markers.extend(r.locations);
                }
                markers.extend(c.points.iter().filter(|p| p.divergent).map(|p| p.t_hold));
            }
            if let Some((label, f)) = reference {
                let pts = self.grid().points().into_iter().map(|t| (t, f(t))).collect();
                plot.series.push(Series::new(label, pts).dashed());
            }
            markers.sort_by(f64::total_cmp);
            markers.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            plot.markers = markers;
            self.write(&format!("{stem}.svg"), &plot.render())?;
        }
        Ok(())
    }

    fn gamma_panel_configs(&self, input: InputState, n: usize, op: NoiseOp, gammas: &[f64]) -> Result<Vec<(String, ProtocolConfig)>> {
        let base = self.base(input, n)?;
        let mut out = vec![("gamma=0".to_string(), base)];
        for &g in gammas.iter().filter(|g| **g > 0.0) {
            out.push((format!("gamma={}", format_number(g)), base.with_noise(op, g)));
        }
        Ok(out)
    }

    fn oracle_panels(&mut self, fig: u8, cases: &[(InputState, usize)], reference: (&str, fn(f64) -> f64)) -> Result<()> {
        let gammas = self.gammas(&DEFAULT_GAMMAS);
        for &(input, n) in cases {
            for op in NoiseOp::CONSERVING {
                let cfgs = self.gamma_panel_configs(input, n, op, &gammas)?;
                let curves = self.sweep_all(&cfgs)?;
                let mut worst: f64 = 0.0;
                for (_, c) in &curves {
                    if let Some(w) = check_against_oracle(c)? {
                        worst = worst.max(w);
                    }
                }
                let stem = if cases.len() > 1 {
                    format!("figure{fig}_{}_{}", input.key(), op.slug())
                } else {
                    format!("figure{fig}_{}", op.slug())
                };
                let title = format!("{input}, N = {n}, L = {op}, delta = {}", self.delta());
                self.panel(&stem, &title, &curves, Some(reference))?;
                self.out.summary.push(format!("{stem}: closed-form agreement, worst relative deviation {worst:.2e}"));
            }
        }
        Ok(())
    }

    fn figure5(&mut self) -> Result<()> {
        let n_list = self.n_list(&[2, 4, 6, 8]);
        let gammas = self.gammas(&DEFAULT_GAMMAS);
        for input in [InputState::N0, InputState::TwinFock, InputState::Noon] {
            let ns: Vec<usize> = n_list
                .iter()
                .copied()
                .filter(|&n| default_config_for(input, n).is_ok())
                .collect();
            let mut panels: Vec<(&str, Vec<(String, ProtocolConfig)>)> = Vec::new();
            panels.push((
                "noiseless",
                ns.iter().map(|&n| Ok((format!("N={n}"), self.base(input, n)?))).collect::<Result<_>>()?,
            ));
            panels.push((
                "noisy",
                ns.iter()
                    .map(|&n| Ok((format!("N={n}"), self.base(input, n)?.with_noise(NoiseOp::Sz, 0.01))))
                    .collect::<Result<_>>()?,
            ));
            let b4 = self.base(input, 4)?;
            panels.push((
                "gamma",
                gammas
                    .iter()
                    .filter(|g| **g > 0.0)
                    .map(|&g| (format!("gamma={}", format_number(g)), b4.with_noise(NoiseOp::Sz, g)))
                    .collect(),
            ));
            panels.push((
                "operators",
                [NoiseOp::SMinus, NoiseOp::SPlus, NoiseOp::Sz]
                    .iter()
                    .map(|&op| (format!("L={op}"), b4.with_noise(op, 0.01)))
                    .collect(),
            ));
            for (name, cfgs) in panels {
                if cfgs.is_empty() {
                    continue;
                }
                let curves = self.sweep_all(&cfgs)?;
                let stem = format!("figure5_{}_{name}", input.key());
                let title = format!("{input}: {name}, delta = {}", self.delta());
                self.panel(&stem, &title, &curves, None)?;
            }
        }
        Ok(())
    }

    fn figure6(&mut self) -> Result<()> {
        let gamma = if self.cfg.is_set("gamma") { self.cfg.protocol.gamma } else { 0.03 };
        for n in self.n_list(&[2, 16]) {
            let base = self.base(InputState::TwinFock, n)?;
            let cfgs = vec![
                ("L=S+".to_string(), base.with_noise(NoiseOp::SPlus, gamma)),
                ("L=alpha".to_string(), base.with_noise(NoiseOp::Alpha, gamma)),
            ];
            let curves = self.sweep_all(&cfgs)?;
            let (sp, al) = (&curves[0].1, &curves[1].1);
            let better = sp
                .points
                .iter()
                .zip(&al.points)
                .filter(|(a, b)| a.sensitivity < b.sensitivity)
                .count();
            self.out.summary.push(format!(
                "figure6 N={n}: S+ better than alpha at {better} of {} holding times",
                sp.points.len()
            ));
            self.panel(&format!("figure6_n{n}"), &format!("twin-Fock, N = {n}, gamma = {gamma}"), &curves, None)?;
        }
        Ok(())
    }

    fn scaling_outputs(&mut self, stem: &str, results: &[&ScalingResult]) -> Result<()> {
        let first = results[0];
        let n0 = first.per_n.first().map(|r| r.n).unwrap_or(2);
        let base = self.base(first.input, n0)?.with_noise(first.noise_op, first.gamma);
        let ns: Vec<String> = first.per_n.iter().map(|r| r.n.to_string()).collect();
        let manifest = RunManifest::new(self.cfg.experiment.to_string(), base, EstimatorChoice::default_for(first.input), self.grid())
            .with_extra("n-list", ns.join(","));
        let mut rows = Vec::new();
        for r in results {
            for row in &r.per_n {
                rows.push(vec![
                    row.n.to_string(),
                    r.noise_op.key().to_string(),
                    format_number(row.t_min),
                    format_number(row.sensitivity_at_min),
                    format_number(row.crlb_at_min),
                ]);
            }
        }
        if self.wants(OutputFormat::Csv) {
            let text = table_csv(&manifest, &["n", "noise", "t_min", "sensitivity", "crlb"], &rows);
            self.write(&format!("{stem}.csv"), &text)?;
        }
        if self.wants(OutputFormat::Json) {
            let v = serde_json::json!({ "manifest": manifest.to_json(), "results": results });
            self.write(&format!("{stem}.json"), &(serde_json::to_string_pretty(&v)? + "\n"))?;
        }
        if self.wants(OutputFormat::Svg) {
            let mut plot = Plot::new(format!("first minimum after pi, gamma = {}", first.gamma), "N", "sensitivity");
            for r in results {
                let pts = |f: fn(&crate::analysis::ScalingRow) -> f64| r.per_n.iter().map(|x| (x.n as f64, f(x))).collect();
                plot.series.push(Series::new(format!("L={} sensitivity", r.noise_op), pts(|x| x.sensitivity_at_min)));
                plot.series.push(Series::new(format!("L={} CRLB", r.noise_op), pts(|x| x.crlb_at_min)).dashed());
            }
            self.write(&format!("{stem}.svg"), &plot.render())?;
        }
        Ok(())
    }

    fn crossover(&mut self, stem: &str) -> Result<()> {
        let gamma = if self.cfg.is_set("gamma") { self.cfg.protocol.gamma } else { 0.03 };
        let ns = self.n_list(&(1..=10).map(|k| 2 * k).collect::<Vec<_>>());
        let table = crossover_experiment(&ns, gamma, self.delta(), &self.grid().points())?;
        for r in [&table.conserving, &table.loss] {
            for row in &r.per_n {
                if row.sensitivity_at_min < row.crlb_at_min - 1e-6 {
                    return Err(Error::invariant(
                        "cramer-rao",
                        format!(
                            "N = {}, L = {}: sensitivity {} below CRLB {}",
                            row.n, r.noise_op, row.sensitivity_at_min, row.crlb_at_min
                        ),
                    ));
                }
            }
        }
        let crlb_ok = table
            .conserving
            .per_n
            .iter()
            .zip(&table.loss.per_n)
            .all(|(c, l)| l.crlb_at_min <= c.crlb_at_min);
        self.out.summary.push(format!("{stem}: CRLB(alpha) <= CRLB(S+) for every N: {crlb_ok}"));
        self.out.summary.push(format!(
            "{stem}: measured sensitivities cross at N = {:?}",
            table.sensitivity_crossings()
        ));
        self.scaling_outputs(stem, &[&table.conserving, &table.loss])
    }

    fn scaling(&mut self) -> Result<()> {
        let input = if self.cfg.is_set("input") { self.cfg.protocol.input } else { InputState::TwinFock };
        let op = if self.cfg.is_set("noise") { self.cfg.protocol.noise_op } else { NoiseOp::SPlus };
        let gamma = if self.cfg.is_set("gamma") { self.cfg.protocol.gamma } else { 0.03 };
        let default: Vec<usize> = if input == InputState::TwinFock { (1..=10).map(|k| 2 * k).collect() } else { (1..=10).collect() };
        let ns = self.n_list(&default);
        let r = scaling_experiment(input, &ns, op, gamma, self.delta(), &self.grid().points())?;
        self.scaling_outputs("scaling", &[&r])
    }

    fn appendix_a(&mut self) -> Result<()> {
        let gammas = self.gammas(&DEFAULT_GAMMAS);
        for g in gammas.into_iter().filter(|g| *g > 0.0) {
            let base = self.base(InputState::N0, 1)?;
            let mut cfgs = vec![("hold only".to_string(), base.with_noise(NoiseOp::Sz, g))];
            for op in [NoiseOp::Sz, NoiseOp::SMinus, NoiseOp::SPlus] {
                let mut c = base.with_noise(op, g);
                c.noise_placement = NoisePlacement::WholeProcess;
                cfgs.push((format!("whole, L={op}"), c));
            }
            let curves = self.sweep_all(&cfgs)?;
            let hold = &curves[0].1;
            for (label, c) in &curves[1..] {
                let worse = c
                    .points
                    .iter()
                    .zip(&hold.points)
                    .all(|(w, h)| !(w.sensitivity.is_finite() && h.sensitivity.is_finite()) || w.sensitivity >= h.sensitivity - 1e-8);
                self.out.summary.push(format!("appendixA gamma={g}: {label} never better than hold only: {worse}"));
            }
            self.panel(
                &format!("appendixA_gamma{}", format_number(g)),
                &format!("|1,0>, noise through the whole process, gamma = {g}"),
                &curves,
                Some(("1/T_H", |t| 1.0 / t)),
            )?;
        }
        Ok(())
    }

    fn invariance(&mut self) -> Result<()> {
        let mut base = if self.cfg.is_set("input") || self.cfg.is_set("n") {
            self.cfg.protocol
        } else {
            self.base(InputState::TwinFock, 4)?.with_noise(NoiseOp::Sz, 0.01)
        };
        if base.noise_op == NoiseOp::None {
            base.noise_op = NoiseOp::Sz;
        }
        if !self.cfg.is_set("delta") {
            base.delta = self.delta();
        }
        let gammas = self.gammas(&INVARIANCE_GAMMAS);
        let o = if self.cfg.is_set("estimator") { self.cfg.estimator } else { EstimatorChoice::default_for(base.input) };
        let verdict = check_gamma_invariance(&base, &gammas, &self.grid().points(), o)?;
        let manifest = RunManifest::new("invariance", base, o, self.grid())
            .with_extra("gammas", gammas.iter().map(|g| format_number(*g)).collect::<Vec<_>>().join(","))
            .with_extra("invariant", verdict.invariant.to_string())
            .with_extra("max-shift", format_number(verdict.max_shift))
            .with_extra("tolerance", format_number(verdict.tolerance));
        let mut rows = Vec::new();
        for (g, locs) in verdict.gammas.iter().zip(&verdict.locations) {
            for (k, t) in locs.iter().enumerate() {
                rows.push(vec![format_number(*g), k.to_string(), format_number(*t)]);
            }
        }
        if self.wants(OutputFormat::Csv) {
            self.write("invariance.csv", &table_csv(&manifest, &["gamma", "index", "t_hold"], &rows))?;
        }
        if self.wants(OutputFormat::Json) {
            let v = serde_json::json!({ "manifest": manifest.to_json(), "verdict": verdict });
            self.write("invariance.json", &(serde_json::to_string_pretty(&v)? + "\n"))?;
        }
        self.out.summary.push(format!(
            "invariance: {} (max shift {:.2e}, tolerance {:.2e})",
            verdict.invariant, verdict.max_shift, verdict.tolerance
        ));
        if !verdict.invariant {
            return Err(Error::invariant(
                "gamma-invariance",
                verdict.diff.unwrap_or_else(|| "location sets differ".into()),
            ));
        }
        Ok(())
    }

    fn density(&mut self) -> Result<()> {
        let input = if self.cfg.is_set("input") { self.cfg.protocol.input } else { InputState::TwinFock };
        let op = if self.cfg.is_set("noise") && self.cfg.protocol.noise_op != NoiseOp::None {
            self.cfg.protocol.noise_op
        } else {
            NoiseOp::Sz
        };
        let default: Vec<usize> = match input {
            InputState::TwinFock => vec![4, 6, 8],
            _ => (3..=8).collect(),
        };
        let ns = self.n_list(&default);
        let gammas = self.gammas(&[0.01, 0.05]);
        let grid = if self.cfg.is_set("thold-max") { self.grid() } else { GridSpec { max: 4.0 * PI + 0.25, ..self.grid() } };
        let rows = count_density_vs_n(input, &ns, op, &gammas, &grid.points())?;
        let mut base = self.base(input, ns[0])?;
        base.noise_op = op;
        let manifest = RunManifest::new("density", base, EstimatorChoice::default_for(input), grid)
            .with_extra("gammas", gammas.iter().map(|g| format_number(*g)).collect::<Vec<_>>().join(","));
        let mut table = Vec::new();
        let fmt_locs = |l: &[f64]| l.iter().map(|t| format_number(*t)).collect::<Vec<_>>().join(";");
        let fmt_opt = |x: Option<f64>| x.map(format_number).unwrap_or_else(|| "nan".into());
        for r in &rows {
            table.push(vec![
                r.n.to_string(),
                "0".into(),
                fmt_opt(r.noiseless_per_pi),
                r.noiseless_locations.len().to_string(),
                fmt_locs(&r.noiseless_locations),
            ]);
            for (g, d, l) in &r.noisy {
                table.push(vec![r.n.to_string(), format_number(*g), fmt_opt(*d), l.len().to_string(), fmt_locs(l)]);
            }
            self.out.summary.push(format!(
                "density {} N={}: noiseless {} per pi",
                input.key(),
                r.n,
                fmt_opt(r.noiseless_per_pi)
            ));
        }
        self.write(
            "density.csv",
            &table_csv(&manifest, &["n", "gamma", "per_pi", "count", "locations"], &table),
        )?;
        if input == InputState::Noon {
            let deltas = [0.25, 0.5, 1.0];
            let lattice = noon_lattice_vs_delta(&ns, &deltas, 0.01, &grid.points())?;
            let rows: Vec<Vec<String>> = lattice
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        format_number(r.delta),
                        fmt_opt(r.first_location),
                        fmt_opt(r.spacing),
                        fmt_opt(r.first_location.map(|t| t * r.delta)),
                    ]
                })
                .collect();
            self.write(
                "density_noon_delta.csv",
                &table_csv(&manifest, &["n", "delta", "first_location", "spacing", "first_location_times_delta"], &rows),
            )?;
        }
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let cfg = self.cfg.protocol;
        let curve = sweep_sensitivity(&cfg, &self.grid().points(), self.cfg.estimator)?;
        ensure_clean(&curve)?;
        let mut manifest = RunManifest::new("sweep", cfg, self.cfg.estimator, self.grid()).with_diagnostics(curve.stats);
        manifest.outputs = self
            .cfg
            .formats
            .iter()
            .map(|f| self.cfg.out_dir.join(format!("sweep.{}", f.extension())).display().to_string())
            .collect();
        if self.wants(OutputFormat::Csv) {
            self.write("sweep.csv", &curve_csv(&curve, &manifest)?)?;
        }
        if self.wants(OutputFormat::Json) {
            self.write("sweep.json", &curve_json(&curve, &manifest)?)?;
        }
        if self.wants(OutputFormat::Svg) {
            let mut plot = Plot::new(curve_label(&cfg, self.cfg.estimator), "T_H", "sensitivity");
            plot.series.push(Series::new("sensitivity", curve.points.iter().map(|p| (p.t_hold, p.sensitivity)).collect()));
            plot.series.push(Series::new("CRLB", curve.points.iter().map(|p| (p.t_hold, p.crlb)).collect()).dashed());
            plot.markers = curve.points.iter().filter(|p| p.divergent).map(|p| p.t_hold).collect();
            if let Ok(r) = find_insensitivity_points(&curve, &DetectionSettings::default()) {
                plot.markers.extend(&r.locations);
            }
            self.write("sweep.svg", &plot.render())?;
        }
        if curve.points.len() >= 2 {
            match find_insensitivity_points(&curve, &DetectionSettings::default()) {
                Ok(r) => self.out.summary.push(format!(
                    "insensitivity points: {}",
                    r.locations.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(", ")
                )),
                Err(e) => self.out.summary.push(format!("insensitivity points not resolved: {e}")),
            }
        }
        Ok(())
    }
}

/// Runs the selected experiment and writes its outputs under `out_dir`.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteOutcome> {
    let mut ctx = Ctx { cfg, out: SuiteOutcome::default() };
    match cfg.experiment {
        Experiment::Sweep => ctx.sweep()?,
        Experiment::Figure(1) => ctx.oracle_panels(1, &[(InputState::N0, 1)], ("1/T_H", |t| 1.0 / t))?,
        Experiment::Figure(2) => ctx.oracle_panels(2, &[(InputState::Noon, 1)], ("1/T_H", |t| 1.0 / t))?,
        Experiment::Figure(3) => ctx.oracle_panels(3, &[(InputState::N0, 2)], ("1/(sqrt2 T_H)", |t| 1.0 / (2f64.sqrt() * t)))?,
        Experiment::Figure(4) => ctx.oracle_panels(
            4,
            &[(InputState::TwinFock, 2), (InputState::Noon, 2)],
            ("1/(2 T_H)", |t| 1.0 / (2.0 * t)),
        )?,
        Experiment::Figure(5) => ctx.figure5()?,
        Experiment::Figure(6) => ctx.figure6()?,
        Experiment::Figure(7) => ctx.crossover("figure7")?,
        Experiment::Figure(k) => return Err(Error::Usage(format!("experiment: no figure{k}"))),
        Experiment::AppendixA => ctx.appendix_a()?,
        Experiment::Invariance => ctx.invariance()?,
        Experiment::Density => ctx.density()?,
        Experiment::Crossover => ctx.crossover("crossover")?,
        Experiment::Scaling => ctx.scaling()?,
    }
    Ok(ctx.out)
}
