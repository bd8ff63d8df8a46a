//! Closed-form results for one and two particles.
//!
//! Single-particle states and moments are available for `|1,0⟩` and NOON
//! inputs under `S_z`, `S_-`, `S_+` noise during the hold. For two particles
//! only the sensitivities are known in closed form: imbalance readout for
//! `|2,0⟩`, parity readout for twin-Fock and NOON (which share one formula).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fock::{build_basis, BasisKind, InputState};
use crate::linalg::{re, CMatrix, I};
use crate::protocol::NoiseOp;

/// Denominators at or below this are treated as exact zeros.
const ZERO_DENOMINATOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalyticCase {
    n: usize,
    input: InputState,
    noise: NoiseOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// Just before the second beam splitter.
    AfterHold,
    Final,
}

/// Arithmetic progression `offset + k * period`, `k = 0, 1, …`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub offset: f64,
    pub period: f64,
}

impl Lattice {
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = ((lo - self.offset) / self.period).ceil().max(0.0) as usize;
        let mut out = Vec::new();
        loop {
            let t = self.offset + k as f64 * self.period;
            if t > hi {
                return out;
            }
            if t >= lo {
                out.push(t);
            }
            k += 1;
        }
    }

    /// Distance from `t` to the nearest lattice point.
    pub fn distance(&self, t: f64) -> f64 {
        if t <= self.offset {
            return self.offset - t;
        }
        let r = (t - self.offset) % self.period;
        r.min(self.period - r)
    }
}

impl AnalyticCase {
    pub fn new(n: usize, input: InputState, noise: NoiseOp) -> Result<Self> {
        if !NoiseOp::CONSERVING.contains(&noise) {
            return Err(Error::UnsupportedCase(format!("no closed form for noise operator {noise}")));
        }
        let ok = match (n, input) {
            (1, InputState::N0 | InputState::Noon) => true,
            (2, _) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::UnsupportedCase(format!("no closed form for N = {n} with {input} input")));
        }
        Ok(Self { n, input, noise })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input(&self) -> InputState {
        self.input
    }

    pub fn noise(&self) -> NoiseOp {
        self.noise
    }

    fn single_particle(&self, what: &str) -> Result<()> {
        if self.n != 1 {
            return Err(Error::UnsupportedCase(format!("{what} is only tabulated for one particle")));
        }
        Ok(())
    }
}

/// Density matrix of the single-particle interferometer at the given stage.
pub fn analytic_state(case: &AnalyticCase, stage: Stage, gamma: f64, delta: f64, t: f64) -> Result<DensityMatrix> {
    case.single_particle("the state")?;
    let e = (-gamma * t).exp();
    let half = (-0.5 * gamma * t).exp();
    let x = t * delta;
    let m = match stage {
        Stage::AfterHold => {
            let (p_a, p_b) = match case.noise {
                NoiseOp::SMinus => (0.5 * e, 0.5 * (2.0 - e)),
                NoiseOp::SPlus => (0.5 * (2.0 - e), 0.5 * e),
                _ => (0.5, 0.5),
            };
            let phase = num_complex::Complex64::from_polar(0.5 * half, -x);
            let off = match case.input {
                InputState::N0 => -I * phase,
                _ => phase,
            };
            CMatrix::from_row_slice(2, 2, &[re(p_a), off, off.conj(), re(p_b)])
        }
        Stage::Final => {
            let sh = (0.5 * gamma * t).sinh();
            // upper sign of the ± family belongs to S+
            let sign = match case.noise {
                NoiseOp::SPlus => 1.0,
                NoiseOp::SMinus => -1.0,
                _ => 0.0,
            };
            let (diag, off) = match case.input {
                InputState::N0 => (
                    0.5 * half * x.cos(),
                    -0.5 * half * (re(x.sin()) + I * (sign * 2.0 * sh)),
                ),
                _ => (
                    0.5 * half * x.sin(),
                    0.5 * half * (re(x.cos()) - I * (sign * 2.0 * sh)),
                ),
            };
            CMatrix::from_row_slice(2, 2, &[re(0.5 - diag), off, off.conj(), re(0.5 + diag)])
        }
    };
    DensityMatrix::new(build_basis(BasisKind::FixedN, 1)?, m)
}

/// `⟨n̂⟩`, `∂⟨n̂⟩/∂δ` and `Var(n̂)` of the single-particle final state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImbalanceMoments {
    pub mean: f64,
    pub dmean_ddelta: f64,
    pub variance: f64,
}

pub fn analytic_moments(case: &AnalyticCase, gamma: f64, delta: f64, t: f64) -> Result<ImbalanceMoments> {
    case.single_particle("the imbalance moments")?;
    let half = (-0.5 * gamma * t).exp();
    let x = t * delta;
    Ok(match case.input {
        InputState::N0 => ImbalanceMoments {
            mean: half * x.cos(),
            dmean_ddelta: -t * half * x.sin(),
            variance: 1.0 - (-gamma * t).exp() * x.cos().powi(2),
        },
        _ => ImbalanceMoments {
            mean: half * x.sin(),
            dmean_ddelta: t * half * x.cos(),
            variance: 1.0 - (-gamma * t).exp() * x.sin().powi(2),
        },
    })
}

fn ratio(num_sq: f64, den: f64) -> f64 {
    if den.abs() <= ZERO_DENOMINATOR {
        f64::INFINITY
    } else {
        num_sq.max(0.0).sqrt() / den.abs()
    }
}

/// Closed-form phase sensitivity (imbalance readout for `|N,0⟩`, parity
/// readout otherwise); `+∞` where the slope vanishes.
pub fn analytic_sensitivity(case: &AnalyticCase, gamma: f64, delta: f64, t: f64) -> Result<f64> {
    let g = gamma;
    let x = t * delta;
    let eg = |k: f64| (k * g * t).exp();
    let value = match (case.n, case.input, case.noise) {
        (1, InputState::N0, _) => ratio(1.0 - eg(-1.0) * x.cos().powi(2), -t * eg(-0.5) * x.sin()),
        (1, _, _) => ratio(1.0 - eg(-1.0) * x.sin().powi(2), t * eg(-0.5) * x.cos()),
        (2, InputState::N0, NoiseOp::Sz) => ratio(
            3.0 + eg(-2.0) * ((2.0 * x).cos() - 4.0 * eg(1.0) * x.cos().powi(2)),
            -2.0 * eg(-0.5) * t * x.sin(),
        ),
        (2, InputState::N0, _) => ratio(
            eg(-4.0)
                * (eg(2.0) * (1.0 + g * t + 2.0 * eg(2.0) + eg(1.0) * (2.0 * x).cos())
                    - (1.0 - 3.0 * eg(1.0)).powi(2) * x.cos().powi(2)),
            eg(-2.0) * (3.0 * eg(1.0) - 1.0) * t * x.sin(),
        ),
        (2, _, NoiseOp::Sz) => ratio(
            1.0 - eg(-4.0) * (2.0 * x).cos().powi(2),
            2.0 * eg(-2.0) * t * (2.0 * x).sin(),
        ),
        (2, _, _) => ratio(
            1.0 - eg(-2.0) * ((2.0 * x).cos() - g * t * eg(-1.0)).powi(2),
            2.0 * eg(-1.0) * t * (2.0 * x).sin(),
        ),
        _ => unreachable!("AnalyticCase::new rejects other combinations"),
    };
    Ok(value)
}

/// Holding times where the closed-form sensitivity diverges.
pub fn analytic_insensitivity_times(case: &AnalyticCase, delta: f64) -> Result<Lattice> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::invalid("energy shift must be finite and nonzero"));
    }
    let base = PI / delta.abs();
    Ok(match (case.n, case.input) {
        (_, InputState::N0) => Lattice { offset: base, period: base },
        (1, _) => Lattice { offset: base / 2.0, period: base },
        _ => Lattice { offset: base / 2.0, period: base / 2.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{moments, EstimatorChoice};

    fn case(n: usize, input: InputState, noise: NoiseOp) -> AnalyticCase {
        AnalyticCase::new(n, input, noise).unwrap()
    }

    fn all_cases() -> Vec<AnalyticCase> {
        let mut v = Vec::new();
        for noise in NoiseOp::CONSERVING {
            v.push(case(1, InputState::N0, noise));
            v.push(case(1, InputState::Noon, noise));
            v.push(case(2, InputState::N0, noise));
            v.push(case(2, InputState::TwinFock, noise));
            v.push(case(2, InputState::Noon, noise));
        }
        v
    }

    #[test]
    fn only_tabulated_cases() {
        assert!(matches!(
            AnalyticCase::new(3, InputState::N0, NoiseOp::Sz),
            Err(Error::UnsupportedCase(_))
        ));
        assert!(AnalyticCase::new(1, InputState::TwinFock, NoiseOp::Sz).is_err());
        assert!(AnalyticCase::new(1, InputState::N0, NoiseOp::Alpha).is_err());
        let c = case(2, InputState::N0, NoiseOp::Sz);
        assert!(matches!(
            analytic_state(&c, Stage::Final, 0.1, 0.5, 1.0),
            Err(Error::UnsupportedCase(_))
        ));
    }

    #[test]
    fn noiseless_final_state_at_quarter_turn() {
        let c = case(1, InputState::N0, NoiseOp::Sz);
        let rho = analytic_state(&c, Stage::Final, 0.0, 0.5, PI).unwrap();
        let cos = (PI / 2.0).cos();
        assert!((rho.matrix()[(0, 0)].re - 0.5 * (1.0 - cos)).abs() < 1e-15);
        assert!((rho.matrix()[(1, 1)].re - 0.5 * (1.0 + cos)).abs() < 1e-15);
    }

    #[test]
    fn zero_hold_is_split_state() {
        let c = case(1, InputState::N0, NoiseOp::Sz);
        let rho = analytic_state(&c, Stage::AfterHold, 0.0, 0.5, 0.0).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[re(0.5), -I * 0.5, I * 0.5, re(0.5)]);
        assert_eq!(*rho.matrix(), expected);
    }

    #[test]
    fn noon_jump_states_carry_sinh_terms() {
        let (g, d, t) = (0.1f64, 0.5f64, 3.0f64);
        for (noise, sign) in [(NoiseOp::SPlus, -1.0), (NoiseOp::SMinus, 1.0)] {
            let rho = analytic_state(&case(1, InputState::Noon, noise), Stage::Final, g, d, t).unwrap();
            let expected = sign * (-0.5 * g * t).exp() * (0.5 * g * t).sinh();
            assert!((rho.matrix()[(0, 1)].im - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn sensitivity_is_moment_ratio() {
        for input in [InputState::N0, InputState::Noon] {
            for noise in NoiseOp::CONSERVING {
                let c = case(1, input, noise);
                for &(g, t) in &[(0.0, 1.3), (0.05, 2.9), (0.1, 7.7)] {
                    let m = analytic_moments(&c, g, 0.5, t).unwrap();
                    let s = analytic_sensitivity(&c, g, 0.5, t).unwrap();
                    assert!((s - m.variance.sqrt() / m.dmean_ddelta.abs()).abs() < 1e-12 * s);
                    let rho = analytic_state(&c, Stage::Final, g, 0.5, t).unwrap();
                    let (mean, var) = moments(&rho, EstimatorChoice::Imbalance).unwrap();
                    assert!((mean - m.mean).abs() < 1e-14 && (var - m.variance).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn single_particle_noise_ops_agree() {
        for input in [InputState::N0, InputState::Noon] {
            let vals: Vec<f64> = NoiseOp::CONSERVING
                .iter()
                .map(|&n| analytic_sensitivity(&case(1, input, n), 0.07, 0.5, 4.4).unwrap())
                .collect();
            assert!(vals.iter().all(|v| *v == vals[0]));
        }
    }

    #[test]
    fn small_gamma_limits() {
        // the leading correction is of order γ·T, so the limit is probed well below 1e-8
        for t in [0.9, 2.2, 5.3, 11.1] {
            for c in all_cases() {
                let s = analytic_sensitivity(&c, 1e-10, 0.5, t).unwrap();
                let baseline = match (c.n, c.input) {
                    (1, _) => 1.0 / t,
                    (2, InputState::N0) => 1.0 / (2f64.sqrt() * t),
                    _ => 1.0 / (2.0 * t),
                };
                assert!((s / baseline - 1.0).abs() < 1e-8, "{c:?} t={t}: {s} vs {baseline}");
            }
        }
    }

    #[test]
    fn divergences_sit_on_lattice() {
        for c in all_cases() {
            let lat = analytic_insensitivity_times(&c, 0.5).unwrap();
            for t in lat.points_in(0.1, 20.0) {
                assert!(analytic_sensitivity(&c, 0.05, 0.5, t).unwrap() > 1e6, "{c:?} at {t}");
            }
        }
        let l = analytic_insensitivity_times(&case(1, InputState::N0, NoiseOp::Sz), 0.5).unwrap();
        assert_eq!(l, Lattice { offset: 2.0 * PI, period: 2.0 * PI });
        let l = analytic_insensitivity_times(&case(1, InputState::Noon, NoiseOp::Sz), 0.5).unwrap();
        assert_eq!(l, Lattice { offset: PI, period: 2.0 * PI });
        let l = analytic_insensitivity_times(&case(2, InputState::TwinFock, NoiseOp::SPlus), 0.5).unwrap();
        assert_eq!(l.period, PI);
    }

    #[test]
    fn exact_zero_denominator_gives_infinity() {
        let c = case(2, InputState::N0, NoiseOp::Sz);
        assert!(analytic_sensitivity(&c, 0.1, 0.5, 0.0).unwrap().is_infinite());
    }

    #[test]
    fn lattice_helpers() {
        let l = Lattice { offset: 1.0, period: 2.0 };
        assert_eq!(l.points_in(0.0, 6.0), vec![1.0, 3.0, 5.0]);
        assert_eq!(l.points_in(3.0, 3.0), vec![3.0]);
        assert!((l.distance(4.5) - 0.5).abs() < 1e-15);
        assert!((l.distance(0.25) - 0.75).abs() < 1e-15);
    }
}
