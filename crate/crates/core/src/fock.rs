//! Fock bases of the two-mode system and matrix representations of the
//! operators used by the interferometer.
//!
//! States are labelled `|n_a, n_b⟩`. A fixed-N basis lists `|N,0⟩, |N-1,1⟩,
//! …, |0,N⟩` (index 0 is `|N,0⟩`). A truncated basis concatenates the fixed-N'
//! blocks for `N' = N_max, N_max-1, …, 0`, so every particle-number sector is
//! a contiguous index range.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{re, CMatrix, CVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Exactly `N` particles.
    FixedN,
    /// Every particle number from `N_max` down to the vacuum.
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockState {
    pub n_a: usize,
    pub n_b: usize,
}

impl FockState {
    pub fn new(n_a: usize, n_b: usize) -> Self {
        Self { n_a, n_b }
    }

    pub fn total(&self) -> usize {
        self.n_a + self.n_b
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.n_a, self.n_b)
    }
}

/// A two-mode Fock basis with a deterministic state ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    kind: BasisKind,
    n: usize,
}

fn triangle(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

impl BasisSpec {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// `N` for a fixed-N basis, `N_max` for a truncated one.
    pub fn max_particles(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            BasisKind::FixedN => self.n + 1,
            BasisKind::Truncated => triangle(self.n),
        }
    }

    /// Index range of the `total`-particle sector, if present.
    pub fn sector(&self, total: usize) -> Option<Range<usize>> {
        match self.kind {
            BasisKind::FixedN if total == self.n => Some(0..self.n + 1),
            BasisKind::FixedN => None,
            BasisKind::Truncated if total <= self.n => {
                let start = triangle(self.n) - triangle(total);
                Some(start..start + total + 1)
            }
            BasisKind::Truncated => None,
        }
    }

    pub fn state(&self, index: usize) -> FockState {
        assert!(index < self.dim(), "basis index {index} out of range");
        let total = match self.kind {
            BasisKind::FixedN => self.n,
            BasisKind::Truncated => (0..=self.n)
                .rev()
                .find(|&m| self.sector(m).is_some_and(|r| r.contains(&index)))
                .expect("every index lies in a sector"),
        };
        let start = self.sector(total).map_or(0, |r| r.start);
        let n_a = total - (index - start);
        FockState::new(n_a, total - n_a)
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.sector(state.total())
            .map(|r| r.start + (state.total() - state.n_a))
    }

    pub fn states(&self) -> impl Iterator<Item = FockState> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BasisKind::FixedN => write!(f, "FixedN({})", self.n),
            BasisKind::Truncated => write!(f, "Truncated({})", self.n),
        }
    }
}

pub fn build_basis(kind: BasisKind, n: usize) -> Result<BasisSpec> {
    if n == 0 {
        return Err(Error::invalid("particle count must be at least 1"));
    }
    Ok(BasisSpec { kind, n })
}

/// Matrix representations of every operator on a given basis.
///
/// `h_j` already carries the tunnelling strength and `h_delta` the energy
/// shift they were built with.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub basis: BasisSpec,
    pub h_j: CMatrix,
    pub h_delta: CMatrix,
    pub s_z: CMatrix,
    pub s_plus: CMatrix,
    pub s_minus: CMatrix,
    pub n_imbalance: CMatrix,
    pub parity_b: CMatrix,
    pub n_total: CMatrix,
    alpha: Option<CMatrix>,
}

impl OperatorSet {
    /// The symmetric loss operator `(â + b̂)/√2`; only available on truncated bases.
    pub fn alpha(&self) -> Result<&CMatrix> {
        self.alpha.as_ref().ok_or_else(|| {
            Error::UnsupportedOperator(format!(
                "α̂ leaves the fixed-N sector; use a truncated basis instead of {}",
                self.basis
            ))
        })
    }

    /// Phase-accumulation Hamiltonian `(δ/2)(n_a - n_b)` for an arbitrary shift.
    pub fn hold_hamiltonian(&self, delta: f64) -> CMatrix {
        &self.s_z * re(delta)
    }
}

fn diagonal(basis: BasisSpec, f: impl Fn(FockState) -> f64) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        basis.dim(),
        basis.states().map(|s| re(f(s))),
    ))
}

/// `b†a`: moves one particle from mode a to mode b.
fn hop_a_to_b(basis: BasisSpec) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for (col, s) in basis.states().enumerate() {
        if s.n_a == 0 {
            continue;
        }
        let target = FockState::new(s.n_a - 1, s.n_b + 1);
        if let Some(row) = basis.index_of(target) {
            m[(row, col)] = re(((s.n_a * (s.n_b + 1)) as f64).sqrt());
        }
    }
    m
}

/// Mode annihilation operator `â` (`mode_b == false`) or `b̂` on a truncated basis.
pub fn annihilation(basis: BasisSpec, mode_b: bool) -> Result<CMatrix> {
    if basis.kind() != BasisKind::Truncated {
        return Err(Error::UnsupportedOperator(format!(
            "single-mode ladder operators need a truncated basis, got {basis}"
        )));
    }
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for (col, s) in basis.states().enumerate() {
        let (count, target) = if mode_b {
            (s.n_b, s.n_b.checked_sub(1).map(|nb| FockState::new(s.n_a, nb)))
        } else {
            (s.n_a, s.n_a.checked_sub(1).map(|na| FockState::new(na, s.n_b)))
        };
        if let Some(row) = target.and_then(|t| basis.index_of(t)) {
            m[(row, col)] = re((count as f64).sqrt());
        }
    }
    Ok(m)
}

/// `c_a â + c_b b̂` on a truncated basis.
pub fn mode_combination(basis: BasisSpec, c_a: f64, c_b: f64) -> Result<CMatrix> {
    Ok(annihilation(basis, false)? * re(c_a) + annihilation(basis, true)? * re(c_b))
}

pub fn build_operators(basis: BasisSpec, j: f64, delta: f64) -> OperatorSet {
    let s_minus = hop_a_to_b(basis);
    let s_plus = s_minus.adjoint();
    let h_j = (&s_plus + &s_minus) * re(-j);
    let s_z = diagonal(basis, |s| 0.5 * (s.n_a as f64 - s.n_b as f64));
    let h_delta = &s_z * re(delta);
    let n_imbalance = diagonal(basis, |s| s.n_b as f64 - s.n_a as f64);
    let parity_b = diagonal(basis, |s| if s.n_b % 2 == 0 { 1.0 } else { -1.0 });
    let n_total = diagonal(basis, |s| s.total() as f64);
    let alpha = match basis.kind() {
        BasisKind::Truncated => Some(
            mode_combination(basis, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
                .expect("truncated basis"),
        ),
        BasisKind::FixedN => None,
    };
    OperatorSet {
        basis,
        h_j,
        h_delta,
        s_z,
        s_plus,
        s_minus,
        n_imbalance,
        parity_b,
        n_total,
        alpha,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputState {
    /// `|N,0⟩`
    N0,
    /// `|N/2,N/2⟩`
    TwinFock,
    /// `(|N,0⟩ + |0,N⟩)/√2`
    Noon,
}

impl InputState {
    pub fn key(&self) -> &'static str {
        match self {
            InputState::N0 => "n0",
            InputState::TwinFock => "tf",
            InputState::Noon => "noon",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key.to_ascii_lowercase().as_str() {
            "n0" => Some(InputState::N0),
            "tf" => Some(InputState::TwinFock),
            "noon" => Some(InputState::Noon),
            _ => None,
        }
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Pure input state carrying all `N = basis.max_particles()` particles.
pub fn build_input_state(basis: BasisSpec, which: InputState) -> Result<DensityMatrix> {
    let n = basis.max_particles();
    let mut amp = CVector::zeros(basis.dim());
    let idx = |s: FockState| basis.index_of(s).expect("state inside basis");
    match which {
        InputState::N0 => amp[idx(FockState::new(n, 0))] = re(1.0),
        InputState::TwinFock => {
            if n % 2 != 0 {
                return Err(Error::invalid(format!(
                    "twin-Fock input needs an even particle number, got {n}"
                )));
            }
            amp[idx(FockState::new(n / 2, n / 2))] = re(1.0);
        }
        InputState::Noon => {
            let c = re(std::f64::consts::FRAC_1_SQRT_2);
            amp[idx(FockState::new(n, 0))] += c;
            amp[idx(FockState::new(0, n))] += c;
        }
    }
    Ok(DensityMatrix::pure(basis, &amp))
}
