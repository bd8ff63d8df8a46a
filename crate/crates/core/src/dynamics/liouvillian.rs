//! Sparse Lindblad superoperator restricted to the entries of ρ that the
//! dynamics can ever reach from a given starting pattern.
//!
//! With `K = H - (i/2) Σ γ L†L` the generator reads
//! `ρ̇ = -i K ρ + i ρ K† + Σ γ L ρ L†`, so a source entry `(k, l)` feeds
//! `(i, l)` through `K[i,k]`, `(k, j)` through `K[j,l]`, and `(i, j)` through
//! `L[i,k] L[j,l]*`. Particle loss keeps ρ block diagonal in the total particle
//! number, which cuts the state from `d²` to `Σ (M+1)²` entries.

use std::collections::VecDeque;

use num_complex::Complex64;

use super::lindblad::LindbladGenerator;
use crate::linalg::{CMatrix, I};

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    entries: Vec<(u32, u32)>,
    mirror: Vec<u32>,
    diagonal: Vec<u32>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

fn column_lists(m: &CMatrix) -> Vec<Vec<(u32, Complex64)>> {
    (0..m.ncols())
        .map(|c| {
            (0..m.nrows())
                .filter(|&r| m[(r, c)] != Complex64::ZERO)
                .map(|r| (r as u32, m[(r, c)]))
                .collect()
        })
        .collect()
}

impl Liouvillian {
    /// Builds the superoperator on the closure of the nonzero pattern of `seed`.
    pub fn new(gen: &LindbladGenerator, seed: &CMatrix) -> Self {
        let d = gen.dim();
        let k_cols = column_lists(&gen.effective_hamiltonian());
        let jumps: Vec<(f64, Vec<Vec<(u32, Complex64)>>)> = gen
            .jumps()
            .iter()
            .map(|j| (j.rate, column_lists(&j.op)))
            .collect();

        let mut slot = vec![ABSENT; d * d];
        let mut entries: Vec<(u32, u32)> = Vec::new();
        let mut queue = VecDeque::new();
        let visit = |r: u32, c: u32, slot: &mut Vec<u32>, entries: &mut Vec<(u32, u32)>, queue: &mut VecDeque<u32>| -> u32 {
            let key = r as usize * d + c as usize;
            if slot[key] == ABSENT {
                let id = entries.len() as u32;
                slot[key] = id;
                entries.push((r, c));
                queue.push_back(id);
            }
            slot[key]
        };
        for c in 0..d {
            for r in 0..d {
                if seed[(r, c)] != Complex64::ZERO {
                    visit(r as u32, c as u32, &mut slot, &mut entries, &mut queue);
                    visit(c as u32, r as u32, &mut slot, &mut entries, &mut queue);
                }
            }
        }

        let mut triplets: Vec<(u32, u32, Complex64)> = Vec::new();
        while let Some(src) = queue.pop_front() {
            let (k, l) = entries[src as usize];
            for &(i, kik) in &k_cols[k as usize] {
                let t = visit(i, l, &mut slot, &mut entries, &mut queue);
                triplets.push((t, src, -I * kik));
            }
            for &(j, kjl) in &k_cols[l as usize] {
                let t = visit(k, j, &mut slot, &mut entries, &mut queue);
                triplets.push((t, src, I * kjl.conj()));
            }
            for (rate, cols) in &jumps {
                for &(i, lik) in &cols[k as usize] {
                    for &(j, ljl) in &cols[l as usize] {
                        let t = visit(i, j, &mut slot, &mut entries, &mut queue);
                        triplets.push((t, src, lik * ljl.conj() * *rate));
                    }
                }
            }
        }

        triplets.sort_unstable_by_key(|&(t, s, _)| (t, s));
        let n = entries.len();
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (t, s, v) in triplets {
            if last == Some((t, s)) {
                *vals.last_mut().expect("merged entry exists") += v;
                continue;
            }
            last = Some((t, s));
            cols.push(s);
            vals.push(v);
            row_ptr[t as usize + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }

        let mirror = entries
            .iter()
            .map(|&(r, c)| slot[c as usize * d + r as usize])
            .collect::<Vec<_>>();
        debug_assert!(mirror.iter().all(|&m| m != ABSENT));
        let diagonal = entries
            .iter()
            .enumerate()
            .filter(|(_, (r, c))| r == c)
            .map(|(i, _)| i as u32)
            .collect();
        Self {
            dim: d,
            entries,
            mirror,
            diagonal,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Number of tracked entries of ρ.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p] as usize];
            }
            *o = acc;
        }
    }

    /// Pulls the tracked entries out of a dense matrix.
    pub fn gather(&self, m: &CMatrix) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|&(r, c)| m[(r as usize, c as usize)])
            .collect()
    }

    pub fn scatter(&self, v: &[Complex64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (&(r, c), x) in self.entries.iter().zip(v) {
            m[(r as usize, c as usize)] = *x;
        }
        m
    }

    pub(crate) fn hermitize(&self, v: &mut [Complex64]) {
        for (i, &m) in self.mirror.iter().enumerate() {
            let m = m as usize;
            if m == i {
                v[i].im = 0.0;
            } else if m > i {
                let avg = (v[i] + v[m].conj()) * 0.5;
                v[i] = avg;
                v[m] = avg.conj();
            }
        }
    }

    pub(crate) fn trace(&self, v: &[Complex64]) -> f64 {
        self.diagonal.iter().map(|&i| v[i as usize].re).sum()
    }

    /// `tr(ρ D)` for a diagonal operator given by its diagonal.
    pub(crate) fn diagonal_expectation(&self, v: &[Complex64], diag: &[f64]) -> f64 {
        self.diagonal
            .iter()
            .map(|&i| v[i as usize].re * diag[self.entries[i as usize].0 as usize])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::JumpOperator;
    use crate::fock::{build_basis, build_input_state, build_operators, BasisKind, InputState};
    use crate::linalg::max_abs_diff;

    #[test]
    fn matches_dense_generator() {
        let b = build_basis(BasisKind::Truncated, 4).unwrap();
        let ops = build_operators(b, 1.0, 0.5);
        let rho = build_input_state(b, InputState::N0).unwrap();
        let p = crate::dynamics::unitary_propagator(b, &ops.h_j, 0.7).unwrap();
        let rho = crate::dynamics::apply_propagator(&p, &rho).unwrap();
        let gen = LindbladGenerator::new(
            &ops.h_delta + &ops.h_j * crate::linalg::re(0.3),
            vec![
                JumpOperator::new(ops.alpha().unwrap().clone(), 0.2),
                JumpOperator::new(ops.s_minus.clone(), 0.1),
            ],
        )
        .unwrap();
        let l = Liouvillian::new(&gen, rho.matrix());
        let x = l.gather(rho.matrix());
        let mut y = vec![Complex64::ZERO; x.len()];
        l.apply(&x, &mut y);
        let dense = gen.rhs_matrix(rho.matrix());
        assert!(max_abs_diff(&l.scatter(&y), &dense) < 1e-13);
        assert_eq!(l.scatter(&x), *rho.matrix());
    }

    #[test]
    fn loss_support_is_block_diagonal_in_particle_number() {
        let b = build_basis(BasisKind::Truncated, 20).unwrap();
        let ops = build_operators(b, 1.0, 0.5);
        let rho = build_input_state(b, InputState::TwinFock).unwrap();
        let gen = LindbladGenerator::new(ops.h_delta.clone(), vec![JumpOperator::new(ops.alpha().unwrap().clone(), 0.1)]).unwrap();
        // the seed only touches one diagonal entry; closure under H_delta and
        // alpha reaches the diagonal of every lower sector
        let l = Liouvillian::new(&gen, rho.matrix());
        assert!(l.support_size() <= (0..=20).map(|m| (m + 1) * (m + 1)).sum::<usize>());
        let p = crate::dynamics::unitary_propagator(b, &ops.h_j, 0.785).unwrap();
        let spread = crate::dynamics::apply_propagator(&p, &rho).unwrap();
        let l = Liouvillian::new(&gen, spread.matrix());
        assert_eq!(l.support_size(), (0..=20).map(|m| (m + 1) * (m + 1)).sum::<usize>());
    }
}
