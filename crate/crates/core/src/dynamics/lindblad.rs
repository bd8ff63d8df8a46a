use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_error, re, CMatrix, I};

#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub op: CMatrix,
    pub rate: f64,
}

impl JumpOperator {
    pub fn new(op: CMatrix, rate: f64) -> Self {
        Self { op, rate }
    }
}

/// `ρ̇ = -i[H, ρ] + Σ γ (L ρ L† - ½{L†L, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<JumpOperator>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<JumpOperator>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: hamiltonian.ncols(),
            });
        }
        let herm = hermiticity_error(&hamiltonian);
        if herm > 1e-12 {
            return Err(Error::invalid(format!("Hamiltonian is not Hermitian ({herm:e})")));
        }
        for j in &jumps {
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::invalid(format!("jump rate must be finite and >= 0, got {}", j.rate)));
            }
            if j.op.nrows() != d || j.op.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: j.op.nrows(),
                });
            }
        }
        let jumps = jumps.into_iter().filter(|j| j.rate > 0.0).collect();
        Ok(Self { hamiltonian, jumps })
    }

    pub fn unitary(hamiltonian: CMatrix) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Jump operators with a strictly positive rate.
    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// Non-Hermitian effective Hamiltonian `H - (i/2) Σ γ L†L`.
    pub fn effective_hamiltonian(&self) -> CMatrix {
        let mut k = self.hamiltonian.clone();
        for j in &self.jumps {
            k -= (j.op.adjoint() * &j.op) * (I * (0.5 * j.rate));
        }
        k
    }

    pub(crate) fn rhs_matrix(&self, rho: &CMatrix) -> CMatrix {
        let k = self.effective_hamiltonian();
        let mut out = (&k * rho) * (-I) + (rho * k.adjoint()) * I;
        for j in &self.jumps {
            out += (&j.op * rho * j.op.adjoint()) * re(j.rate);
        }
        out
    }
}

pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.matrix().nrows() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho.matrix().nrows(),
        });
    }
    Ok(gen.rhs_matrix(rho.matrix()))
}
