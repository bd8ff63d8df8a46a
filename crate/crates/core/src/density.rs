use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::BasisSpec;
use crate::linalg::{hermiticity_error, min_eigenvalue, CMatrix, CVector};

/// A density matrix tied to the basis it is expressed in.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: BasisSpec,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wraps `matrix`, checking its shape, Hermiticity (1e-10) and trace (1e-8).
    pub fn new(basis: BasisSpec, matrix: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm = hermiticity_error(&matrix);
        if herm > 1e-10 {
            return Err(Error::invalid(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex64::ONE).norm() > 1e-8 {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        Ok(Self { basis, matrix })
    }

    /// Skips validation; used for intermediate integrator states.
    pub(crate) fn from_parts(basis: BasisSpec, matrix: CMatrix) -> Self {
        Self { basis, matrix }
    }

    pub fn pure(basis: BasisSpec, amplitudes: &CVector) -> Self {
        let norm = amplitudes.norm();
        let psi = amplitudes / Complex64::new(norm, 0.0);
        Self {
            basis,
            matrix: &psi * psi.adjoint(),
        }
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        if op.nrows() != self.matrix.nrows() || op.ncols() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: op.nrows(),
            });
        }
        let d = self.matrix.nrows();
        let mut acc = Complex64::ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.matrix[(i, k)] * op[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Total population in the `total`-particle sector.
    pub fn sector_population(&self, total: usize) -> f64 {
        self.basis
            .sector(total)
            .map_or(0.0, |r| r.map(|i| self.matrix[(i, i)].re).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, BasisKind};
    use crate::linalg::re;

    #[test]
    fn rejects_bad_shapes_and_traces() {
        let b = build_basis(BasisKind::FixedN, 1).unwrap();
        assert!(matches!(
            DensityMatrix::new(b, CMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(DensityMatrix::new(b, CMatrix::identity(2, 2)).is_err());
        let half = CMatrix::identity(2, 2) * re(0.5);
        let rho = DensityMatrix::new(b, half).unwrap();
        assert!((rho.min_eigenvalue() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sector_population_of_truncated_state() {
        let b = build_basis(BasisKind::Truncated, 2).unwrap();
        let mut m = CMatrix::zeros(6, 6);
        m[(0, 0)] = re(0.25);
        m[(3, 3)] = re(0.5);
        m[(5, 5)] = re(0.25);
        let rho = DensityMatrix::new(b, m).unwrap();
        assert_eq!(rho.sector_population(2), 0.25);
        assert_eq!(rho.sector_population(1), 0.5);
        assert_eq!(rho.sector_population(0), 0.25);
        assert_eq!(rho.sector_population(7), 0.0);
    }
}
