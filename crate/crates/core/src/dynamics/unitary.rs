use std::ops::Range;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fock::BasisSpec;
use crate::linalg::{contiguous_blocks, hermitian_eigen, hermiticity_error, hermitize, CMatrix};

/// `exp(-i h t)`, stored as independent diagonal blocks of `h`.
#[derive(Clone, Debug)]
pub struct Propagator {
    basis: BasisSpec,
    duration: f64,
    blocks: Vec<(Range<usize>, CMatrix)>,
}

impl Propagator {
    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// The full propagator as a dense matrix.
    pub fn matrix(&self) -> CMatrix {
        let d = self.basis.dim();
        let mut u = CMatrix::zeros(d, d);
        for (r, b) in &self.blocks {
            u.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(b);
        }
        u
    }

    /// `max |U†U - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(_, b)| {
                let p = b.adjoint() * b;
                p.iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let one = if k % (b.nrows() + 1) == 0 { 1.0 } else { 0.0 };
                        (x - Complex64::new(one, 0.0)).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `U ρ U†` on a raw matrix, block by block, skipping vanishing blocks of `ρ`.
    pub(crate) fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (ri, ui) in &self.blocks {
            for (rj, uj) in &self.blocks {
                let sub = rho.view((ri.start, rj.start), (ri.len(), rj.len()));
                if sub.iter().all(|x| *x == Complex64::ZERO) {
                    continue;
                }
                let res = ui * sub * uj.adjoint();
                out.view_mut((ri.start, rj.start), (ri.len(), rj.len()))
                    .copy_from(&res);
            }
        }
        hermitize(&mut out);
        out
    }
}

pub fn unitary_propagator(basis: BasisSpec, h: &CMatrix, t: f64) -> Result<Propagator> {
    let d = basis.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.nrows(),
        });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("propagation time must be finite and >= 0, got {t}")));
    }
    let herm = hermiticity_error(h);
    if herm > 1e-12 {
        return Err(Error::invalid(format!(
            "generator is not Hermitian (max |h - h†| = {herm:e})"
        )));
    }
    let blocks = contiguous_blocks(&[h])
        .into_iter()
        .map(|r| {
            let n = r.len();
            let u = if t == 0.0 {
                CMatrix::identity(n, n)
            } else {
                let sub = h.view((r.start, r.start), (n, n)).into_owned();
                let (vals, vecs) = hermitian_eigen(&sub);
                let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    n,
                    vals.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
                ));
                &vecs * phases * vecs.adjoint()
            };
            (r, u)
        })
        .collect();
    let p = Propagator {
        basis,
        duration: t,
        blocks,
    };
    let err = p.unitarity_error();
    if err > 1e-12 {
        return Err(Error::invariant(
            "unitarity",
            format!("propagator deviates from unitary by {err:e}"),
        ));
    }
    Ok(p)
}

pub fn apply_propagator(p: &Propagator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.basis() != p.basis {
        return Err(Error::DimensionMismatch {
            expected: p.basis.dim(),
            found: rho.basis().dim(),
        });
    }
    Ok(DensityMatrix::from_parts(p.basis, p.conjugate(rho.matrix())))
}
