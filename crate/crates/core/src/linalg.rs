//! Small dense linear-algebra helpers shared by the propagators and the
//! estimators. Everything is dense `nalgebra` storage; sparsity is exploited
//! only through block structure.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |M - M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Minimal partition of `0..n` into contiguous index ranges such that no
/// nonzero entry of any of `mats` couples two different ranges.
pub fn contiguous_blocks(mats: &[&CMatrix]) -> Vec<Range<usize>> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut reach: Vec<usize> = (0..n).collect();
    for m in mats {
        for j in 0..n {
            for i in 0..n {
                if m[(i, j)] != Complex64::ZERO {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    reach[lo] = reach[lo].max(hi);
                }
            }
        }
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    let mut end = 0;
    for (i, &r) in reach.iter().enumerate() {
        end = end.max(r);
        if end == i {
            blocks.push(start..i + 1);
            start = i + 1;
        }
    }
    blocks
}

/// Connected components of the joint sparsity graph of `mats` (index sets,
/// each sorted). Indices whose rows and columns vanish in every matrix form
/// singleton components.
pub fn support_components(mats: &[&CMatrix]) -> Vec<Vec<usize>> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in mats {
        for j in 0..n {
            for i in 0..j {
                if m[(i, j)] != Complex64::ZERO || m[(j, i)] != Complex64::ZERO {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

pub fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Projects onto the Hermitian part, `(M + M†) / 2`, in place. The result is
/// exactly Hermitian in floating point.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix, computed block by block over
/// the connected components of its sparsity pattern.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    support_components(&[m])
        .iter()
        .map(|comp| {
            if comp.len() == 1 {
                m[(comp[0], comp[0])].re
            } else {
                hermitian_eigen(&submatrix(m, comp)).0[0]
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_split_on_zero_couplings() {
        let mut m = CMatrix::zeros(5, 5);
        m[(0, 1)] = re(1.0);
        m[(3, 4)] = re(2.0);
        let blocks = contiguous_blocks(&[&m]);
        assert_eq!(blocks, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn components_follow_lower_and_upper_entries() {
        let mut m = CMatrix::zeros(4, 4);
        m[(3, 0)] = re(1.0);
        m[(1, 1)] = re(1.0);
        let comps = support_components(&[&m]);
        assert_eq!(comps, vec![vec![0, 3], vec![1], vec![2]]);
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[re(2.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), re(2.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(2, vals.iter().map(|&v| re(v))));
        let back = &vecs * diag * vecs.adjoint();
        assert!(max_abs_diff(&back, &m) < 1e-14);
    }

    #[test]
    fn hermitize_is_exact() {
        let mut m = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j) as f64 * 0.1, (j as f64) - 0.3));
        hermitize(&mut m);
        assert_eq!(hermiticity_error(&m), 0.0);
    }
}
