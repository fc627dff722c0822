//! Dense symmetric-matrix utilities: factorization-based Schur complements,
//! thresholded pseudo-inverses and numerical rank.

use crate::scalar::Real;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

/// How a symmetric block was inverted inside a Schur complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveKind {
    /// Positive definite; Cholesky solve.
    Factorized,
    /// Singular or indefinite; eigen-thresholded pseudo-inverse.
    PseudoInverse,
}

/// Result of eliminating a symmetric block.
#[derive(Debug, Clone)]
pub struct SchurOutcome<T> {
    /// `A - B C^+ B^T`.
    pub complement: DMatrix<T>,
    /// The subtracted term `B C^+ B^T`.
    pub loss: DMatrix<T>,
    /// Condition estimate of the eliminated block (`inf` when singular).
    pub condition: T,
    pub solve: SolveKind,
}

/// Eigen-thresholded pseudo-inverse of a symmetric matrix: eigenvalues with
/// magnitude below `rel_tol * max |lambda|` are discarded.
pub fn pinv_symmetric<T: Real>(m: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    if max == T::zero() {
        return out;
    }
    let cut = rel_tol * max;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > cut {
            let v = eig.eigenvectors.column(i);
            out += DMatrix::from_fn(n, n, |r, c| v[r] * v[c] / *lam);
        }
    }
    out
}

/// Condition estimate from the extreme absolute eigenvalues.
pub fn condition_symmetric<T: Real>(m: &DMatrix<T>) -> T {
    let eig = SymmetricEigen::new(m.clone());
    let mut max = T::zero();
    let mut min = T::infinity();
    for v in eig.eigenvalues.iter() {
        max = max.max(v.abs());
        min = min.min(v.abs());
    }
    if min == T::zero() || max == T::zero() {
        T::infinity()
    } else {
        max / min
    }
}

/// Schur complement `A - B C^{-1} B^T` of the partitioned symmetric matrix
/// `[[A, B], [B^T, C]]`. `C` is eliminated via Cholesky when positive
/// definite, otherwise via an eigen-thresholded pseudo-inverse
/// (threshold `pinv_tol * max |lambda|`).
pub fn schur_complement<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    pinv_tol: T,
) -> SchurOutcome<T> {
    let condition = condition_symmetric(c);
    let (loss, solve) = match Cholesky::new(c.clone()) {
        Some(chol) => {
            // B C^{-1} B^T computed through solves against B^T.
            let x = chol.solve(&b.transpose());
            (b * x, SolveKind::Factorized)
        }
        None => {
            let pinv = pinv_symmetric(c, pinv_tol);
            (b * pinv * b.transpose(), SolveKind::PseudoInverse)
        }
    };
    SchurOutcome {
        complement: a - &loss,
        loss,
        condition,
        solve,
    }
}

/// Count of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank<T: Real>(m: &DMatrix<T>, rel_tol: T) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(T::zero(), |acc, v| acc.max(*v));
    if max == T::zero() {
        return 0;
    }
    sv.iter().filter(|v| **v > rel_tol * max).count()
}

/// Smallest and largest eigenvalues of a symmetric matrix.
pub fn eigen_range<T: Real>(m: &DMatrix<T>) -> (T, T) {
    let eig = SymmetricEigen::new(m.clone());
    let mut lo = T::infinity();
    let mut hi = -T::infinity();
    for v in eig.eigenvalues.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

/// Relative Frobenius distance `||a - b||_F / ||a||_F` (absolute when `a` is
/// zero).
pub fn rel_frobenius<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let denom = a.norm();
    let diff = (a - b).norm();
    if denom == T::zero() {
        diff
    } else {
        diff / denom
    }
}
