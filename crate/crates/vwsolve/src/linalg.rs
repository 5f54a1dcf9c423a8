//! Small direct solvers: Thomas elimination for tridiagonal systems and
//! Gaussian elimination with partial pivoting for the dense Galerkin blocks.

use crate::scalar::Real;
use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular system: pivot magnitude {pivot} below {tol} at row {row}")]
    SingularSystem { row: usize, pivot: f64, tol: f64 },
}

/// Tridiagonal matrix in banded storage. `lower[i]` multiplies `x[i-1]` in
/// row `i` (so `lower[0]` is unused), `upper[i]` multiplies `x[i+1]`.
#[derive(Clone, Debug)]
pub struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiag<T> {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// y = A x.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.n();
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Solve A x = rhs by the Thomas algorithm.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.n();
        assert_eq!(rhs.len(), n);
        let tol = T::from_f64_c(PIVOT_TOL);
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let mut piv = self.diag[0];
        if piv.abs() < tol {
            return Err(LinalgError::SingularSystem {
                row: 0,
                pivot: piv.abs().to_f64_c(),
                tol: PIVOT_TOL,
            });
        }
        c[0] = self.upper[0] / piv;
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if piv.abs() < tol {
                return Err(LinalgError::SingularSystem {
                    row: i,
                    pivot: piv.abs().to_f64_c(),
                    tol: PIVOT_TOL,
                });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / piv;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let nxt = x[i + 1];
            x[i] = x[i] - c[i] * nxt;
        }
        Ok(x)
    }
}

/// Dense row-major n x n solve with partial pivoting; overwrites nothing.
pub fn dense_solve<T: Real>(a: &[T], rhs: &[T], n: usize) -> Result<Vec<T>, LinalgError> {
    assert_eq!(a.len(), n * n);
    assert_eq!(rhs.len(), n);
    let tol = T::from_f64_c(PIVOT_TOL);
    let mut m = a.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let mut p = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best < tol {
            return Err(LinalgError::SingularSystem {
                row: col,
                pivot: best.to_f64_c(),
                tol: PIVOT_TOL,
            });
        }
        if p != col {
            for k in 0..n {
                m.swap(col * n + k, p * n + k);
            }
            b.swap(col, p);
        }
        let piv = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / piv;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] = m[r * n + k] - factor * v;
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s = s - m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    Ok(x)
}
