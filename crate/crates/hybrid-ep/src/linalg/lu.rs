//! Complex LU factorization with partial pivoting.
//!
//! Used for the Padé solves inside [`super::expm`], for inverting eigenvector
//! matrices, and for the resolvent solves (z − H)⁻¹ on the contour used by the
//! Jordan-safe propagator.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Packed LU factors of a square complex matrix, P·A = L·U.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Array2<C64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Factor `a`; errors when a pivot collapses (singular to working precision).
    pub fn factor(a: &Array2<C64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let (mut p, mut max) = (k, lu[[k, k]].norm());
            for i in k + 1..n {
                let v = lu[[i, k]].norm();
                if v > max {
                    p = i;
                    max = v;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::Numerical(format!(
                    "singular matrix in LU factorization (pivot {k})"
                )));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = lu[[k, j]];
                    lu[[k, j]] = lu[[p, j]];
                    lu[[p, j]] = tmp;
                }
            }
            let inv_pivot = lu[[k, k]].finv();
            for i in k + 1..n {
                let factor = lu[[i, k]] * inv_pivot;
                lu[[i, k]] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[[k, j]];
                    lu[[i, j]] -= sub;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Solve A x = b for a single right-hand side.
    pub fn solve_vec(&self, b: &Array1<C64>) -> Array1<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.clone();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // Forward substitution (L has implicit unit diagonal).
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc * self.lu[[i, i]].finv();
        }
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &Array2<C64>) -> Array2<C64> {
        let n = self.dim();
        assert_eq!(b.nrows(), n);
        let mut x = Array2::zeros(b.raw_dim());
        for (j, col) in b.columns().into_iter().enumerate() {
            let sol = self.solve_vec(&col.to_owned());
            x.column_mut(j).assign(&sol);
        }
        x
    }

    /// A⁻¹ via n unit-vector solves.
    pub fn inverse(&self) -> Array2<C64> {
        let n = self.dim();
        self.solve_mat(&Array2::eye(n))
    }
}

/// One-shot solve A X = B.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    Ok(Lu::factor(a)?.solve_mat(b))
}
