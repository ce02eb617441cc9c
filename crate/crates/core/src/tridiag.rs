//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tridiagonal matrix in three-vector storage. `lower[0]` and
/// `upper[n - 1]` are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

/// Forward-eliminated form of a [`Tridiagonal`], reusable across right-hand
/// sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    lower: Vec<T>,
    inv_pivot: Vec<T>,
    upper_scaled: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn factor(&self) -> Result<TridiagonalLu<T>> {
        let n = self.len();
        let mut inv_pivot = vec![T::zero(); n];
        let mut upper_scaled = vec![T::zero(); n];
        let tiny = T::epsilon() * T::lit(16.0);
        let mut prev = T::zero();
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i] * prev
            };
            let scale = self.diag[i].abs() + self.lower[i].abs() + self.upper[i].abs();
            if !(pivot.abs() > tiny * scale) || !pivot.is_finite() {
                return Err(Error::Singular {
                    row: i,
                    pivot: pivot.as_f64(),
                });
            }
            inv_pivot[i] = T::one() / pivot;
            prev = if i + 1 < n {
                self.upper[i] * inv_pivot[i]
            } else {
                T::zero()
            };
            upper_scaled[i] = prev;
        }
        Ok(TridiagonalLu {
            lower: self.lower.clone(),
            inv_pivot,
            upper_scaled,
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s = s + self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

impl<T: Real> TridiagonalLu<T> {
    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.inv_pivot.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper_scaled[i] * rhs[i + 1];
        }
    }
}
