//! Tridiagonal solves with real coefficients and real or complex right-hand sides.

use std::ops::{Mul, Sub};

/// Scalars the tridiagonal solver can carry on the right-hand side.
pub trait Field: Copy + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Field for T where T: Copy + Sub<Output = T> + Mul<f64, Output = T> {}

/// Real tridiagonal matrix, `sub[i] = A[i+1][i]`, `sup[i] = A[i][i+1]`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

/// Thomas factorization of a [`Tridiagonal`], reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    sub: Vec<f64>,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply<T: Field + std::ops::Add<Output = T>>(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = x[i] * self.diag[i];
                if i > 0 {
                    acc = acc + x[i - 1] * self.sub[i - 1];
                }
                if i + 1 < n {
                    acc = acc + x[i + 1] * self.sup[i];
                }
                acc
            })
            .collect()
    }

    /// Factorizes without pivoting. Returns `None` on a vanishing pivot.
    pub fn factor(&self) -> Option<TridiagonalLu> {
        let n = self.len();
        assert_eq!(self.sub.len() + 1, n.max(1));
        assert_eq!(self.sup.len() + 1, n.max(1));
        let mut c_prime = vec![0.0; n.saturating_sub(1)];
        let mut inv_denom = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let lower = if i > 0 { self.sub[i - 1] } else { 0.0 };
            let denom = self.diag[i] - lower * prev_c;
            if denom == 0.0 || !denom.is_finite() {
                return None;
            }
            inv_denom[i] = 1.0 / denom;
            if i + 1 < n {
                c_prime[i] = self.sup[i] * inv_denom[i];
                prev_c = c_prime[i];
            }
        }
        Some(TridiagonalLu {
            sub: self.sub.clone(),
            c_prime,
            inv_denom,
        })
    }
}

impl TridiagonalLu {
    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place<T: Field>(&self, rhs: &mut [T]) {
        let n = self.inv_denom.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] = rhs[0] * self.inv_denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.sub[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * self.c_prime[i];
        }
    }
}
