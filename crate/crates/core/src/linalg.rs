//! Dense LU solver for the small linear systems behind policy evaluation.
//!
//! The systems are `(I - gamma * P) v = r` with `P` row-stochastic and
//! `gamma < 1`, which makes the matrix strictly row diagonally dominant, so
//! partial pivoting is numerically safe here. Kept in-crate (rather than
//! pulling in a full linear algebra stack) because the solver must stay
//! generic over the crate's scalar trait and the matrices are tiny.

use crate::scalar::Scalar;

/// The coefficient matrix was singular to working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular;

#[derive(Debug)]
pub(crate) struct LuFactors<F> {
    lu: Vec<F>,
    perm: Vec<usize>,
    n: usize,
}

impl<F: Scalar> LuFactors<F> {
    /// Factors a row-major `n x n` matrix in place with partial pivoting.
    pub(crate) fn factor(mut a: Vec<F>, n: usize) -> Result<Self, Singular> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == F::zero() || !best.is_finite() {
                return Err(Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                a[i * n + k] = factor;
                for j in k + 1..n {
                    let upd = factor * a[k * n + j];
                    a[i * n + j] -= upd;
                }
            }
        }
        Ok(Self { lu: a, perm, n })
    }

    pub(crate) fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let upd = self.lu[i * n + j] * x[j];
                x[i] -= upd;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let upd = self.lu[i * n + j] * x[j];
                x[i] -= upd;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// `a * x` for a row-major `n x n` matrix.
pub(crate) fn mat_vec<F: Scalar>(a: &[F], n: usize, x: &[F]) -> Vec<F> {
    (0..n)
        .map(|i| {
            a[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(&aij, &xj)| aij * xj)
                .sum()
        })
        .collect()
}
