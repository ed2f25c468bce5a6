//! Small fixed-capacity state vectors and matrices.
//!
//! Every system handled here has at most three unknowns, so vectors and
//! matrices live on the stack and are `Copy`.

use crate::scalar::{lit, Real};
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Largest number of conserved variables supported by [`StateVec`].
pub const MAX_VARS: usize = 3;

/// Vector of conserved variables `U` with runtime length `N <= MAX_VARS`.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVec<T> {
    data: [T; MAX_VARS],
    len: usize,
}

impl<T: Real> StateVec<T> {
    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1 && len <= MAX_VARS, "state length {len} out of range");
        Self { data: [T::zero(); MAX_VARS], len }
    }

    pub fn from_slice(values: &[T]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    /// Builds a state from `f64` components.
    pub fn from_f64(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        for (d, s) in v.data.iter_mut().zip(values) {
            *d = lit(*s);
        }
        v
    }

    pub fn scalar(value: T) -> Self {
        Self::from_slice(&[value])
    }

    /// `i`-th canonical basis vector of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[i] = T::one();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data[..self.len]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.as_slice().iter()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = *self;
        for v in out.as_mut_slice() {
            *v = f(*v);
        }
        out
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for (o, b) in out.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *o = f(*o, *b);
        }
        out
    }

    /// `self + s * other`
    #[inline]
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.iter().zip(other.iter()).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm_inf(&self) -> T {
        self.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.iter().map(|v| v.to_f64().unwrap()).collect()
    }
}

impl<T: fmt::Debug> fmt::Debug for StateVec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data[..self.len]).finish()
    }
}

impl<T> Index<usize> for StateVec<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        debug_assert!(i < self.len);
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for StateVec<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        debug_assert!(i < self.len);
        &mut self.data[i]
    }
}

impl<T: Real> Add for StateVec<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.zip_map(&rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for StateVec<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.zip_map(&rhs, |a, b| a - b)
    }
}

impl<T: Real> Neg for StateVec<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<T: Real> Mul<T> for StateVec<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.map(|a| a * s)
    }
}

impl<T: Real> AddAssign for StateVec<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> SubAssign for StateVec<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

/// Dense `n x n` matrix, `n <= MAX_VARS`, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat<T> {
    data: [[T; MAX_VARS]; MAX_VARS],
    n: usize,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_VARS);
        Self { data: [[T::zero(); MAX_VARS]; MAX_VARS], n }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i][i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), rows.len());
            m.data[i][..r.len()].copy_from_slice(r);
        }
        m
    }

    pub fn from_f64(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m.data[i][j] = lit(*v);
            }
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(cols: &[StateVec<T>]) -> Self {
        let mut m = Self::zeros(cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..cols.len() {
                m.data[i][j] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j][i] = self.data[i][j];
            }
        }
        t
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.data[i][j] *= s;
            }
        }
        m
    }

    #[inline]
    pub fn mul_vec(&self, v: &StateVec<T>) -> StateVec<T> {
        let mut out = StateVec::zeros(self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for j in 0..self.n {
                acc += self.data[i][j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `self^T * v`
    #[inline]
    pub fn tr_mul_vec(&self, v: &StateVec<T>) -> StateVec<T> {
        let mut out = StateVec::zeros(self.n);
        for j in 0..self.n {
            let mut acc = T::zero();
            for i in 0..self.n {
                acc += self.data[i][j] * v[i];
            }
            out[j] = acc;
        }
        out
    }

    pub fn row(&self, i: usize) -> StateVec<T> {
        StateVec::from_slice(&self.data[i][..self.n])
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.data[i][j].is_finite()))
    }

    /// Solves `self * x = b` by LU with partial pivoting.
    ///
    /// Returns `None` when a pivot falls below `1e-14 * max|a_ij|`
    /// (numerically singular).
    pub fn solve(&self, b: &StateVec<T>) -> Option<StateVec<T>> {
        let n = self.n;
        let mut a = self.data;
        let mut x = *b;
        let scale = self.max_abs();
        if scale == T::zero() || !scale.is_finite() {
            return None;
        }
        let tiny = scale * lit::<T>(1e-14);
        for k in 0..n {
            let mut p = k;
            for i in (k + 1)..n {
                if a[i][k].abs() > a[p][k].abs() {
                    p = i;
                }
            }
            if a[p][k].abs() <= tiny {
                return None;
            }
            if p != k {
                a.swap(p, k);
                x.as_mut_slice().swap(p, k);
            }
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    let akj = a[k][j];
                    a[i][j] -= f * akj;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in (k + 1)..n {
                acc -= a[k][j] * x[j];
            }
            x[k] = acc / a[k][k];
        }
        Some(x)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i][j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.n).map(|i| &self.data[i][..self.n]).collect();
        f.debug_list().entries(rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_needs_pivoting() {
        let a = Mat::<f64>::from_f64(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 3.0], &[4.0, -3.0, 8.0]]);
        let x = StateVec::from_f64(&[1.0, -2.0, 0.5]);
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap();
        assert!((y - x).norm_inf() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Mat::<f64>::from_f64(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.solve(&StateVec::from_f64(&[1.0, 1.0])).is_none());
    }

    #[test]
    fn transpose_product_matches() {
        let a = Mat::<f64>::from_f64(&[&[2.0, 1.0], &[-1.0, 3.0]]);
        let v = StateVec::from_f64(&[0.5, 2.0]);
        assert_eq!(a.tr_mul_vec(&v), a.transpose().mul_vec(&v));
        let c = Mat::<f64>::from_columns(&[StateVec::from_f64(&[1.0, 2.0]), StateVec::from_f64(&[3.0, 4.0])]);
        assert_eq!(c[(1, 0)], 2.0);
        assert_eq!(c[(0, 1)], 3.0);
    }
}
