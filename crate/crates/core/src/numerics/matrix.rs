//! Fixed-size 4×4 real matrices and a small dense LU used by the kernels.

#![allow(clippy::needless_range_loop)]

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::Serialize;

use crate::scalar::Scalar;

pub type Vec4<T> = [T; 4];

/// Row-major real 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

impl<T: Scalar> Mat4<T> {
    pub fn zeros() -> Self {
        Mat4([[T::zero(); 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_diag([T::one(); 4])
    }

    pub fn from_diag(d: Vec4<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn trace(&self) -> T {
        (0..4).fold(T::zero(), |acc, i| acc + self.0[i][i])
    }

    pub fn diag(&self) -> Vec4<T> {
        [self.0[0][0], self.0[1][1], self.0[2][2], self.0[3][3]]
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest entrywise |M - Mᵀ|.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in (i + 1)..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|i, j| (self.0[i][j] + self.0[j][i]) * half)
    }

    pub fn mul_vec(&self, v: &Vec4<T>) -> Vec4<T> {
        let mut out = [T::zero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).fold(T::zero(), |acc, k| acc + self.0[i][k] * v[k]);
        }
        out
    }

    /// 2×2 block `(r, c)` with `r, c ∈ {0, 1}`.
    pub fn block(&self, r: usize, c: usize) -> [[T; 2]; 2] {
        let (i, j) = (2 * r, 2 * c);
        [
            [self.0[i][j], self.0[i][j + 1]],
            [self.0[i + 1][j], self.0[i + 1][j + 1]],
        ]
    }

    /// Determinant by Laplace expansion over complementary 2×2 minors.
    pub fn det(&self) -> T {
        let m = &self.0;
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    /// Solves `M x = b`; `None` when `M` is numerically singular.
    pub fn solve(&self, b: &Vec4<T>) -> Option<Vec4<T>> {
        let flat: Vec<T> = self.0.iter().flatten().copied().collect();
        let lu = Lu::factor(4, flat).ok()?;
        let mut x = b.to_vec();
        lu.solve_in_place(&mut x);
        Some([x[0], x[1], x[2], x[3]])
    }
}

impl<T: Scalar> Index<(usize, usize)> for Mat4<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Mat4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

impl<T: Scalar> Mul for Mat4<T> {
    type Output = Mat4<T>;
    fn mul(self, rhs: Mat4<T>) -> Mat4<T> {
        Mat4::from_fn(|i, j| (0..4).fold(T::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]))
    }
}

impl<T: Scalar> Add for Mat4<T> {
    type Output = Mat4<T>;
    fn add(self, rhs: Mat4<T>) -> Mat4<T> {
        Mat4::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<T: Scalar> Sub for Mat4<T> {
    type Output = Mat4<T>;
    fn sub(self, rhs: Mat4<T>) -> Mat4<T> {
        Mat4::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

/// Determinant of a 2×2 block.
pub fn det2<T: Scalar>(b: &[[T; 2]; 2]) -> T {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

/// Dense LU factorisation with partial pivoting, row-major storage.
#[derive(Clone, Debug)]
pub(crate) struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Fails with the offending pivot magnitude when the matrix is singular to
    /// working precision.
    pub(crate) fn factor(n: usize, mut a: Vec<T>) -> Result<Self, T> {
        debug_assert_eq!(a.len(), n * n);
        let norm = a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        let floor = T::epsilon() * T::lit(n as f64) * norm;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > floor) {
                return Err(pmax);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let akj = a[k * n + j];
                        a[i * n + j] -= f * akj;
                    }
                }
            }
        }
        Ok(Lu { n, lu: a, piv })
    }

    pub(crate) fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        let permuted: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }
}

/// Eigenvalues of a real symmetric 4×4 matrix by cyclic Jacobi rotations,
/// sorted ascending.
pub fn symmetric_eigenvalues<T: Scalar>(m: &Mat4<T>) -> Vec4<T> {
    let mut a = m.symmetrize().0;
    for _sweep in 0..64 {
        let off: T = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| acc + a[i][j] * a[i][j]);
        let diag: T = (0..4).fold(T::zero(), |acc, i| acc + a[i][i] * a[i][i]);
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}
