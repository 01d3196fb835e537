//! Continuous Lyapunov equation `A V + V Aᵀ + D = 0` for 4×4 drift matrices.

use super::eig::eig4;
use super::matrix::{Lu, Mat4};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `A V + V Aᵀ + D = 0` for symmetric `V`.
///
/// The equation is vectorised to the 16×16 system `(I⊗A + A⊗I) vec V = -vec D`
/// and solved by partial-pivoting elimination with one step of iterative
/// refinement. `A` must satisfy `max Re λ(A) < -eps_stab`.
pub fn solve_lyapunov<T: Scalar>(a: &Mat4<T>, d: &Mat4<T>, eps_stab: T) -> Result<Mat4<T>> {
    let spectrum = eig4(a)?;
    let max_real = spectrum.max_real();
    if !(max_real < -eps_stab) {
        return Err(Error::UnstableDrift {
            max_real: max_real.as_f64(),
        });
    }
    solve_lyapunov_unchecked(a, d)
}

/// [`solve_lyapunov`] without the stability precondition; only singularity of
/// the Kronecker system is reported.
pub fn solve_lyapunov_unchecked<T: Scalar>(a: &Mat4<T>, d: &Mat4<T>) -> Result<Mat4<T>> {
    let m = kronecker_sum(a);
    let lu = Lu::factor(16, m.clone()).map_err(|pivot| Error::SingularSystem {
        pivot: pivot.as_f64(),
    })?;
    let rhs: Vec<T> = vec_col(d).into_iter().map(|x| -x).collect();
    let mut v = rhs.clone();
    lu.solve_in_place(&mut v);

    // r = rhs - M v, solved for the correction in place.
    let mut r = rhs;
    for (i, ri) in r.iter_mut().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            *ri -= m[i * 16 + j] * *vj;
        }
    }
    lu.solve_in_place(&mut r);
    for (vi, ri) in v.iter_mut().zip(&r) {
        *vi += *ri;
    }
    Ok(unvec_col(&v).symmetrize())
}

/// Largest entry of `|A V + V Aᵀ + D|`.
pub fn lyapunov_residual<T: Scalar>(a: &Mat4<T>, v: &Mat4<T>, d: &Mat4<T>) -> T {
    (*a * *v + *v * a.transpose() + *d).max_abs()
}

/// `I⊗A + A⊗I` acting on column-major `vec V`, row-major 16×16.
fn kronecker_sum<T: Scalar>(a: &Mat4<T>) -> Vec<T> {
    let mut m = vec![T::zero(); 256];
    for j in 0..4 {
        for i in 0..4 {
            let row = i + 4 * j;
            for k in 0..4 {
                // (I⊗A): V[k][j] contributes A[i][k].
                m[row * 16 + (k + 4 * j)] += a.0[i][k];
                // (A⊗I): V[i][k] contributes A[j][k].
                m[row * 16 + (i + 4 * k)] += a.0[j][k];
            }
        }
    }
    m
}

fn vec_col<T: Scalar>(m: &Mat4<T>) -> Vec<T> {
    (0..16).map(|idx| m.0[idx % 4][idx / 4]).collect()
}

fn unvec_col<T: Scalar>(v: &[T]) -> Mat4<T> {
    Mat4::from_fn(|i, j| v[i + 4 * j])
}
