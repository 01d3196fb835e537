//! Eigenvalues of real 4×4 matrices through the characteristic quartic.

use std::cmp::Ordering;

use num_complex::Complex;
use serde::Serialize;

use super::cubic::{cubic_roots, polish, relative_residual};
use super::matrix::Mat4;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spectrum of a real 4×4 matrix.
///
/// Eigenvalues are sorted ascending by |Re|, then by |Im|, then by the sign of
/// Im (negative first), so `eigenvalues[0]` is the slowest mode. Complex
/// eigenvalues appear as exact conjugate pairs. `residuals` are the relative
/// characteristic-polynomial residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spectrum4<T> {
    pub eigenvalues: [Complex<T>; 4],
    pub residuals: [T; 4],
}

impl<T: Scalar> Spectrum4<T> {
    /// The eigenvalue with the smallest |Re|.
    pub fn slowest(&self) -> Complex<T> {
        self.eigenvalues[0]
    }

    /// Largest real part over the spectrum.
    pub fn max_real(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::neg_infinity(), |a, z| a.max(z.re))
    }

    /// The eigenvalue with the largest real part (positive imaginary part
    /// preferred within a conjugate pair).
    pub fn rightmost(&self) -> Complex<T> {
        let mut best = self.eigenvalues[0];
        for &z in &self.eigenvalues[1..] {
            if z.re > best.re || (z.re == best.re && z.im > best.im) {
                best = z;
            }
        }
        best
    }
}

/// Monic characteristic polynomial `λ⁴ + b3 λ³ + b2 λ² + b1 λ + b0`,
/// returned lowest order first, from traces of matrix powers.
pub fn characteristic_quartic<T: Scalar>(a: &Mat4<T>) -> [T; 5] {
    let a2 = *a * *a;
    let a3 = a2 * *a;
    let (p1, p2, p3) = (a.trace(), a2.trace(), a3.trace());
    let e1 = p1;
    let e2 = (e1 * p1 - p2) / T::lit(2.0);
    let e3 = (e2 * p1 - e1 * p2 + p3) / T::lit(3.0);
    let e4 = a.det();
    [e4, -e3, e2, -e1, T::one()]
}

/// Eigenvalues of a real 4×4 matrix.
///
/// The characteristic quartic is solved in closed form (Ferrari, via the
/// resolvent cubic) and every root is Newton-polished against the quartic.
/// Fails when a relative residual stays above `1e-8`.
pub fn eig4<T: Scalar>(a: &Mat4<T>) -> Result<Spectrum4<T>> {
    if !a.is_finite() {
        return Err(convergence_failure(a, f64::NAN));
    }
    let coeffs = characteristic_quartic(a);
    let mut roots = quartic_roots(&coeffs, a)?;
    for z in roots.iter_mut() {
        *z = polish(&coeffs, *z, 24);
    }
    enforce_conjugate_pairs(&mut roots);
    sort_spectrum(&mut roots);
    let residuals = roots.map(|z| relative_residual(&coeffs, z));
    let worst = residuals.iter().fold(T::zero(), |m, &r| m.max(r));
    let limit = T::lit(1e-8).max(T::epsilon() * T::lit(1e3));
    if !(worst <= limit) {
        return Err(convergence_failure(a, worst.as_f64()));
    }
    Ok(Spectrum4 {
        eigenvalues: roots,
        residuals,
    })
}

fn convergence_failure<T: Scalar>(a: &Mat4<T>, residual: f64) -> Error {
    Error::ConvergenceFailure {
        matrix: Box::new(a.0.map(|row| row.map(|x| x.as_f64()))),
        residual,
    }
}

fn quartic_roots<T: Scalar>(c: &[T; 5], a: &Mat4<T>) -> Result<[Complex<T>; 4]> {
    let (b3, b2, b1, b0) = (c[3], c[2], c[1], c[0]);
    let cx = |x: T| Complex::new(x, T::zero());
    let two = T::lit(2.0);
    let shift = -b3 / T::lit(4.0);
    let b3sq = b3 * b3;
    let p = b2 - T::lit(3.0) * b3sq / T::lit(8.0);
    let q = b1 - b3 * b2 / two + b3sq * b3 / T::lit(8.0);
    let r = b0 - b3 * b1 / T::lit(4.0) + b3sq * b2 / T::lit(16.0)
        - T::lit(3.0) * b3sq * b3sq / T::lit(256.0);
    let scale = T::one()
        .max(p.abs())
        .max(q.abs().powf(T::lit(2.0 / 3.0)))
        .max(r.abs().sqrt());

    let ys: [Complex<T>; 4] = if q.abs() <= T::epsilon() * T::lit(16.0) * scale * scale.sqrt() {
        // Biquadratic y⁴ + p y² + r.
        let [u1, u2] = quadratic(cx(p), cx(r));
        let (s1, s2) = (u1.sqrt(), u2.sqrt());
        [s1, -s1, s2, -s2]
    } else {
        let resolvent = cubic_roots(
            T::lit(8.0),
            T::lit(-4.0) * p,
            T::lit(-8.0) * r,
            T::lit(4.0) * p * r - q * q,
        )
        .map_err(|_| convergence_failure(a, f64::NAN))?;
        let m = resolvent
            .roots
            .iter()
            .copied()
            .max_by(|x, y| {
                let fx = (x.scale(two) - cx(p)).norm();
                let fy = (y.scale(two) - cx(p)).norm();
                fx.partial_cmp(&fy).unwrap_or(Ordering::Equal)
            })
            .expect("cubic has three roots");
        let s = (m.scale(two) - cx(p)).sqrt();
        let t = cx(q) / s.scale(two);
        let [y1, y2] = quadratic(-s, m + t);
        let [y3, y4] = quadratic(s, m - t);
        [y1, y2, y3, y4]
    };
    Ok(ys.map(|y| y + cx(shift)))
}

/// Roots of `y² + b y + c` avoiding cancellation.
fn quadratic<T: Scalar>(b: Complex<T>, c: Complex<T>) -> [Complex<T>; 2] {
    let four = T::lit(4.0);
    let d = (b * b - c.scale(four)).sqrt();
    let plus = -b + d;
    let minus = -b - d;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    if big.norm() == T::zero() {
        return [big, big];
    }
    let y1 = big.unscale(T::lit(2.0));
    [y1, c / y1]
}

/// Snaps near-real roots onto the real axis and turns the rest into exact
/// conjugate pairs.
fn enforce_conjugate_pairs<T: Scalar>(roots: &mut [Complex<T>; 4]) {
    let real_band = |z: &Complex<T>| z.im.abs() <= T::lit(1e-12) * T::one().max(z.norm());
    for z in roots.iter_mut() {
        if real_band(z) {
            z.im = T::zero();
        }
    }
    let mut complex: Vec<usize> = (0..4).filter(|&i| roots[i].im != T::zero()).collect();
    if complex.len() % 2 == 1 {
        let (k, _) = complex
            .iter()
            .enumerate()
            .min_by(|a, b| roots[*a.1].im.abs().partial_cmp(&roots[*b.1].im.abs()).unwrap_or(Ordering::Equal))
            .expect("odd count is nonempty");
        roots[complex[k]].im = T::zero();
        complex.remove(k);
    }
    while let Some(i) = complex.pop() {
        let target = roots[i].conj();
        let (k, _) = complex
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (roots[*a.1] - target)
                    .norm()
                    .partial_cmp(&(roots[*b.1] - target).norm())
                    .unwrap_or(Ordering::Equal)
            })
            .expect("complex roots come in pairs");
        let j = complex.remove(k);
        let mean = (roots[i] + roots[j].conj()).unscale(T::lit(2.0));
        let upper = Complex::new(mean.re, mean.im.abs());
        roots[i] = upper;
        roots[j] = upper.conj();
    }
}

fn sort_spectrum<T: Scalar>(roots: &mut [Complex<T>; 4]) {
    roots.sort_by(|x, y| {
        x.re.abs()
            .partial_cmp(&y.re.abs())
            .unwrap_or(Ordering::Equal)
            .then(x.im.abs().partial_cmp(&y.im.abs()).unwrap_or(Ordering::Equal))
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal))
            .then(x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal))
    });
}
