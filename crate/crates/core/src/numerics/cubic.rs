//! Closed-form cubic roots with Newton polishing.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The three roots of a real cubic and their relative residuals
/// `|p(z)| / Σ|c_k||z|^k`.
///
/// Real roots come first in ascending order, then a complex pair with the
/// positive imaginary part first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicRoots<T> {
    pub roots: [Complex<T>; 3],
    pub residuals: [T; 3],
}

impl<T: Scalar> CubicRoots<T> {
    /// Real roots (those with exactly zero imaginary part), ascending.
    pub fn real_roots(&self) -> Vec<T> {
        self.roots.iter().filter(|z| z.im == T::zero()).map(|z| z.re).collect()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, &r| a.max(r))
    }
}

/// Horner evaluation of `Σ c[k] z^k` (coefficients lowest order first) and
/// its derivative.
pub(crate) fn poly_eval<T: Scalar>(coeffs: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut dp = p;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, T::zero());
    }
    (p, dp)
}

/// `|p(z)|` divided by the magnitude scale `Σ|c_k||z|^k` of its terms.
pub(crate) fn relative_residual<T: Scalar>(coeffs: &[T], z: Complex<T>) -> T {
    let (p, _) = poly_eval(coeffs, z);
    let r = z.norm();
    let mut scale = T::zero();
    let mut rk = T::one();
    for &c in coeffs {
        scale += c.abs() * rk;
        rk *= r;
    }
    if scale == T::zero() {
        p.norm()
    } else {
        p.norm() / scale
    }
}

/// Newton iteration on `p`, keeping an iterate only while it lowers the
/// residual.
pub(crate) fn polish<T: Scalar>(coeffs: &[T], mut z: Complex<T>, iters: usize) -> Complex<T> {
    let mut best = poly_eval(coeffs, z).0.norm();
    for _ in 0..iters {
        if best == T::zero() {
            break;
        }
        let (p, dp) = poly_eval(coeffs, z);
        if dp.norm() == T::zero() {
            break;
        }
        let cand = z - p / dp;
        let r = poly_eval(coeffs, cand).0.norm();
        if !(r < best) {
            break;
        }
        best = r;
        z = cand;
    }
    z
}

/// Roots of `c3 x³ + c2 x² + c1 x + c0`.
pub fn cubic_roots<T: Scalar>(c3: T, c2: T, c1: T, c0: T) -> Result<CubicRoots<T>> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if !(c3.abs() > T::lit(1e-14) * scale) {
        return Err(Error::DegenerateLeadingCoefficient {
            leading: c3.as_f64(),
            scale: scale.as_f64(),
        });
    }
    let coeffs = [c0, c1, c2, c3];
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    let three = T::lit(3.0);
    let shift = -a / three;
    let p = b - a * a / three;
    let q = T::lit(2.0) * a * a * a / T::lit(27.0) - a * b / three + c;
    let half_q = q / T::lit(2.0);
    let third_p = p / three;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let zero = T::zero();
    let mut roots: [Complex<T>; 3];
    if disc > zero {
        // One real root and a conjugate pair.
        let big = -half_q.signum() * (half_q.abs() + disc.sqrt()).cbrt();
        let small = if big != zero { -third_p / big } else { zero };
        let t_real = big + small;
        let re = -t_real / T::lit(2.0) + shift;
        let im = T::lit(0.75).sqrt() * (big - small).abs();
        let x_real = polish_real(&coeffs, t_real + shift);
        let mut z = polish(&coeffs, Complex::new(re, im), 16);
        if z.im < zero {
            z = z.conj();
        }
        if z.im == zero {
            // Pair collapsed onto the real axis; keep it as a double real root.
            roots = [Complex::new(x_real, zero), z, z];
        } else {
            roots = [Complex::new(x_real, zero), z, z.conj()];
        }
    } else if p == zero {
        let x = polish_real(&coeffs, shift);
        roots = [Complex::new(x, zero); 3];
    } else {
        // Three real roots, trigonometric form.
        let r = T::lit(2.0) * (-third_p).sqrt();
        let arg = (three * q / (T::lit(2.0) * p) * (-three / p).sqrt())
            .max(-T::one())
            .min(T::one());
        let phi = arg.acos() / three;
        let tau = T::TAU() / three;
        roots = [zero, T::one(), T::lit(2.0)].map(|k| {
            let t = r * (phi - tau * k).cos();
            Complex::new(polish_real(&coeffs, t + shift), zero)
        });
    }
    sort_roots(&mut roots);
    let residuals = roots.map(|z| relative_residual(&coeffs, z));
    Ok(CubicRoots { roots, residuals })
}

fn polish_real<T: Scalar>(coeffs: &[T], x: T) -> T {
    polish(coeffs, Complex::new(x, T::zero()), 16).re
}

fn sort_roots<T: Scalar>(roots: &mut [Complex<T>; 3]) {
    roots.sort_by(|x, y| {
        let xr = x.im == T::zero();
        let yr = y.im == T::zero();
        yr.cmp(&xr)
            .then(x.re.partial_cmp(&y.re).unwrap_or(std::cmp::Ordering::Equal))
            .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(z: Complex<f64>, re: f64, im: f64, tol: f64) -> bool {
        (z.re - re).abs() < tol && (z.im - im).abs() < tol
    }

    #[test]
    fn roots_of_unity() {
        let r = cubic_roots(1.0, 0.0, 0.0, -1.0).unwrap();
        let h = 0.75f64.sqrt();
        assert!(close(r.roots[0], 1.0, 0.0, 1e-14));
        assert!(close(r.roots[1], -0.5, h, 1e-14));
        assert!(close(r.roots[2], -0.5, -h, 1e-14));
        assert!(r.max_residual() < 1e-15);
    }

    #[test]
    fn factored_polynomial() {
        let r = cubic_roots(1.0, -6.0, 11.0, -6.0).unwrap();
        assert_eq!(r.real_roots().len(), 3);
        for (z, want) in r.roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!(close(*z, want, 0.0, 1e-13), "{z}");
        }
    }

    #[test]
    fn triple_and_double_roots() {
        let r = cubic_roots(2.0f64, -6.0, 6.0, -2.0).unwrap();
        for z in r.roots {
            assert!((z.re - 1.0).abs() < 1e-5 && z.im.abs() < 1e-5);
        }
        // (x - 1)^2 (x + 2)
        let r = cubic_roots(1.0f64, 0.0, -3.0, 2.0).unwrap();
        assert!(close(r.roots[0], -2.0, 0.0, 1e-12));
        assert!(r.max_residual() < 1e-12);
    }

    #[test]
    fn degenerate_leading_coefficient() {
        assert!(matches!(
            cubic_roots(1e-20, 1.0, 1.0, 1.0),
            Err(Error::DegenerateLeadingCoefficient { .. })
        ));
    }

    #[test]
    fn scaled_coefficients() {
        // 4 n^3 - 0.72 n^2 + 0.0949 n - 0.005625 has the real root 0.09.
        let r = cubic_roots(4.0f64, -0.72, 0.0949, -0.005625).unwrap();
        assert_eq!(r.real_roots(), vec![r.roots[0].re]);
        assert!((r.roots[0].re - 0.09).abs() < 1e-15);
    }

    #[test]
    fn single_precision_build() {
        let r = cubic_roots(1.0f32, -6.0, 11.0, -6.0).unwrap();
        for (z, want) in r.roots.iter().zip([1.0f32, 2.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-4);
        }
    }
}
