//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use dptom_core::numerics::Mat4;
use dptom_core::Params;
use nalgebra::{Complex, Matrix4};
use rand::Rng;

pub fn to_na(m: &Mat4<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m.0[i][j])
}

pub fn from_na(m: &Matrix4<f64>) -> Mat4<f64> {
    Mat4::from_fn(|i, j| m[(i, j)])
}

/// Eigenvalues from nalgebra's real Schur form.
pub fn na_eigenvalues(m: &Mat4<f64>) -> Vec<Complex<f64>> {
    to_na(m).complex_eigenvalues().iter().copied().collect()
}

/// Largest real part of the spectrum, from nalgebra.
pub fn na_max_real(m: &Mat4<f64>) -> f64 {
    na_eigenvalues(m).iter().fold(f64::NEG_INFINITY, |a, z| a.max(z.re))
}

/// Characteristic polynomial `det(λI − A)`, lowest order first, by the
/// Faddeev–LeVerrier recursion.
pub fn faddeev_leverrier(a: &Mat4<f64>) -> [f64; 5] {
    let a = to_na(a);
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut m = Matrix4::<f64>::zeros();
    for k in 1..=4 {
        m = a * m + Matrix4::identity() * c[5 - k];
        c[4 - k] = -(a * m).trace() / k as f64;
    }
    c
}

/// `|p(z)| / Σ|c_k||z|^k`.
pub fn poly_relative_residual(c: &[f64], z: Complex<f64>) -> f64 {
    let mut val = Complex::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, ck) in c.iter().enumerate() {
        val += z.powu(k as u32) * *ck;
        scale += ck.abs() * z.norm().powi(k as i32);
    }
    val.norm() / scale
}

/// Uniform random parameters over the working window.
pub fn random_params(rng: &mut impl Rng) -> Params {
    let dtilde = rng.gen_range(-2.0..0.5);
    let g = rng.gen_range(0.0..1.0);
    let kappa = rng.gen_range(0.05..1.0);
    let gamma = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.001..0.5) };
    Params::from_effective(dtilde, g, kappa, gamma, 1.0).unwrap()
}

/// Random single-mode symplectic 2×2 matrix: rotation · squeeze · rotation.
pub fn random_local_symplectic(rng: &mut impl Rng) -> [[f64; 2]; 2] {
    let (t1, t2): (f64, f64) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
    let r: f64 = rng.gen_range(-1.0..1.0);
    let rot = |t: f64| [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
    let sq = [[r.exp(), 0.0], [0.0, (-r).exp()]];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    mul(rot(t1), mul(sq, rot(t2)))
}

/// `S V Sᵀ` with `S = S_a ⊕ S_b`.
pub fn apply_local(v: &Mat4<f64>, sa: [[f64; 2]; 2], sb: [[f64; 2]; 2]) -> Mat4<f64> {
    let mut s = Matrix4::<f64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            s[(i, j)] = sa[i][j];
            s[(i + 2, j + 2)] = sb[i][j];
        }
    }
    from_na(&(s * to_na(v) * s.transpose()))
}

/// Exact moment evolution `V(t) = V_s + e^{At}(V₀ − V_s)e^{Aᵀt}`.
pub fn exact_covariance(a: &Mat4<f64>, v_s: &Mat4<f64>, v0: &Mat4<f64>, t: f64) -> Mat4<f64> {
    let e = (to_na(a) * t).exp();
    from_na(&(to_na(v_s) + e * (to_na(v0) - to_na(v_s)) * e.transpose()))
}

/// Ordinary least squares with R².
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, icpt, 1.0 - ss_res / ss_tot)
}
