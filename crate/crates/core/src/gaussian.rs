//! Gaussian fluctuations around a stable branch: steady covariance, moment
//! dynamics, entanglement, squeezing and the Wigner density.
//!
//! Quadratures are `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`, so the vacuum
//! covariance is `I/2`. First moments are fluctuations around the branch
//! amplitudes; the steady state is centred at the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::{
    det2, integrate_ode, solve_lyapunov, symmetric_eigenvalues, Mat4, OdeOptions, Tolerances, Vec4,
};
use crate::scalar::Scalar;
use crate::semiclassical::BranchId;
use crate::stability::{diffusion, drift_matrix};

/// Gaussian state given by first moments and covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianState<T> {
    pub x_s: Vec4<T>,
    pub v: Mat4<T>,
}

impl<T: Scalar> GaussianState<T> {
    pub fn vacuum() -> Self {
        GaussianState { x_s: [T::zero(); 4], v: Mat4::identity().scale(T::lit(0.5)) }
    }
}

/// Steady state of branch `id`; the branch must be strictly stable.
pub fn steady_covariance<T: Scalar>(p: &SystemParams<T>, id: BranchId) -> Result<GaussianState<T>> {
    steady_covariance_with(p, id, &Tolerances::default())
}

/// [`steady_covariance`] with explicit tolerances; `eps_stab` is scaled by
/// `ω_m`.
pub fn steady_covariance_with<T: Scalar>(
    p: &SystemParams<T>,
    id: BranchId,
    tol: &Tolerances<T>,
) -> Result<GaussianState<T>> {
    let a = drift_matrix(p, id)?.a;
    let v = solve_lyapunov(&a, &diffusion(p), tol.eps_stab * p.omega_m)?;
    check_physical(&v)?;
    Ok(GaussianState { x_s: [T::zero(); 4], v })
}

/// Sampled solution of the first- and second-moment equations.
#[derive(Clone, Debug, Serialize)]
pub struct MomentTrajectory<T> {
    pub times: Vec<T>,
    pub x: Vec<Vec4<T>>,
    pub v: Vec<Mat4<T>>,
}

/// Integrates `ẋ = A x` and `V̇ = A V + V Aᵀ + D` for branch `id` from
/// `(x0, v0)` at `t = 0`.
pub fn evolve_moments<T: Scalar>(
    p: &SystemParams<T>,
    id: BranchId,
    x0: Vec4<T>,
    v0: &Mat4<T>,
    times: &[T],
    tol: T,
) -> Result<MomentTrajectory<T>> {
    let a = drift_matrix(p, id)?.a;
    evolve_moments_with(&a, &diffusion(p), x0, v0, times, tol)
}

/// [`evolve_moments`] for an explicit drift and diffusion matrix.
pub fn evolve_moments_with<T: Scalar>(
    a: &Mat4<T>,
    d: &Mat4<T>,
    x0: Vec4<T>,
    v0: &Mat4<T>,
    times: &[T],
    tol: T,
) -> Result<MomentTrajectory<T>> {
    if !(x0.iter().all(|v| v.is_finite()) && v0.is_finite()) {
        return Err(Error::NonFinite { name: "initial moments" });
    }
    let mut y0 = x0.to_vec();
    y0.extend(v0.0.iter().flatten().copied());
    let at = a.transpose();
    let traj = integrate_ode(
        |_, y, dy| {
            let x = [y[0], y[1], y[2], y[3]];
            let ax = a.mul_vec(&x);
            dy[..4].copy_from_slice(&ax);
            let v = Mat4::from_fn(|i, j| y[4 + 4 * i + j]);
            let dv = *a * v + v * at + *d;
            for i in 0..4 {
                for j in 0..4 {
                    dy[4 + 4 * i + j] = dv.0[i][j];
                }
            }
        },
        T::zero(),
        &y0,
        times,
        &OdeOptions::with_tol(tol),
    )?;
    Ok(MomentTrajectory {
        times: traj.times,
        x: traj.states.iter().map(|s| [s[0], s[1], s[2], s[3]]).collect(),
        v: traj.states.iter().map(|s| Mat4::from_fn(|i, j| s[4 + 4 * i + j])).collect(),
    })
}

/// Symplectic eigenvalues `(ν₋, ν₊)` of a positive-definite two-mode
/// covariance matrix.
pub fn symplectic_eigenvalues<T: Scalar>(v: &Mat4<T>) -> Result<(T, T)> {
    symplectic_pair(v, false)
}

/// With `V = LLᵀ`, the antisymmetric `K = LᵀJL` is similar to `JV` and has
/// eigenvalues `±iν₋, ±iν₊`. Splitting `K` into its self-dual and
/// anti-self-dual parts `a±` gives `ν± = (|a₊| ± |a₋|)/2` up to order, which
/// avoids the cancellation in `Σ² − 4 det V` both when the two values
/// coincide and when they are far apart. `partial` uses `J ⊕ (−J)`, i.e.
/// the partially transposed state.
fn symplectic_pair<T: Scalar>(v: &Mat4<T>, partial: bool) -> Result<(T, T)> {
    let l = cholesky(v).ok_or_else(|| Error::UnphysicalCovariance {
        nu_min: symmetric_eigenvalues(v)[0].as_f64(),
    })?;
    let (z, o) = (T::zero(), T::one());
    let s = if partial { -o } else { o };
    let j = Mat4([[z, o, z, z], [-o, z, z, z], [z, z, z, s], [z, z, -s, z]]);
    let k = (l.transpose() * j * l).0;
    let norm3 = |x: T, y: T, w: T| x.hypot(y).hypot(w);
    let plus = norm3(k[0][1] + k[2][3], k[0][2] - k[1][3], k[0][3] + k[1][2]);
    let minus = norm3(k[0][1] - k[2][3], k[0][2] + k[1][3], k[0][3] - k[1][2]);
    let half = T::lit(0.5);
    Ok(((plus - minus).abs() * half, (plus + minus) * half))
}

/// Lower Cholesky factor; `None` unless `v` is positive definite.
fn cholesky<T: Scalar>(v: &Mat4<T>) -> Option<Mat4<T>> {
    let mut l = Mat4::zeros();
    for i in 0..4 {
        for j in 0..=i {
            let mut s = v.0[i][j];
            for k in 0..j {
                s -= l.0[i][k] * l.0[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l.0[i][i] = s.sqrt();
            } else {
                l.0[i][j] = s / l.0[j][j];
            }
        }
    }
    Some(l)
}

/// Checks symmetry, positive definiteness and the uncertainty bound
/// `ν₋ ≥ 1/2 − 1e-9`.
pub fn check_physical<T: Scalar>(v: &Mat4<T>) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite { name: "covariance" });
    }
    if v.asymmetry() > T::lit(1e-9) * v.max_abs().max(T::one()) {
        return Err(Error::UnphysicalCovariance { nu_min: f64::NAN });
    }
    let (nu, _) = symplectic_eigenvalues(v)?;
    if nu < T::lit(0.5 - 1e-9) {
        return Err(Error::UnphysicalCovariance { nu_min: nu.as_f64() });
    }
    Ok(())
}

/// Partial-transpose entanglement measures of a two-mode covariance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntanglementReport<T> {
    /// `Σ = det α + det γ − 2 det β` over the 2×2 blocks.
    pub sigma: T,
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub eta_minus: T,
    /// Logarithmic negativity `max(0, −ln 2η⁻)`, in nats.
    pub log_neg: T,
    /// `η⁻ < 1/2`.
    pub entangled: bool,
}

/// Logarithmic negativity of a physical covariance matrix.
pub fn log_negativity<T: Scalar>(v: &Mat4<T>) -> Result<EntanglementReport<T>> {
    check_physical(v)?;
    let (da, dg, db) = (det2(&v.block(0, 0)), det2(&v.block(1, 1)), det2(&v.block(0, 1)));
    let sigma = da + dg - T::lit(2.0) * db;
    let (eta, _) = symplectic_pair(v, true)?;
    let half = T::lit(0.5);
    Ok(EntanglementReport {
        sigma,
        eta_minus: eta,
        log_neg: (-(T::lit(2.0) * eta).ln()).max(T::zero()),
        entangled: eta < half,
    })
}

/// Smallest covariance eigenvalue and smallest quadrature variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqueezingReport<T> {
    pub min_eigenvalue: T,
    pub min_quadrature_diagonal: T,
    /// Some hybrid quadrature is below the vacuum level.
    pub squeezed_hybrid: bool,
    /// Some single-mode quadrature is below the vacuum level.
    pub squeezed_local: bool,
}

pub fn squeezing_spectrum<T: Scalar>(v: &Mat4<T>) -> Result<SqueezingReport<T>> {
    check_physical(v)?;
    let half = T::lit(0.5);
    let min_eigenvalue = symmetric_eigenvalues(v)[0];
    let min_quadrature_diagonal = v.diag().iter().fold(T::infinity(), |a, &d| a.min(d));
    Ok(SqueezingReport {
        min_eigenvalue,
        min_quadrature_diagonal,
        squeezed_hybrid: min_eigenvalue < half,
        squeezed_local: min_quadrature_diagonal < half,
    })
}

/// Cavity photon-number fluctuation `⟨δa†δa⟩ = (V₁₁ + V₂₂ − 1)/2`.
pub fn photon_fluctuations<T: Scalar>(v: &Mat4<T>) -> Result<T> {
    check_physical(v)?;
    Ok(((v.0[0][0] + v.0[1][1] - T::one()) / T::lit(2.0)).max(T::zero()))
}

/// Wigner density `W(x) = exp(−½ δᵀV⁻¹δ) / (4π²√det V)` with `δ = x − x_s`.
pub fn wigner_density<T: Scalar>(state: &GaussianState<T>, x: &Vec4<T>) -> Result<T> {
    let det = state.v.det();
    if !(det >= T::lit(1e-14)) {
        return Err(Error::SingularCovariance { det: det.as_f64() });
    }
    let d = [0, 1, 2, 3].map(|i| x[i] - state.x_s[i]);
    let w = state.v.solve(&d).ok_or(Error::SingularCovariance { det: det.as_f64() })?;
    let q = d.iter().zip(&w).fold(T::zero(), |a, (u, v)| a + *u * *v);
    let norm = T::lit(4.0) * T::PI() * T::PI() * det.sqrt();
    Ok((-q / T::lit(2.0)).exp() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params_from_effective;
    use crate::numerics::lyapunov_residual;

    fn vacuum() -> Mat4<f64> {
        Mat4::identity().scale(0.5)
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let p = params_from_effective(-0.3f64, 0.0, 0.25, 0.1, 1.0).unwrap();
        let s = steady_covariance(&p, BranchId::I).unwrap();
        assert!((s.v - vacuum()).max_abs() < 1e-14);
    }

    #[test]
    fn vacuum_measures() {
        let e = log_negativity(&vacuum()).unwrap();
        assert!((e.sigma - 0.5).abs() < 1e-15);
        assert!((e.eta_minus - 0.5).abs() < 1e-15);
        assert_eq!(e.log_neg, 0.0);
        assert!(!e.entangled);
        let s = squeezing_spectrum(&vacuum()).unwrap();
        assert!((s.min_eigenvalue - 0.5).abs() < 1e-15 && s.min_quadrature_diagonal == 0.5);
        assert!(!s.squeezed_hybrid && !s.squeezed_local);
        assert_eq!(photon_fluctuations(&vacuum()).unwrap(), 0.0);
        let peak = wigner_density(&GaussianState::vacuum(), &[0.0; 4]).unwrap();
        assert!((peak - 1.0 / (std::f64::consts::PI.powi(2))).abs() < 1e-15);
    }

    #[test]
    fn thermal_is_separable() {
        let v = Mat4::identity().scale(1.7);
        assert_eq!(log_negativity(&v).unwrap().log_neg, 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        // EPR-type state with squeezing r has E_N = 2r.
        let r: f64 = 0.4;
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let v = Mat4([[c, 0.0, s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, -s, 0.0, c]]);
        let e = log_negativity(&v).unwrap();
        assert!((e.log_neg - 2.0 * r).abs() < 1e-12, "{}", e.log_neg);
        let (lo, hi) = symplectic_eigenvalues(&v).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_unphysical() {
        let v = Mat4::identity().scale(0.3);
        assert!(matches!(log_negativity(&v), Err(Error::UnphysicalCovariance { .. })));
        assert!(matches!(
            wigner_density(&GaussianState { x_s: [0.0; 4], v: Mat4::zeros() }, &[0.0; 4]),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn driven_steady_state() {
        let p = params_from_effective(-0.8f64, 0.4, 0.25, 0.05, 1.0).unwrap();
        let s = steady_covariance(&p, BranchId::I).unwrap();
        let a = drift_matrix(&p, BranchId::I).unwrap().a;
        assert!(lyapunov_residual(&a, &s.v, &diffusion(&p)) < 1e-10);
        let (nu, _) = symplectic_eigenvalues(&s.v).unwrap();
        assert!(nu >= 0.5 - 1e-9);
    }

    #[test]
    fn moments_fixed_point() {
        let p = params_from_effective(-0.8f64, 0.4, 0.25, 0.05, 1.0).unwrap();
        let s = steady_covariance(&p, BranchId::I).unwrap();
        let tol = 1e-10;
        let tr = evolve_moments(&p, BranchId::I, [0.0; 4], &s.v, &[5.0, 20.0], tol).unwrap();
        for (x, v) in tr.x.iter().zip(&tr.v) {
            assert!(x.iter().all(|c| c.abs() < 10.0 * tol));
            assert!((*v - s.v).max_abs() < 10.0 * tol * s.v.max_abs().max(1.0));
        }
    }

    #[test]
    fn unstable_branch_has_no_steady_state() {
        let p = params_from_effective(0.3f64, 0.2, 0.25, 0.0, 1.0).unwrap();
        assert!(matches!(steady_covariance(&p, BranchId::I), Err(Error::UnstableDrift { .. })));
    }

    #[test]
    fn wigner_is_even() {
        let p = params_from_effective(-0.8f64, 0.4, 0.25, 0.05, 1.0).unwrap();
        let s = steady_covariance(&p, BranchId::I).unwrap();
        let d = [0.3, -0.2, 0.7, 0.1];
        let plus = wigner_density(&s, &d).unwrap();
        let minus = wigner_density(&s, &d.map(|x: f64| -x)).unwrap();
        assert!((plus - minus).abs() < 1e-15 * plus.max(1.0));
    }
}
