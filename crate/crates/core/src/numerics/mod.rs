//! Self-contained numerical kernels: cubic roots, 4×4 eigenvalues, the
//! continuous Lyapunov equation, adaptive Runge–Kutta integration and
//! log-log regression.

mod cubic;
mod eig;
mod fit;
mod lyapunov;
mod matrix;
mod ode;

pub use cubic::{cubic_roots, CubicRoots};
pub use eig::{characteristic_quartic, eig4, Spectrum4};
pub use fit::{fit_loglog, linear_fit, LogLogFit};
pub use lyapunov::{lyapunov_residual, solve_lyapunov, solve_lyapunov_unchecked};
pub use matrix::{det2, symmetric_eigenvalues, Mat4, Vec4};
pub use ode::{integrate_ode, OdeOptions, Trajectory};


use crate::scalar::Scalar;

/// Numerical thresholds shared across modules.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Tolerances<T> {
    /// Strict-stability margin: drift spectra must satisfy `max Re λ < -eps_stab`.
    pub eps_stab: T,
    /// Half-width of the band around `Re λ = 0` treated as a boundary.
    pub eps_band: T,
    /// Relative residual accepted for polynomial roots.
    pub root_residual: T,
    /// Relative residual accepted for Lyapunov solutions.
    pub lyapunov_residual: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            eps_stab: T::lit(1e-9),
            eps_band: T::lit(1e-7),
            root_residual: T::lit(1e-9),
            lyapunov_residual: T::lit(1e-10),
        }
    }
}
