//! Parameter records and the map between bare drive coordinates `(Δ, Ẽ)`
//! and effective coordinates `(Δ̃, G)`.
//!
//! All rates and detunings are dimensionless multiples of the mechanical
//! frequency when `omega_m = 1`. The effective pair is the canonical
//! representation; the bare pair is derived from it (or the other way round
//! when constructed with [`SystemParams::from_bare`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::cubic_roots;
use crate::scalar::Scalar;

/// Physical parameters of the driven, damped optomechanical system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemParams<T> {
    /// Cavity amplitude damping rate.
    pub kappa: T,
    /// Mechanical damping rate.
    pub gamma: T,
    /// Mechanical frequency.
    pub omega_m: T,
    /// Bare detuning `Δ`.
    pub delta: T,
    /// Rescaled drive `Ẽ = g₀E`, non-negative.
    pub e_tilde: T,
    /// Effective detuning `Δ̃`.
    pub dtilde: T,
    /// Effective coupling `G`, non-negative.
    pub g_eff: T,
}

fn check_finite<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name })
    }
}

fn check_rates<T: Scalar>(kappa: T, gamma: T, omega_m: T) -> Result<()> {
    check_finite("kappa", kappa)?;
    check_finite("gamma", gamma)?;
    check_finite("omega_m", omega_m)?;
    if omega_m <= T::zero() {
        return Err(Error::NonPositiveFrequency(omega_m.as_f64()));
    }
    if kappa < T::zero() {
        return Err(Error::NegativeRate { name: "kappa", value: kappa.as_f64() });
    }
    if gamma < T::zero() {
        return Err(Error::NegativeRate { name: "gamma", value: gamma.as_f64() });
    }
    if kappa == T::zero() && gamma == T::zero() {
        return Err(Error::NoBath);
    }
    Ok(())
}

/// Radiation-pressure shift per photon, `s = 2ω_m/(ω_m² + γ²)`.
pub fn shift_per_photon<T: Scalar>(gamma: T, omega_m: T) -> T {
    T::lit(2.0) * omega_m / (omega_m * omega_m + gamma * gamma)
}

impl<T: Scalar> SystemParams<T> {
    /// Builds parameters from the effective detuning and coupling.
    ///
    /// The bare coordinates follow from `Δ = Δ̃ − sG²` and
    /// `Ẽ = G·√(Δ̃² + κ²)`, which is the stationary cavity equation evaluated
    /// on the reference branch `ñ₁ = G²`.
    pub fn from_effective(dtilde: T, g_eff: T, kappa: T, gamma: T, omega_m: T) -> Result<Self> {
        check_rates(kappa, gamma, omega_m)?;
        check_finite("dtilde", dtilde)?;
        check_finite("g_eff", g_eff)?;
        if g_eff < T::zero() {
            return Err(Error::NegativeParameter { name: "g_eff", value: g_eff.as_f64() });
        }
        let s = shift_per_photon(gamma, omega_m);
        Ok(SystemParams {
            kappa,
            gamma,
            omega_m,
            delta: dtilde - s * g_eff * g_eff,
            e_tilde: g_eff * dtilde.hypot(kappa),
            dtilde,
            g_eff,
        })
    }

    /// Builds parameters from the bare detuning and drive.
    ///
    /// The reference photon number `ñ₁` is the smallest non-negative root of
    /// the photon-number cubic. That is the root reached by ramping `Ẽ` up
    /// from zero: the lowest root follows the first rising segment of
    /// `Ẽ²(ñ)` and, once that segment ends at a fold, the single remaining
    /// root is again the smallest.
    ///
    /// Composing with [`SystemParams::from_effective`] is the identity only
    /// where `G²` is the smallest root for the given `(Δ̃, G)`; elsewhere the
    /// bare point is shared with another branch and maps back to it.
    pub fn from_bare(delta: T, e_tilde: T, kappa: T, gamma: T, omega_m: T) -> Result<Self> {
        check_rates(kappa, gamma, omega_m)?;
        check_finite("delta", delta)?;
        check_finite("e_tilde", e_tilde)?;
        if e_tilde < T::zero() {
            return Err(Error::NegativeParameter { name: "e_tilde", value: e_tilde.as_f64() });
        }
        let s = shift_per_photon(gamma, omega_m);
        let [c0, c1, c2, c3] = photon_cubic(delta, e_tilde, kappa, s);
        let n1 = if e_tilde == T::zero() {
            T::zero()
        } else {
            let roots = cubic_roots(c3, c2, c1, c0)?;
            let band = T::lit(1e-12);
            roots
                .roots
                .iter()
                .filter(|z| z.im.abs() <= T::lit(1e-9) * T::one().max(z.re.abs()) && z.re > -band)
                .map(|z| z.re.max(T::zero()))
                .fold(None, |acc: Option<T>, n| Some(acc.map_or(n, |a| a.min(n))))
                .ok_or_else(|| Error::CubicSolveFailure {
                    coefficients: [c3.as_f64(), c2.as_f64(), c1.as_f64(), c0.as_f64()],
                })?
        };
        Ok(SystemParams {
            kappa,
            gamma,
            omega_m,
            delta,
            e_tilde,
            dtilde: delta + s * n1,
            g_eff: n1.sqrt(),
        })
    }

    /// Same physical system at another effective point.
    pub fn with_effective(&self, dtilde: T, g_eff: T) -> Result<Self> {
        Self::from_effective(dtilde, g_eff, self.kappa, self.gamma, self.omega_m)
    }

    /// Same physical system at another bare point.
    pub fn with_bare(&self, delta: T, e_tilde: T) -> Result<Self> {
        Self::from_bare(delta, e_tilde, self.kappa, self.gamma, self.omega_m)
    }

    /// `s = 2ω_m/(ω_m² + γ²)`.
    pub fn shift_per_photon(&self) -> T {
        shift_per_photon(self.gamma, self.omega_m)
    }

    /// Coefficients `[c0, c1, c2, c3]` of the photon-number cubic
    /// `[(Δ + sñ)² + κ²]ñ − Ẽ² = 0`, lowest order first.
    pub fn photon_cubic(&self) -> [T; 4] {
        photon_cubic(self.delta, self.e_tilde, self.kappa, self.shift_per_photon())
    }

    /// Relative residual of `n` in the photon-number cubic.
    pub fn photon_cubic_residual(&self, n: T) -> T {
        let c = self.photon_cubic();
        let terms = [c[0], c[1] * n, c[2] * n * n, c[3] * n * n * n];
        let sum = terms.iter().fold(T::zero(), |a, &t| a + t);
        let scale = terms.iter().fold(T::zero(), |a, &t| a + t.abs());
        if scale == T::zero() {
            sum.abs()
        } else {
            sum.abs() / scale
        }
    }
}

fn photon_cubic<T: Scalar>(delta: T, e_tilde: T, kappa: T, s: T) -> [T; 4] {
    let two = T::lit(2.0);
    [-e_tilde * e_tilde, delta * delta + kappa * kappa, two * delta * s, s * s]
}

/// Free-function form of [`SystemParams::from_effective`].
pub fn params_from_effective<T: Scalar>(
    dtilde: T,
    g_eff: T,
    kappa: T,
    gamma: T,
    omega_m: T,
) -> Result<SystemParams<T>> {
    SystemParams::from_effective(dtilde, g_eff, kappa, gamma, omega_m)
}

/// Free-function form of [`SystemParams::from_bare`].
pub fn effective_from_bare<T: Scalar>(
    delta: T,
    e_tilde: T,
    kappa: T,
    gamma: T,
    omega_m: T,
) -> Result<SystemParams<T>> {
    SystemParams::from_bare(delta, e_tilde, kappa, gamma, omega_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drive_has_no_shift() {
        let p = params_from_effective(0.0, 0.0, 0.25, 0.0, 1.0).unwrap();
        assert_eq!(p.delta, 0.0);
        assert_eq!(p.e_tilde, 0.0);
    }

    #[test]
    fn resonant_example() {
        let p = params_from_effective(0.0f64, 0.3, 0.25, 0.0, 1.0).unwrap();
        assert!((p.delta + 0.18).abs() < 1e-15);
        assert!((p.e_tilde - 0.075).abs() < 1e-15);
        // Forward solve: G² = 0.09 must be a root of the cubic.
        assert!(p.photon_cubic_residual(0.09) < 1e-12);
        let back = effective_from_bare(-0.18f64, 0.075, 0.25, 0.0, 1.0).unwrap();
        assert!(back.dtilde.abs() < 1e-12);
        assert!((back.g_eff - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_drive_from_bare() {
        for delta in [-3.0, -0.2, 0.0, 1.7] {
            let p = effective_from_bare(delta, 0.0, 0.25, 0.1, 1.0).unwrap();
            assert_eq!(p.dtilde, delta);
            assert_eq!(p.g_eff, 0.0);
        }
    }

    #[test]
    fn bistable_window_picks_lowest_root() {
        // Δ = −0.6 with κ = 0.25 has three positive roots for Ẽ near 0.14.
        let p = effective_from_bare(-0.6f64, 0.14, 0.25, 0.1, 1.0).unwrap();
        let roots = cubic_roots(
            p.photon_cubic()[3],
            p.photon_cubic()[2],
            p.photon_cubic()[1],
            p.photon_cubic()[0],
        )
        .unwrap();
        let real = roots.real_roots();
        assert_eq!(real.len(), 3);
        let n1 = p.g_eff * p.g_eff;
        assert!((n1 - real[0]).abs() < 1e-12 * real[2]);
        assert!(p.photon_cubic_residual(n1) < 1e-10);
    }

    #[test]
    fn validation() {
        assert_eq!(
            params_from_effective(0.0, 0.1, 0.25, 0.0, 0.0),
            Err(Error::NonPositiveFrequency(0.0))
        );
        assert!(matches!(
            params_from_effective(0.0, 0.1, -0.25, 0.0, 1.0),
            Err(Error::NegativeRate { name: "kappa", .. })
        ));
        assert!(matches!(
            params_from_effective(0.0, 0.1, 0.25, -1.0, 1.0),
            Err(Error::NegativeRate { name: "gamma", .. })
        ));
        assert_eq!(params_from_effective(0.0, 0.1, 0.0, 0.0, 1.0), Err(Error::NoBath));
        assert!(matches!(
            params_from_effective(0.0, -0.1, 0.25, 0.0, 1.0),
            Err(Error::NegativeParameter { name: "g_eff", .. })
        ));
        assert!(matches!(
            effective_from_bare(0.0, -0.1, 0.25, 0.0, 1.0),
            Err(Error::NegativeParameter { name: "e_tilde", .. })
        ));
        assert!(matches!(
            params_from_effective(f64::NAN, 0.1, 0.25, 0.0, 1.0),
            Err(Error::NonFinite { name: "dtilde" })
        ));
    }

    #[test]
    fn single_precision() {
        let p = params_from_effective(0.0f32, 0.3, 0.25, 0.0, 1.0).unwrap();
        assert!((p.delta + 0.18).abs() < 1e-6);
    }
}
