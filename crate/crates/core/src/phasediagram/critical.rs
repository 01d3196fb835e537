use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{photon_fluctuations, steady_covariance};
use crate::model::SystemParams;
use crate::numerics::{fit_loglog, LogLogFit, Tolerances};
use crate::scalar::Scalar;
use crate::semiclassical::{pair_discriminant, BranchId};
use crate::stability::{classify_params, routh_hurwitz_margins};

use super::boundary::{trace_boundary, BoundaryKind, TraceOptions};

/// Point where the reference soft line meets the II/III fold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    pub dtilde: T,
    pub g: T,
    /// Reference-branch soft margin at the point.
    pub soft_residual: T,
    /// II/III discriminant at the point.
    pub fold_residual: T,
    /// Seed from the traced soft line before refinement.
    pub seed: (T, T),
    pub iterations: usize,
}

/// Locates the critical point.
///
/// The reference soft line is traced from the red-detuned side and the
/// point of smallest II/III discriminant on it seeds the refinement. The
/// two lines are tangent at the critical point, so a Newton solve on the
/// pair of margins is singular there; instead the point is refined as the
/// triple root of the photon-number cubic, `R = 0` together with the II/III
/// midpoint coinciding with `G²`, which has a regular Jacobian.
pub fn find_critical_point<T: Scalar>(kappa: T, gamma: T, omega_m: T) -> Result<CriticalPoint<T>> {
    let template = SystemParams::from_effective(T::zero(), T::zero(), kappa, gamma, omega_m)?;
    if kappa <= T::zero() {
        return Err(Error::NoIntersection("the soft lines need kappa > 0".into()));
    }
    let c = (omega_m * omega_m + gamma * gamma) / (T::lit(2.0) * omega_m);
    // Start well left of the meeting point on the reference soft line,
    // G² = 2c(κ² + Δ̃²)/(4|Δ̃|).
    let d0 = -T::lit(2.0) * kappa;
    let g0 = (c * (kappa * kappa + d0 * d0) / (T::lit(2.0) * d0.abs())).sqrt();
    let span = T::lit(4.0) * kappa;
    let opts = TraceOptions {
        step: T::lit(1e-3) * kappa / T::lit(0.25),
        max_points: 20_000,
        dtilde_bounds: (d0 - span, -T::lit(0.2) * kappa),
        g_bounds: (T::zero(), T::lit(10.0) * (g0 + T::one())),
        direction: T::one(),
        residual: T::lit(1e-12).max(T::lit(100.0) * T::epsilon()) * omega_m.powi(2).max(T::one()),
    };
    let line = trace_boundary(&template, BoundaryKind::Soft(BranchId::I), (d0, g0), &opts)?;
    let mut best: Option<(T, (T, T))> = None;
    for &(d, g) in &line.points {
        let r = pair_discriminant(&template.with_effective(d, g)?).abs();
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, (d, g)));
        }
    }
    let (r_min, seed) = best.ok_or_else(|| Error::NoIntersection("empty soft line".into()))?;
    // Along the traced line R is quadratic in the distance to the tangency;
    // with the trace step this bounds how small R must get.
    let scale = (kappa * c).powi(2);
    if r_min > T::lit(1e-3) * scale {
        return Err(Error::NoIntersection(format!(
            "smallest II/III discriminant on the soft line is {}",
            r_min.as_f64()
        )));
    }

    // Newton on (R, u/2 + cΔ̃) in the variables (Δ̃, u = G²).
    let (mut d, mut u) = (seed.0, seed.1 * seed.1);
    let four = T::lit(4.0);
    let mut iterations = 0;
    for _ in 0..50 {
        iterations += 1;
        let f1 = u * u - four * kappa * kappa * c * c - four * c * u * d;
        let f2 = u / T::lit(2.0) + c * d;
        let (a11, a12) = (-four * c * u, T::lit(2.0) * u - four * c * d);
        let (a21, a22) = (c, T::lit(0.5));
        let det = a11 * a22 - a12 * a21;
        if det == T::zero() {
            break;
        }
        let dd = (-f1 * a22 + f2 * a12) / det;
        let du = (-a11 * f2 + a21 * f1) / det;
        d += dd;
        u += du;
        if dd.abs() < T::epsilon() * (T::one() + d.abs()) && du.abs() < T::epsilon() * (T::one() + u.abs()) {
            break;
        }
    }
    if !(u > T::zero() && d.is_finite()) {
        return Err(Error::NoIntersection("refinement diverged".into()));
    }
    let g = u.sqrt();
    let p = template.with_effective(d, g)?;
    let soft_residual = routh_hurwitz_margins(&p, BranchId::I)?.soft;
    let fold_residual = pair_discriminant(&p);
    Ok(CriticalPoint { dtilde: d, g, soft_residual, fold_residual, seed, iterations })
}

/// Side from which `G → G_c` is approached along `Δ̃ = Δ̃_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachSide {
    /// `G < G_c`, on the reference branch.
    Below,
    /// `G > G_c`, on whichever branch is stable there.
    Above,
}

/// Controls for [`estimate_exponents`].
#[derive(Clone, Copy, Debug)]
pub struct ExponentOptions<T> {
    /// Smallest and largest `|G − G_c|`.
    pub window: (T, T),
    /// Log-spaced samples across the window.
    pub samples: usize,
    pub side: ApproachSide,
    /// Offsets below this are dropped.
    pub floor: T,
}

impl<T: Scalar> Default for ExponentOptions<T> {
    fn default() -> Self {
        ExponentOptions {
            window: (T::lit(1e-4), T::lit(1e-2)),
            samples: 21,
            side: ApproachSide::Below,
            floor: T::lit(1e-5),
        }
    }
}

/// Power-law fits of the asymptotic decay rate and of the photon-number
/// fluctuations near the critical point.
#[derive(Clone, Debug, Serialize)]
pub struct Exponents<T> {
    pub critical: CriticalPoint<T>,
    pub side: ApproachSide,
    pub branch: BranchId,
    pub offsets: Vec<T>,
    /// `|Re λ₁|` per offset.
    pub adr: Vec<T>,
    /// `⟨δa†δa⟩` per offset.
    pub fluctuations: Vec<T>,
    pub nu_adr: LogLogFit<T>,
    pub nu_c: LogLogFit<T>,
}

/// Fits `κ_ADR ∝ |G − G_c|^ν_ADR` and `⟨δa†δa⟩ ∝ |G − G_c|^ν_c` along the
/// critical detuning.
pub fn estimate_exponents<T: Scalar>(
    kappa: T,
    gamma: T,
    omega_m: T,
    opts: &ExponentOptions<T>,
) -> Result<Exponents<T>> {
    let (lo, hi) = opts.window;
    if !(lo > T::zero() && hi > lo) || opts.samples < 2 {
        return Err(Error::InvalidRange("exponent window must satisfy 0 < lo < hi with >= 2 samples".into()));
    }
    let critical = find_critical_point(kappa, gamma, omega_m)?;
    let template = SystemParams::from_effective(critical.dtilde, critical.g, kappa, gamma, omega_m)?;
    let tol = Tolerances::default();
    let (llo, lhi) = (lo.ln(), hi.ln());
    let offsets: Vec<T> = (0..opts.samples)
        .map(|i| (llo + (lhi - llo) * T::lit(i as f64) / T::lit((opts.samples - 1) as f64)).exp())
        .filter(|&d| d >= opts.floor)
        .collect();
    let point = |d: T| -> Result<SystemParams<T>> {
        let g = match opts.side {
            ApproachSide::Below => critical.g - d,
            ApproachSide::Above => critical.g + d,
        };
        if g < T::zero() {
            return Err(Error::FitRangeCrossesBoundary { offset: d.as_f64() });
        }
        template.with_effective(critical.dtilde, g)
    };
    let branch = match opts.side {
        ApproachSide::Below => BranchId::I,
        ApproachSide::Above => {
            let far = *offsets.last().ok_or(Error::InsufficientPoints { needed: 5, got: 0 })?;
            let sig = classify_params(&point(far)?, &tol);
            match sig.stable_set().as_slice() {
                [only] => *only,
                _ => return Err(Error::FitRangeCrossesBoundary { offset: far.as_f64() }),
            }
        }
    };
    let mut adr = Vec::with_capacity(offsets.len());
    let mut fluct = Vec::with_capacity(offsets.len());
    for &d in &offsets {
        let p = point(d)?;
        let sig = classify_params(&p, &tol);
        let report = match sig.reports[branch.index()] {
            Some(r) if r.class.is_stable() => r,
            _ => return Err(Error::FitRangeCrossesBoundary { offset: d.as_f64() }),
        };
        adr.push(report.gap_real);
        let state = steady_covariance(&p, branch)?;
        fluct.push(photon_fluctuations(&state.v)?);
    }
    let nu_adr = fit_loglog(&offsets, &adr)?;
    let nu_c = fit_loglog(&offsets, &fluct)?;
    Ok(Exponents { critical, side: opts.side, branch, offsets, adr, fluctuations: fluct, nu_adr, nu_c })
}
