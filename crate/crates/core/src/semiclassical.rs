//! Stationary branches of the rescaled mean-field equations and their
//! nonlinear dynamics.
//!
//! The mean amplitudes obey
//!
//! ```text
//! α̇ = (iΔ − i(β + β*) − κ) α + Ẽ
//! β̇ = −(iω_m + γ) β − i|α|²
//! ```
//!
//! Stationary photon numbers `ñ = |α|²` solve a cubic. Branch I is the
//! reference root `ñ₁ = G²`; branches II and III are the remaining pair
//!
//! ```text
//! ñ = G²/2 − cΔ̃ ∓ √R / 2,   R = G⁴ − 4κ²c² − 4cG²Δ̃,   c = (ω_m² + γ²)/(2ω_m)
//! ```
//!
//! with II taking the minus sign and III the plus sign. II is the branch
//! that merges continuously with I on the soft line left of the critical
//! point, III the one that merges with I to its right.

use std::fmt;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::{integrate_ode, OdeOptions};
use crate::scalar::Scalar;

/// Branch label. Labels follow the closed-form expressions and are never
/// reordered by magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BranchId {
    I,
    II,
    III,
}

impl BranchId {
    pub const ALL: [BranchId; 3] = [BranchId::I, BranchId::II, BranchId::III];

    /// Zero-based position in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based branch number `j`.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(j: usize) -> Option<Self> {
        match j {
            1 => Some(BranchId::I),
            2 => Some(BranchId::II),
            3 => Some(BranchId::III),
            _ => None,
        }
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchId::I => "I",
            BranchId::II => "II",
            BranchId::III => "III",
        })
    }
}

impl std::str::FromStr for BranchId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "I" | "i" | "1" => Ok(BranchId::I),
            "II" | "ii" | "2" => Ok(BranchId::II),
            "III" | "iii" | "3" => Ok(BranchId::III),
            other => Err(format!("unknown branch `{other}` (expected I, II or III)")),
        }
    }
}

/// One stationary solution of the mean-field equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Branch<T> {
    pub id: BranchId,
    /// Photon number `ñⱼ` as a complex root; real for physical branches.
    pub n_tilde: Complex<T>,
    /// `ñⱼ` is real and non-negative (within the physicality band).
    pub physical: bool,
    /// Cavity amplitude `α̃ⱼ`; present for physical branches.
    pub alpha_tilde: Option<Complex<T>>,
    /// Mechanical amplitude `β̃ⱼ`; present for physical branches.
    pub beta_tilde: Option<Complex<T>>,
    /// Relative residual of `ñⱼ` in the photon-number cubic.
    pub cubic_residual: T,
}

impl<T: Scalar> Branch<T> {
    /// Real photon number; meaningful when `physical`.
    pub fn n(&self) -> T {
        self.n_tilde.re
    }

    pub fn amplitudes(&self) -> Result<(Complex<T>, Complex<T>)> {
        match (self.alpha_tilde, self.beta_tilde) {
            (Some(a), Some(b)) if self.physical => Ok((a, b)),
            _ => Err(Error::UnphysicalBranch(self.id.number())),
        }
    }
}

/// Applies the physicality band: real if `|Im| < 1e-9·max(1, |Re|)`,
/// non-negative if `Re > −1e-12` (small negatives clamped to zero).
fn physical_root<T: Scalar>(z: Complex<T>) -> Option<T> {
    let real = z.im.abs() < T::lit(1e-9) * T::one().max(z.re.abs());
    if real && z.re > -T::lit(1e-12) {
        Some(z.re.max(T::zero()))
    } else {
        None
    }
}

/// The three stationary photon numbers `[ñ₁, ñ₂, ñ₃]` as complex values.
pub fn photon_numbers<T: Scalar>(p: &SystemParams<T>) -> [Complex<T>; 3] {
    let two = T::lit(2.0);
    let c = T::one() / p.shift_per_photon();
    let g2 = p.g_eff * p.g_eff;
    let sum = g2 - two * c * p.dtilde;
    let prod = c * c * (p.dtilde * p.dtilde + p.kappa * p.kappa);
    // R = sum² − 4·prod, written to avoid cancellation in the common terms.
    let r = g2 * g2 - T::lit(4.0) * p.kappa * p.kappa * c * c - T::lit(4.0) * c * g2 * p.dtilde;
    let n1 = Complex::new(g2, T::zero());
    if r >= T::zero() {
        let sq = r.sqrt();
        let (minus, plus) = if sum > T::zero() {
            let plus = (sum + sq) / two;
            (prod / plus, plus)
        } else if sum < T::zero() {
            let minus = (sum - sq) / two;
            (minus, prod / minus)
        } else {
            (-sq / two, sq / two)
        };
        [n1, Complex::new(minus, T::zero()), Complex::new(plus, T::zero())]
    } else {
        let im = (-r).sqrt() / two;
        let re = sum / two;
        [n1, Complex::new(re, -im), Complex::new(re, im)]
    }
}

/// Discriminant `R` of the II/III pair; the pair is real where `R ≥ 0`.
pub fn pair_discriminant<T: Scalar>(p: &SystemParams<T>) -> T {
    let c = T::one() / p.shift_per_photon();
    let g2 = p.g_eff * p.g_eff;
    g2 * g2 - T::lit(4.0) * p.kappa * p.kappa * c * c - T::lit(4.0) * c * g2 * p.dtilde
}

fn amplitudes_for<T: Scalar>(p: &SystemParams<T>, n: T) -> (Complex<T>, Complex<T>) {
    let s = p.shift_per_photon();
    // Δ + sñ = Δ̃ + s(ñ − G²), evaluated without forming Δ.
    let shifted = p.dtilde + s * (n - p.g_eff * p.g_eff);
    let alpha = if n == p.g_eff * p.g_eff {
        // Branch I closed form: α̃₁ = G(κ + iΔ̃)/√(Δ̃² + κ²).
        let norm = p.dtilde.hypot(p.kappa);
        Complex::new(p.kappa, p.dtilde) * (p.g_eff / norm)
    } else {
        Complex::new(T::zero(), p.e_tilde) / Complex::new(shifted, p.kappa)
    };
    let beta = -Complex::new(alpha.norm_sqr(), T::zero()) / Complex::new(p.omega_m, -p.gamma);
    (alpha, beta)
}

/// Computes all three branches, flags physicality and fills amplitudes for
/// the physical ones.
pub fn photon_number_branches<T: Scalar>(p: &SystemParams<T>) -> [Branch<T>; 3] {
    let ns = photon_numbers(p);
    BranchId::ALL.map(|id| {
        let z = ns[id.index()];
        let phys = if id == BranchId::I { Some(z.re) } else { physical_root(z) };
        match phys {
            Some(n) => {
                let (a, b) = amplitudes_for(p, n);
                Branch {
                    id,
                    n_tilde: Complex::new(n, T::zero()),
                    physical: true,
                    alpha_tilde: Some(a),
                    beta_tilde: Some(b),
                    cubic_residual: p.photon_cubic_residual(n),
                }
            }
            None => Branch {
                id,
                n_tilde: z,
                physical: false,
                alpha_tilde: None,
                beta_tilde: None,
                cubic_residual: complex_cubic_residual(p, z),
            },
        }
    })
}

fn complex_cubic_residual<T: Scalar>(p: &SystemParams<T>, z: Complex<T>) -> T {
    let c = p.photon_cubic();
    let terms = [
        Complex::new(c[0], T::zero()),
        z * c[1],
        z * z * c[2],
        z * z * z * c[3],
    ];
    let sum = terms.iter().fold(Complex::new(T::zero(), T::zero()), |a, t| a + t);
    let scale = terms.iter().fold(T::zero(), |a, t| a + t.norm());
    if scale == T::zero() {
        sum.norm()
    } else {
        sum.norm() / scale
    }
}

/// Branch `id` with amplitudes; fails if the branch is unphysical.
pub fn branch_amplitudes<T: Scalar>(p: &SystemParams<T>, id: BranchId) -> Result<Branch<T>> {
    let b = photon_number_branches(p)[id.index()];
    if b.physical {
        Ok(b)
    } else {
        Err(Error::UnphysicalBranch(id.number()))
    }
}

/// Right-hand side of the stationary equations at `(α, β)`, i.e. `(α̇, β̇)`.
pub fn stationary_residual<T: Scalar>(
    p: &SystemParams<T>,
    alpha: Complex<T>,
    beta: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let mut dy = [T::zero(); 4];
    mean_field_rhs(p, &[alpha.re, alpha.im, beta.re, beta.im], &mut dy);
    (Complex::new(dy[0], dy[1]), Complex::new(dy[2], dy[3]))
}

/// Mean-field vector field on `[Re α, Im α, Re β, Im β]`.
pub fn mean_field_rhs<T: Scalar>(p: &SystemParams<T>, y: &[T], dy: &mut [T]) {
    let two = T::lit(2.0);
    let (ar, ai, br, bi) = (y[0], y[1], y[2], y[3]);
    // (iw − κ)α + Ẽ with w = Δ − 2 Re β.
    let w = p.delta - two * br;
    dy[0] = -p.kappa * ar - w * ai + p.e_tilde;
    dy[1] = w * ar - p.kappa * ai;
    // −(iω + γ)β − i|α|².
    let n = ar * ar + ai * ai;
    dy[2] = -p.gamma * br + p.omega_m * bi;
    dy[3] = -p.omega_m * br - p.gamma * bi - n;
}

/// Sampled mean-field trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct SemiclassicalTrajectory<T> {
    pub times: Vec<T>,
    pub alpha: Vec<Complex<T>>,
    pub beta: Vec<Complex<T>>,
}

impl<T: Scalar> SemiclassicalTrajectory<T> {
    /// Photon numbers `|α(t)|²`.
    pub fn photon_numbers(&self) -> Vec<T> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Integrates the mean-field equations from `(alpha0, beta0)` at `t = 0`
/// and samples at `times`.
pub fn integrate_semiclassical<T: Scalar>(
    p: &SystemParams<T>,
    alpha0: Complex<T>,
    beta0: Complex<T>,
    times: &[T],
    tol: T,
) -> Result<SemiclassicalTrajectory<T>> {
    if !(alpha0.re.is_finite() && alpha0.im.is_finite() && beta0.re.is_finite() && beta0.im.is_finite()) {
        return Err(Error::NonFinite { name: "initial amplitudes" });
    }
    let traj = integrate_ode(
        |_, y, dy| mean_field_rhs(p, y, dy),
        T::zero(),
        &[alpha0.re, alpha0.im, beta0.re, beta0.im],
        times,
        &OdeOptions::with_tol(tol),
    )?;
    Ok(SemiclassicalTrajectory {
        times: traj.times,
        alpha: traj.states.iter().map(|s| Complex::new(s[0], s[1])).collect(),
        beta: traj.states.iter().map(|s| Complex::new(s[2], s[3])).collect(),
    })
}

/// Controls for [`relax`]: integrate period by period until the state
/// changes by less than `threshold` over one mechanical period.
#[derive(Clone, Copy, Debug)]
pub struct DwellRule<T> {
    pub threshold: T,
    pub max_periods: usize,
    pub tol: T,
}

impl<T: Scalar> Default for DwellRule<T> {
    fn default() -> Self {
        DwellRule {
            threshold: T::lit(1e-8),
            max_periods: 10_000,
            tol: T::lit(1e-10),
        }
    }
}

/// End state of a relaxation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Relaxed<T> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
    pub converged: bool,
    pub periods: usize,
}

/// Integrates until the per-period state change drops below the dwell
/// threshold or the period cap is reached.
pub fn relax<T: Scalar>(
    p: &SystemParams<T>,
    alpha0: Complex<T>,
    beta0: Complex<T>,
    rule: &DwellRule<T>,
) -> Result<Relaxed<T>> {
    let period = T::lit(2.0) * T::PI() / p.omega_m;
    let mut y = vec![alpha0.re, alpha0.im, beta0.re, beta0.im];
    let mut opts = OdeOptions::with_tol(rule.tol);
    let mut converged = false;
    let mut periods = 0;
    while periods < rule.max_periods {
        let traj = integrate_ode(|_, y, dy| mean_field_rhs(p, y, dy), T::zero(), &y, &[period], &opts)?;
        let next = traj.states[0].clone();
        opts.h_init = Some(traj.last_step);
        periods += 1;
        let change = y
            .iter()
            .zip(&next)
            .fold(T::zero(), |a, (u, v)| a + (*u - *v) * (*u - *v))
            .sqrt();
        y = next;
        if change < rule.threshold {
            converged = true;
            break;
        }
    }
    Ok(Relaxed {
        alpha: Complex::new(y[0], y[1]),
        beta: Complex::new(y[2], y[3]),
        converged,
        periods,
    })
}

/// One point of a quasi-static sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint<T> {
    pub e_tilde: T,
    pub n_tilde: T,
    pub converged: bool,
}

/// Up- and down-sweep curves of a hysteresis run.
#[derive(Clone, Debug, Serialize)]
pub struct Hysteresis<T> {
    /// Points in ascending `Ẽ`.
    pub up: Vec<SweepPoint<T>>,
    /// Points in descending `Ẽ`.
    pub down: Vec<SweepPoint<T>>,
}

impl<T: Scalar> Hysteresis<T> {
    /// Largest `|ñ_up − ñ_down|` at matching `Ẽ`.
    pub fn max_gap(&self) -> T {
        self.up
            .iter()
            .zip(self.down.iter().rev())
            .fold(T::zero(), |a, (u, d)| a.max((u.n_tilde - d.n_tilde).abs()))
    }

    /// `Ẽ` values where the two curves differ by more than `threshold`.
    pub fn open_interval(&self, threshold: T) -> Option<(T, T)> {
        let mut lo: Option<T> = None;
        let mut hi: Option<T> = None;
        for (u, d) in self.up.iter().zip(self.down.iter().rev()) {
            if (u.n_tilde - d.n_tilde).abs() > threshold {
                lo = Some(lo.map_or(u.e_tilde, |l| l.min(u.e_tilde)));
                hi = Some(hi.map_or(u.e_tilde, |h| h.max(u.e_tilde)));
            }
        }
        lo.zip(hi)
    }
}

/// Quasi-static sweep of the drive at fixed bare detuning `template.delta`:
/// `ramp` is traversed upward then downward, each point relaxed from the
/// previous end state. The sweep starts from the empty cavity.
pub fn hysteresis_sweep<T: Scalar>(
    template: &SystemParams<T>,
    ramp: &[T],
    rule: &DwellRule<T>,
) -> Result<Hysteresis<T>> {
    if ramp.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRange("drive ramp must be strictly increasing".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut state = (zero, zero);
    let run = |e: T, state: &mut (Complex<T>, Complex<T>)| -> Result<SweepPoint<T>> {
        let p = template.with_bare(template.delta, e)?;
        let r = relax(&p, state.0, state.1, rule)?;
        *state = (r.alpha, r.beta);
        Ok(SweepPoint { e_tilde: e, n_tilde: r.alpha.norm_sqr(), converged: r.converged })
    };
    let up = ramp.iter().map(|&e| run(e, &mut state)).collect::<Result<Vec<_>>>()?;
    let down = ramp.iter().rev().map(|&e| run(e, &mut state)).collect::<Result<Vec<_>>>()?;
    Ok(Hysteresis { up, down })
}

/// Drive interval `(Ẽ_low, Ẽ_high)` of the bistable window at bare detuning
/// `delta`, from the turning points of `Ẽ²(ñ)`; `None` when monostable.
pub fn bistable_window<T: Scalar>(delta: T, kappa: T, gamma: T, omega_m: T) -> Option<(T, T)> {
    let s = crate::model::shift_per_photon(gamma, omega_m);
    // d/dñ [ñ((Δ + sñ)² + κ²)] = 3s²ñ² + 4Δsñ + Δ² + κ².
    let a = T::lit(3.0) * s * s;
    let b = T::lit(4.0) * delta * s;
    let c = delta * delta + kappa * kappa;
    let disc = b * b - T::lit(4.0) * a * c;
    if disc <= T::zero() {
        return None;
    }
    let q = -(b + b.signum() * disc.sqrt()) / T::lit(2.0);
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    if lo < T::zero() {
        return None;
    }
    let e2 = |n: T| n * ((delta + s * n) * (delta + s * n) + kappa * kappa);
    // The fold at smaller ñ is the local maximum of Ẽ², the upper edge.
    Some((e2(hi).max(T::zero()).sqrt(), e2(lo).sqrt()))
}
