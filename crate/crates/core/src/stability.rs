//! Linear stability of the stationary branches.
//!
//! Fluctuations around branch `j` evolve with the drift matrix `Aⱼ` in the
//! quadrature basis `(x_c, p_c, x_m, p_m)` and receive vacuum noise through
//! `D = diag(κ, κ, γ, γ)`. A branch is stable when every eigenvalue of `Aⱼ`
//! has negative real part; the two Routh–Hurwitz margins below vanish on the
//! hard-mode (oscillatory) and soft-mode (zero eigenvalue) boundaries.

use std::fmt;

use num_complex::Complex;
use serde::Serialize;

use crate::error::Result;
use crate::model::SystemParams;
use crate::numerics::{eig4, Mat4, Spectrum4, Tolerances};
use crate::scalar::Scalar;
use crate::semiclassical::{photon_number_branches, Branch, BranchId};

/// Drift matrix of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftMatrix<T> {
    pub a: Mat4<T>,
    pub branch: BranchId,
}

/// Detuning of the cavity fluctuations around a branch,
/// `χ = 2ω_m G²/(ω_m² + γ²) + 2 Re β̃ − Δ̃`.
fn chi<T: Scalar>(p: &SystemParams<T>, beta: Complex<T>) -> T {
    let two = T::lit(2.0);
    let shift = p.omega_m * p.g_eff * p.g_eff / (p.omega_m * p.omega_m + p.gamma * p.gamma);
    two * (shift + beta.re) - p.dtilde
}

/// Drift matrix for arbitrary stationary amplitudes `(α̃, β̃)`.
pub fn drift_from_amplitudes<T: Scalar>(p: &SystemParams<T>, alpha: Complex<T>, beta: Complex<T>) -> Mat4<T> {
    let two = T::lit(2.0);
    let z = T::zero();
    let c = chi(p, beta);
    let (re, im) = (two * alpha.re, two * alpha.im);
    Mat4([
        [-p.kappa, -c, im, z],
        [c, -p.kappa, re, z],
        [z, z, -p.gamma, -p.omega_m],
        [re, -im, p.omega_m, -p.gamma],
    ])
}

/// Drift matrix `Aⱼ` of branch `id`.
pub fn drift_matrix<T: Scalar>(p: &SystemParams<T>, id: BranchId) -> Result<DriftMatrix<T>> {
    let b = photon_number_branches(p)[id.index()];
    let (alpha, beta) = b.amplitudes()?;
    Ok(DriftMatrix { a: drift_from_amplitudes(p, alpha, beta), branch: id })
}

/// Diffusion matrix `D = diag(κ, κ, γ, γ)`.
pub fn diffusion<T: Scalar>(p: &SystemParams<T>) -> Mat4<T> {
    Mat4::from_diag([p.kappa, p.kappa, p.gamma, p.gamma])
}

/// Left-hand sides of the two Routh–Hurwitz inequalities; both positive on
/// a stable branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Margins<T> {
    pub hard: T,
    pub soft: T,
}

fn margins_from<T: Scalar>(p: &SystemParams<T>, alpha: Complex<T>, beta: Complex<T>) -> Margins<T> {
    let (k, g, w) = (p.kappa, p.gamma, p.omega_m);
    let c = chi(p, beta);
    let n = alpha.norm_sqr();
    let kg2 = (g + k) * (g + k);
    let hard = T::lit(4.0) * g * k * (kg2 + (c + w) * (c + w)) * (kg2 + (w - c) * (w - c))
        + T::lit(16.0) * kg2 * w * n * c;
    let soft = (g * g + w * w) * (k * k + c * c) - T::lit(4.0) * w * n * c;
    Margins { hard, soft }
}

/// Routh–Hurwitz margins of branch `id`.
pub fn routh_hurwitz_margins<T: Scalar>(p: &SystemParams<T>, id: BranchId) -> Result<Margins<T>> {
    let b = photon_number_branches(p)[id.index()];
    let (alpha, beta) = b.amplitudes()?;
    Ok(margins_from(p, alpha, beta))
}

/// Stability class of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Stable,
    SoftUnstable,
    HardUnstable,
    BothUnstable,
    Marginal,
    Unphysical,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        self == StabilityClass::Stable
    }

    pub fn is_unstable(self) -> bool {
        matches!(
            self,
            StabilityClass::SoftUnstable | StabilityClass::HardUnstable | StabilityClass::BothUnstable
        )
    }

    /// Single-letter code: S, F (soft), H (hard), B (both), M, U.
    pub fn code(self) -> char {
        match self {
            StabilityClass::Stable => 'S',
            StabilityClass::SoftUnstable => 'F',
            StabilityClass::HardUnstable => 'H',
            StabilityClass::BothUnstable => 'B',
            StabilityClass::Marginal => 'M',
            StabilityClass::Unphysical => 'U',
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityClass::Stable => "stable",
            StabilityClass::SoftUnstable => "soft_unstable",
            StabilityClass::HardUnstable => "hard_unstable",
            StabilityClass::BothUnstable => "both_unstable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unphysical => "unphysical",
        })
    }
}

/// Spectrum, margins and classification of one physical branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityReport<T> {
    pub branch: BranchId,
    pub hard_margin: T,
    pub soft_margin: T,
    pub spectrum: Spectrum4<T>,
    /// `|Re λ₁|` of the slowest eigenvalue.
    pub gap_real: T,
    /// `|Im λ₁|` of the slowest eigenvalue.
    pub gap_imag: T,
    pub class: StabilityClass,
    /// False when the spectrum is clearly stable (or clearly unstable) while
    /// the margins say otherwise.
    pub consistent: bool,
}

/// Spectrum and margins of branch `id` with default tolerances.
pub fn drift_spectrum<T: Scalar>(p: &SystemParams<T>, id: BranchId) -> Result<StabilityReport<T>> {
    drift_spectrum_with(p, id, &Tolerances::default())
}

/// [`drift_spectrum`] with explicit tolerances. `eps_band` is scaled by
/// `ω_m`.
pub fn drift_spectrum_with<T: Scalar>(
    p: &SystemParams<T>,
    id: BranchId,
    tol: &Tolerances<T>,
) -> Result<StabilityReport<T>> {
    let b = photon_number_branches(p)[id.index()];
    branch_report(p, &b, tol)
}

/// Report for an already computed branch.
pub fn branch_report<T: Scalar>(p: &SystemParams<T>, b: &Branch<T>, tol: &Tolerances<T>) -> Result<StabilityReport<T>> {
    let (alpha, beta) = b.amplitudes()?;
    let a = drift_from_amplitudes(p, alpha, beta);
    let spectrum = eig4(&a)?;
    let m = margins_from(p, alpha, beta);
    let band = tol.eps_band * p.omega_m;
    let max_re = spectrum.max_real();
    let class = if max_re < -band {
        StabilityClass::Stable
    } else if max_re <= band {
        StabilityClass::Marginal
    } else {
        match (m.soft < T::zero(), m.hard < T::zero()) {
            (true, true) => StabilityClass::BothUnstable,
            (true, false) => StabilityClass::SoftUnstable,
            (false, true) => StabilityClass::HardUnstable,
            // Margins exactly zero or positive: let the spectrum decide.
            (false, false) => {
                if spectrum.rightmost().im.abs() > band {
                    StabilityClass::HardUnstable
                } else {
                    StabilityClass::SoftUnstable
                }
            }
        }
    };
    let rh_stable = m.hard > T::zero() && m.soft > T::zero();
    let consistent = match class {
        StabilityClass::Stable => rh_stable,
        StabilityClass::Marginal => true,
        _ => !rh_stable,
    };
    let slow = spectrum.slowest();
    Ok(StabilityReport {
        branch: b.id,
        hard_margin: m.hard,
        soft_margin: m.soft,
        spectrum,
        gap_real: slow.re.abs(),
        gap_imag: slow.im.abs(),
        class,
        consistent,
    })
}

/// Region of the stability diagram.
///
/// `A`–`G` are the seven regions with at least one stable branch;
/// `Unstable` marks points where every physical branch is unstable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RegionLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    Unstable,
    Boundary,
    Unknown,
}

impl RegionLabel {
    pub const INTERIOR: [RegionLabel; 7] = [
        RegionLabel::A,
        RegionLabel::B,
        RegionLabel::C,
        RegionLabel::D,
        RegionLabel::E,
        RegionLabel::F,
        RegionLabel::G,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::A => "A",
            RegionLabel::B => "B",
            RegionLabel::C => "C",
            RegionLabel::D => "D",
            RegionLabel::E => "E",
            RegionLabel::F => "F",
            RegionLabel::G => "G",
            RegionLabel::Unstable => "unstable",
            RegionLabel::Boundary => "boundary",
            RegionLabel::Unknown => "unknown",
        }
    }

    /// Stable branches expected inside the region.
    pub fn stable_set(self) -> Option<&'static [BranchId]> {
        use BranchId::*;
        match self {
            RegionLabel::A => Some(&[II, III]),
            RegionLabel::B => Some(&[I, III]),
            RegionLabel::C => Some(&[I, II]),
            RegionLabel::D | RegionLabel::E => Some(&[I]),
            RegionLabel::F | RegionLabel::G => Some(&[II]),
            RegionLabel::Unstable => Some(&[]),
            _ => None,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-branch classification of a point of the diagram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionSignature<T> {
    pub params: SystemParams<T>,
    pub branches: [Branch<T>; 3],
    /// Reports for physical branches.
    pub reports: [Option<StabilityReport<T>>; 3],
    pub classes: [StabilityClass; 3],
    pub label: RegionLabel,
}

impl<T: Scalar> RegionSignature<T> {
    pub fn is_stable(&self, id: BranchId) -> bool {
        self.classes[id.index()].is_stable()
    }

    pub fn stable_set(&self) -> Vec<BranchId> {
        BranchId::ALL.into_iter().filter(|&id| self.is_stable(id)).collect()
    }

    /// Signature string such as `S,F,H` (one class code per branch).
    pub fn code(&self) -> String {
        let c: Vec<String> = self.classes.iter().map(|c| c.code().to_string()).collect();
        c.join(",")
    }

    /// All reports agree with their margins.
    pub fn consistent(&self) -> bool {
        self.reports.iter().flatten().all(|r| r.consistent)
    }

    /// Slowest eigenvalue over the stable branches (the one closest to the
    /// imaginary axis), if any branch is stable.
    pub fn slowest_stable(&self) -> Option<Complex<T>> {
        self.reports
            .iter()
            .flatten()
            .filter(|r| r.class.is_stable())
            .map(|r| r.spectrum.slowest())
            .fold(None, |acc: Option<Complex<T>>, z| match acc {
                Some(a) if a.re.abs() <= z.re.abs() => Some(a),
                _ => Some(z),
            })
    }
}

/// Region label from the per-branch classes.
///
/// The stable set fixes the label except for the pairs D/E and F/G, which
/// share a stable set. Those are told apart by the other branches, a rule
/// calibrated on the diagram at `κ = 1/4`, `γ = 0`:
///
/// | region | I | II | III |
/// |--------|---|----|-----|
/// | D | stable | unphysical | unphysical |
/// | E | stable | unstable | unstable |
/// | F | soft-unstable | stable | any |
/// | G | hard-unstable | stable | any |
pub fn region_label(classes: &[StabilityClass; 3]) -> RegionLabel {
    use StabilityClass::*;
    if classes.contains(&Marginal) {
        return RegionLabel::Boundary;
    }
    let s = classes.map(|c| c == Stable);
    match s {
        [false, true, true] => RegionLabel::A,
        [true, false, true] => RegionLabel::B,
        [true, true, false] => RegionLabel::C,
        [true, false, false] => {
            if classes[1] == Unphysical && classes[2] == Unphysical {
                RegionLabel::D
            } else {
                RegionLabel::E
            }
        }
        [false, true, false] => match classes[0] {
            SoftUnstable => RegionLabel::F,
            HardUnstable => RegionLabel::G,
            _ => RegionLabel::Unknown,
        },
        [false, false, false] => RegionLabel::Unstable,
        _ => RegionLabel::Unknown,
    }
}

/// Classifies every branch at `p`.
pub fn classify_params<T: Scalar>(p: &SystemParams<T>, tol: &Tolerances<T>) -> RegionSignature<T> {
    let branches = photon_number_branches(p);
    let reports = branches.map(|b| if b.physical { branch_report(p, &b, tol).ok() } else { None });
    let classes = [0, 1, 2].map(|i| match (&reports[i], branches[i].physical) {
        (Some(r), _) => r.class,
        (None, false) => StabilityClass::Unphysical,
        // Eigen-solver failure: treat as boundary rather than guessing.
        (None, true) => StabilityClass::Marginal,
    });
    RegionSignature { params: *p, branches, reports, classes, label: region_label(&classes) }
}

/// Classifies the point `(Δ̃, G)`.
pub fn classify_point<T: Scalar>(dtilde: T, g_eff: T, kappa: T, gamma: T, omega_m: T) -> Result<RegionSignature<T>> {
    let p = SystemParams::from_effective(dtilde, g_eff, kappa, gamma, omega_m)?;
    Ok(classify_params(&p, &Tolerances::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params_from_effective;

    fn p(dt: f64, g: f64, gamma: f64) -> SystemParams<f64> {
        params_from_effective(dt, g, 0.25, gamma, 1.0).unwrap()
    }

    #[test]
    fn decoupled_spectrum() {
        let params = p(-0.3, 0.0, 0.1);
        let a = drift_matrix(&params, BranchId::I).unwrap().a;
        assert_eq!(a.0[0][2], 0.0);
        assert_eq!(a.0[3][0], 0.0);
        let mut ev = eig4(&a).unwrap().eigenvalues.to_vec();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
        let expect = [
            Complex::new(-0.25, -0.3),
            Complex::new(-0.25, 0.3),
            Complex::new(-0.1, -1.0),
            Complex::new(-0.1, 1.0),
        ];
        let mut expect = expect.to_vec();
        expect.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
        for (x, y) in ev.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-12, "{x} {y}");
        }
    }

    #[test]
    fn branch_one_cavity_block() {
        for &(dt, g, gamma) in &[(-0.7f64, 0.4, 0.0), (0.3, 1.1, 0.2), (-2.0, 0.05, 0.01)] {
            let a = drift_matrix(&p(dt, g, gamma), BranchId::I).unwrap().a;
            assert!((a.0[0][1] - dt).abs() < 1e-12);
            assert!((a.0[1][0] + dt).abs() < 1e-12);
            assert_eq!(a.diag(), [-0.25, -0.25, -gamma, -gamma]);
        }
    }

    #[test]
    fn periodic_orbit_point_has_imaginary_pair() {
        let params = p(-1.0, 1.0 / (4.0 * 2f64.sqrt()), 0.0);
        let r = drift_spectrum(&params, BranchId::III).unwrap();
        let slow = r.spectrum.slowest();
        assert!(slow.re.abs() < 1e-8, "{slow}");
        assert!(slow.im.abs() > 0.1);
        assert_eq!(r.class, StabilityClass::Marginal);
    }

    #[test]
    fn vacuum_gap() {
        let r = drift_spectrum(&p(-0.4, 0.0, 0.1), BranchId::I).unwrap();
        assert!((r.gap_real - 0.1).abs() < 1e-12);
        assert_eq!(r.class, StabilityClass::Stable);
        assert!(r.hard_margin > 0.0 && r.soft_margin > 0.0);
    }

    #[test]
    fn blue_detuned_hard_margin() {
        for &(dt, g) in &[(0.3f64, 0.2), (1.2, 0.7)] {
            let m = routh_hurwitz_margins(&p(dt, g, 0.0), BranchId::I).unwrap();
            let expected = -16.0 * 0.0625 * g * g * dt;
            assert!((m.hard - expected).abs() < 1e-14, "{} {}", m.hard, expected);
        }
    }

    #[test]
    fn red_detuned_soft_line() {
        for dt in [-0.3f64, -0.8, -1.5] {
            let g = ((0.0625 + dt * dt) / (4.0 * dt.abs())).sqrt();
            let params = p(dt, g, 0.0);
            let m = routh_hurwitz_margins(&params, BranchId::I).unwrap();
            assert!(m.soft.abs() < 1e-14);
            let r = drift_spectrum(&params, BranchId::I).unwrap();
            let slow = r.spectrum.slowest();
            assert!(slow.norm() < 1e-8 && slow.im == 0.0, "{slow}");
        }
    }

    #[test]
    fn labels() {
        use StabilityClass::*;
        assert_eq!(region_label(&[Stable, Unphysical, Unphysical]), RegionLabel::D);
        assert_eq!(region_label(&[Stable, SoftUnstable, HardUnstable]), RegionLabel::E);
        assert_eq!(region_label(&[SoftUnstable, Stable, HardUnstable]), RegionLabel::F);
        assert_eq!(region_label(&[HardUnstable, Stable, SoftUnstable]), RegionLabel::G);
        assert_eq!(region_label(&[Stable, Marginal, Stable]), RegionLabel::Boundary);
        assert_eq!(region_label(&[HardUnstable, Unphysical, Unphysical]), RegionLabel::Unstable);
    }

    #[test]
    fn weak_red_drive_only_reference_stable() {
        let s = classify_point(-0.5f64, 0.05, 0.25, 0.0, 1.0).unwrap();
        assert_eq!(s.stable_set(), vec![BranchId::I]);
        assert_eq!(s.label, RegionLabel::D);
    }

    #[test]
    fn bistable_slice_point() {
        // Between the II/III fold (G ≈ 0.3466) and the reference soft line
        // (G ≈ 0.3578) at Δ̃ = −0.2.
        let s = classify_point(-0.2f64, 0.352, 0.25, 0.0, 1.0).unwrap();
        assert_eq!(s.stable_set(), vec![BranchId::I, BranchId::III]);
        assert_eq!(s.label, RegionLabel::B);
        assert!(s.consistent());
    }
}
