use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::Tolerances;
use crate::scalar::Scalar;
use crate::semiclassical::BranchId;
use crate::stability::{classify_params, RegionSignature, StabilityClass};

use super::grid::LinRange;

/// Straight line through the `(Δ̃, G)` plane along which transitions are
/// located.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice<T> {
    /// Fixed `Δ̃`, sweep `G`.
    FixedDtilde(T),
    /// Fixed `G`, sweep `Δ̃`.
    FixedG(T),
}

impl<T: Scalar> Slice<T> {
    /// `(Δ̃, G)` at position `s` along the slice.
    pub fn point(&self, s: T) -> (T, T) {
        match *self {
            Slice::FixedDtilde(d) => (d, s),
            Slice::FixedG(g) => (s, g),
        }
    }
}

/// Character of a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    /// Soft-mode crossing with a finite jump of the photon number.
    Discontinuous,
    /// Soft-mode crossing where the exchanged branches coincide.
    Continuous,
    /// Oscillatory instability (purely imaginary slowest eigenvalue).
    Hard,
}

/// A change of the stable set along a slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionEvent<T> {
    /// Coordinate along the slice (bracket midpoint).
    pub location: T,
    /// Width of the final bracket.
    pub bracket: T,
    pub kind: TransitionKind,
    pub stable_before: Vec<BranchId>,
    pub stable_after: Vec<BranchId>,
    /// Branches that change stability together with their nearest partner
    /// on the other side, sorted.
    pub branches: Vec<BranchId>,
    /// Largest photon-number discontinuity over the branches that change.
    pub jump: T,
    /// Slowest eigenvalue of the changing branch at the boundary.
    pub lambda: [T; 2],
}

/// Controls for [`slice_transitions`].
#[derive(Clone, Copy, Debug)]
pub struct SliceOptions<T> {
    /// Bracket width at which bisection stops.
    pub resolution: T,
    /// Relative photon-number jump separating discontinuous from continuous
    /// soft transitions (relative to the largest photon number involved).
    pub jump_threshold: T,
    /// `|Im λ|` above which a crossing counts as hard, in units of `ω_m`.
    pub hard_threshold: T,
    pub tol: Tolerances<T>,
}

impl<T: Scalar> Default for SliceOptions<T> {
    fn default() -> Self {
        SliceOptions {
            resolution: T::lit(1e-8),
            jump_threshold: T::lit(1e-3),
            hard_threshold: T::lit(1e-6),
            tol: Tolerances::default(),
        }
    }
}

fn mask<T: Scalar>(s: &RegionSignature<T>) -> [bool; 3] {
    s.classes.map(|c| c == StabilityClass::Stable)
}

fn boundary_like<T: Scalar>(s: &RegionSignature<T>) -> bool {
    s.classes.contains(&StabilityClass::Marginal)
}

fn ids(m: [bool; 3]) -> Vec<BranchId> {
    BranchId::ALL.into_iter().filter(|id| m[id.index()]).collect()
}

/// Locates every change of the stable set along `range` of `slice`.
///
/// The range is sampled at `range.count` points; each sampled change is
/// bisected to `opts.resolution` and then classified by the slowest
/// eigenvalue of the branch that changes (hard when it is oscillatory) and,
/// for soft crossings, by the photon-number jump to the nearest stable
/// branch on the other side.
pub fn slice_transitions<T: Scalar>(
    template: &SystemParams<T>,
    slice: Slice<T>,
    range: &LinRange<T>,
    opts: &SliceOptions<T>,
) -> Result<Vec<TransitionEvent<T>>> {
    range.validate()?;
    if let Slice::FixedG(g) = slice {
        if g < T::zero() {
            return Err(Error::InvalidRange("G must be non-negative".into()));
        }
    }
    if matches!(slice, Slice::FixedDtilde(_)) && range.min < T::zero() {
        return Err(Error::InvalidRange("G range must be non-negative".into()));
    }
    let eval = |s: T| -> Result<RegionSignature<T>> {
        let (d, g) = slice.point(s);
        Ok(classify_params(&template.with_effective(d, g)?, &opts.tol))
    };

    // Samples away from the marginal band; a sample that lands on a
    // boundary is skipped and the change is found from its neighbours.
    let mut samples = Vec::new();
    for s in range.values() {
        let sig = eval(s)?;
        if !boundary_like(&sig) {
            samples.push((s, sig));
        }
    }
    let mut events = Vec::new();
    for w in samples.windows(2) {
        let (a, sa) = (&w[0].0, &w[0].1);
        let (b, sb) = (&w[1].0, &w[1].1);
        if mask(sa) != mask(sb) {
            locate(&eval, *a, *sa, *b, mask(sb), opts, &mut events, 0)?;
        }
    }
    Ok(events)
}

#[allow(clippy::too_many_arguments)]
fn locate<T: Scalar, F>(
    eval: &F,
    mut lo: T,
    mut s_lo: RegionSignature<T>,
    b: T,
    mask_b: [bool; 3],
    opts: &SliceOptions<T>,
    out: &mut Vec<TransitionEvent<T>>,
    depth: usize,
) -> Result<()>
where
    F: Fn(T) -> Result<RegionSignature<T>>,
{
    let m_lo = mask(&s_lo);
    let mut hi = b;
    let mut s_hi = eval(hi)?;
    // Keep the left end on the starting stable set; marginal midpoints are
    // counted as "changed" so the bracket closes on the boundary.
    while hi - lo > opts.resolution {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let s_mid = eval(mid)?;
        if !boundary_like(&s_mid) && mask(&s_mid) == m_lo {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
            s_hi = s_mid;
        }
    }
    // The right end may sit inside the marginal band; step just outside it.
    let mut probe = hi;
    let mut step = opts.resolution;
    while boundary_like(&s_hi) && probe < b {
        probe = (probe + step).min(b);
        step *= T::lit(2.0);
        s_hi = eval(probe)?;
    }
    let event = classify_event(lo, &s_lo, probe, &s_hi, opts);
    out.push(event);
    let m_hi = mask(&s_hi);
    if m_hi != mask_b && depth < 16 && probe < b {
        locate(eval, probe, s_hi, b, mask_b, opts, out, depth + 1)?;
    }
    Ok(())
}

fn classify_event<T: Scalar>(
    lo: T,
    s_lo: &RegionSignature<T>,
    hi: T,
    s_hi: &RegionSignature<T>,
    opts: &SliceOptions<T>,
) -> TransitionEvent<T> {
    let (m_lo, m_hi) = (mask(s_lo), mask(s_hi));
    let n = |s: &RegionSignature<T>, id: BranchId| s.branches[id.index()].n();
    let mut n_max = T::zero();
    for s in [s_lo, s_hi] {
        for b in s.branches.iter().filter(|b| b.physical) {
            n_max = n_max.max(b.n());
        }
    }
    let mut jump = T::zero();
    let mut involved = Vec::new();
    let mut hard = false;
    let mut lambda = [T::zero(); 2];
    let mut lambda_set = false;
    for id in BranchId::ALL {
        let i = id.index();
        if m_lo[i] == m_hi[i] {
            continue;
        }
        involved.push(id);
        // Side on which this branch is stable, and the stable set opposite.
        let (own, other, other_mask) = if m_lo[i] { (s_lo, s_hi, m_hi) } else { (s_hi, s_lo, m_lo) };
        if let Some(r) = own.reports[i] {
            let z = r.spectrum.rightmost();
            if !lambda_set || z.im.abs() > lambda[1].abs() {
                lambda = [z.re, z.im];
                lambda_set = true;
            }
            if z.im.abs() > opts.hard_threshold * own.params.omega_m {
                hard = true;
            }
        }
        let nearest = BranchId::ALL
            .into_iter()
            .filter(|o| other_mask[o.index()])
            .map(|o| (o, (n(own, id) - n(other, o)).abs()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
        if let Some((o, d)) = nearest {
            involved.push(o);
            jump = jump.max(d);
        }
    }
    involved.sort();
    involved.dedup();
    let kind = if hard {
        TransitionKind::Hard
    } else if jump > opts.jump_threshold * n_max {
        TransitionKind::Discontinuous
    } else {
        TransitionKind::Continuous
    };
    TransitionEvent {
        location: lo + (hi - lo) / T::lit(2.0),
        bracket: hi - lo,
        kind,
        stable_before: ids(m_lo),
        stable_after: ids(m_hi),
        branches: involved,
        jump,
        lambda,
    }
}
