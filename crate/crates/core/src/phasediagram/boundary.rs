use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::scalar::Scalar;
use crate::semiclassical::{pair_discriminant, BranchId};
use crate::stability::routh_hurwitz_margins;

/// Family of stability boundaries in the `(Δ̃, G)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Zero set of the soft margin of a branch.
    Soft(BranchId),
    /// Zero set of the hard margin of a branch.
    Hard(BranchId),
    /// Where branches II and III merge and leave the physical domain.
    Fold,
}

/// Value of the function whose zero set is the boundary.
pub fn boundary_function<T: Scalar>(template: &SystemParams<T>, kind: BoundaryKind, dtilde: T, g: T) -> Result<T> {
    let p = template.with_effective(dtilde, g.abs())?;
    match kind {
        BoundaryKind::Soft(id) => Ok(routh_hurwitz_margins(&p, id)?.soft),
        BoundaryKind::Hard(id) => Ok(routh_hurwitz_margins(&p, id)?.hard),
        BoundaryKind::Fold => Ok(pair_discriminant(&p)),
    }
}

/// Controls for [`trace_boundary`].
#[derive(Clone, Copy, Debug)]
pub struct TraceOptions<T> {
    /// Arc-length step in the `(Δ̃, G)` plane.
    pub step: T,
    pub max_points: usize,
    /// Tracing stops on leaving `[Δ̃_min, Δ̃_max] × [G_min, G_max]`.
    pub dtilde_bounds: (T, T),
    pub g_bounds: (T, T),
    /// Initial direction along the curve: `+1` follows increasing `Δ̃` where
    /// the curve is not vertical, `−1` the opposite.
    pub direction: T,
    /// Corrector convergence threshold on `|f|`.
    pub residual: T,
}

impl<T: Scalar> Default for TraceOptions<T> {
    fn default() -> Self {
        TraceOptions {
            step: T::lit(1e-3),
            max_points: 100_000,
            dtilde_bounds: (T::lit(-2.0), T::lit(0.5)),
            g_bounds: (T::zero(), T::one()),
            direction: T::one(),
            residual: T::lit(1e-10),
        }
    }
}

/// Why tracing stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStop {
    LeftDomain,
    MaxPoints,
    /// The margin could not be evaluated (branch became unphysical).
    BranchEnded,
}

/// A traced boundary curve.
#[derive(Clone, Debug, Serialize)]
pub struct Polyline<T> {
    pub kind: BoundaryKind,
    pub points: Vec<(T, T)>,
    /// `|f|` at each point.
    pub residuals: Vec<T>,
    pub stop: TraceStop,
}

fn gradient<T: Scalar>(f: &impl Fn(T, T) -> Result<T>, x: T, y: T) -> Result<(T, T)> {
    let h = T::epsilon().cbrt();
    let fx = (f(x + h, y)? - f(x - h, y)?) / (h + h);
    let fy = (f(x, y + h)? - f(x, y - h)?) / (h + h);
    Ok((fx, fy))
}

/// Newton projection onto `f = 0` constrained to the line through `pred`
/// orthogonal to `tangent`. Returns the corrected point and `|f|`.
fn correct<T: Scalar>(
    f: &impl Fn(T, T) -> Result<T>,
    pred: (T, T),
    tangent: (T, T),
    residual: T,
) -> Result<Option<(T, T, T)>> {
    let (mut x, mut y) = pred;
    for _ in 0..30 {
        let v = f(x, y)?;
        if v.abs() < residual {
            return Ok(Some((x, y, v.abs())));
        }
        let (gx, gy) = gradient(f, x, y)?;
        // Solve [gx gy; tx ty] d = [-v; -(t·(u − pred))].
        let c = tangent.0 * (x - pred.0) + tangent.1 * (y - pred.1);
        let det = gx * tangent.1 - gy * tangent.0;
        if det.abs() < T::lit(1e-300) || !det.is_finite() {
            return Ok(None);
        }
        let dx = (-v * tangent.1 + c * gy) / det;
        let dy = (tangent.0 * v - gx * c) / det;
        x += dx;
        y += dy;
        if !(x.is_finite() && y.is_finite()) {
            return Ok(None);
        }
    }
    let v = f(x, y)?;
    Ok((v.abs() < residual).then_some((x, y, v.abs())))
}

/// Follows the zero set of the boundary function from `seed` by
/// pseudo-arclength continuation with Newton correction.
///
/// The seed is first projected onto the curve along the gradient. Steps are
/// halved when the corrector fails; [`Error::LostTrack`] carries the partial
/// polyline when the step falls below `1e-6·step`.
pub fn trace_boundary<T: Scalar>(
    template: &SystemParams<T>,
    kind: BoundaryKind,
    seed: (T, T),
    opts: &TraceOptions<T>,
) -> Result<Polyline<T>> {
    let f = |x: T, y: T| boundary_function(template, kind, x, y);
    let partial = |pts: &[(T, T)]| Error::LostTrack {
        partial: pts.iter().map(|&(x, y)| (x.as_f64(), y.as_f64())).collect(),
    };

    // Project the seed onto the curve.
    let (mut x, mut y) = seed;
    let mut projected = false;
    for _ in 0..50 {
        let v = f(x, y)?;
        if v.abs() < opts.residual {
            projected = true;
            break;
        }
        let (gx, gy) = gradient(&f, x, y)?;
        let g2 = gx * gx + gy * gy;
        if g2 == T::zero() || !g2.is_finite() {
            break;
        }
        x -= v * gx / g2;
        y -= v * gy / g2;
    }
    if !projected {
        return Err(partial(&[]));
    }

    let mut points = vec![(x, y)];
    let mut residuals = vec![f(x, y)?.abs()];
    let (gx, gy) = gradient(&f, x, y)?;
    let norm = gx.hypot(gy);
    let mut tangent = (-gy / norm, gx / norm);
    let flip = tangent.0 * opts.direction < T::zero()
        || (tangent.0 == T::zero() && tangent.1 * opts.direction < T::zero());
    if flip {
        tangent = (-tangent.0, -tangent.1);
    }
    let mut ds = opts.step;
    let min_ds = opts.step * T::lit(1e-6);
    let inside = |x: T, y: T| {
        x >= opts.dtilde_bounds.0 && x <= opts.dtilde_bounds.1 && y >= opts.g_bounds.0 && y <= opts.g_bounds.1
    };
    let stop = loop {
        if points.len() >= opts.max_points {
            break TraceStop::MaxPoints;
        }
        let (px, py) = *points.last().expect("non-empty");
        let pred = (px + ds * tangent.0, py + ds * tangent.1);
        let corrected = match correct(&f, pred, tangent, opts.residual) {
            Ok(c) => c,
            Err(Error::UnphysicalBranch(_)) => {
                if ds > min_ds {
                    ds /= T::lit(2.0);
                    continue;
                }
                break TraceStop::BranchEnded;
            }
            Err(e) => return Err(e),
        };
        match corrected {
            Some((nx, ny, r)) => {
                if !inside(nx, ny) {
                    break TraceStop::LeftDomain;
                }
                let (gx, gy) = match gradient(&f, nx, ny) {
                    Ok(g) => g,
                    Err(Error::UnphysicalBranch(_)) => break TraceStop::BranchEnded,
                    Err(e) => return Err(e),
                };
                let norm = gx.hypot(gy);
                let mut t = (-gy / norm, gx / norm);
                if t.0 * tangent.0 + t.1 * tangent.1 < T::zero() {
                    t = (-t.0, -t.1);
                }
                tangent = t;
                points.push((nx, ny));
                residuals.push(r);
                ds = (ds * T::lit(1.5)).min(opts.step);
            }
            None => {
                ds /= T::lit(2.0);
                if ds < min_ds {
                    return Err(partial(&points));
                }
            }
        }
    };
    Ok(Polyline { kind, points, residuals, stop })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> SystemParams<f64> {
        SystemParams::from_effective(0.0, 0.0, 0.25, 0.0, 1.0).unwrap()
    }

    #[test]
    fn reference_soft_line_matches_closed_form() {
        let t = template();
        let seed = (-0.2, 0.36);
        let opts = TraceOptions { direction: -1.0, max_points: 400, ..TraceOptions::default() };
        let line = trace_boundary(&t, BoundaryKind::Soft(BranchId::I), seed, &opts).unwrap();
        assert!(line.points.len() > 100);
        for &(d, g) in &line.points {
            let exact = ((0.0625 + d * d) / (4.0 * d.abs())).sqrt();
            assert!((g - exact).abs() < 1e-6, "{d} {g} {exact}");
        }
        assert!(line.residuals.iter().all(|r| *r < 1e-8));
    }

    #[test]
    fn hard_line_through_orbit_point() {
        let t = template();
        let opts = TraceOptions { max_points: 200, ..TraceOptions::default() };
        let line = trace_boundary(&t, BoundaryKind::Hard(BranchId::III), (-1.05, 0.1727), &opts).unwrap();
        let g_star = 1.0 / (4.0 * 2f64.sqrt());
        let near = line
            .points
            .windows(2)
            .find(|w| (w[0].0 + 1.0) * (w[1].0 + 1.0) <= 0.0)
            .expect("crosses dtilde = -1");
        let (a, b) = (near[0], near[1]);
        let g = a.1 + (b.1 - a.1) * (-1.0 - a.0) / (b.0 - a.0);
        assert!((g - g_star).abs() < 1e-6, "{g}");
    }
}
