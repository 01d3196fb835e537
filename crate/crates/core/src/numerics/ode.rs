//! Adaptive Dormand–Prince 5(4) integration with dense output.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step-size control for [`integrate_ode`].
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<T>,
    /// Upper bound on a single step.
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Scalar> OdeOptions<T> {
    /// Equal relative and absolute tolerance.
    pub fn with_tol(tol: T) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_max: None,
            max_steps: 50_000_000,
        }
    }
}

/// States sampled at the requested output times.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// Accepted steps taken.
    pub steps: usize,
    /// Step size in force when integration stopped; useful to warm-start.
    pub last_step: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> Option<&[T]> {
        self.states.last().map(Vec::as_slice)
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// The embedded estimate bounds the fourth-order solution; scaling the
// tolerance keeps the accumulated error of long runs near the request.
const TOL_SCALE: f64 = 0.1;
// Continuous extension (Hairer, Nørsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `y' = f(t, y)` from `(t0, y0)` and samples the solution at
/// `sample_times`, which must be non-decreasing and not before `t0`.
///
/// The local error estimate of every accepted step satisfies
/// `max_i |err_i| / (atol + rtol·max(|y_i|, |y_i'|)) ≤ 0.1`.
pub fn integrate_ode<T, F>(
    mut f: F,
    t0: T,
    y0: &[T],
    sample_times: &[T],
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y0.len();
    let lit = T::lit;
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&s| s < t0) {
        return Err(Error::InvalidRange("sample times must be sorted and >= t0".into()));
    }
    let mut out = Trajectory {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        steps: 0,
        last_step: T::zero(),
    };
    let t_end = match sample_times.last() {
        Some(&t) => t,
        None => return Ok(out),
    };
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] == t0 {
        out.times.push(t0);
        out.states.push(y0.to_vec());
        next += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![T::zero(); n];
    f(t, &y, &mut k1);
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut k5 = vec![T::zero(); n];
    let mut k6 = vec![T::zero(); n];
    let mut k7 = vec![T::zero(); n];
    let mut ytmp = vec![T::zero(); n];
    let mut ynew = vec![T::zero(); n];

    let span = t_end - t0;
    let h_max = opts.h_max.unwrap_or(span.abs()).max(T::min_positive_value());
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(&mut f, t, &y, &k1, opts))
        .min(h_max);
    let mut rejected_last = false;

    while next < sample_times.len() {
        if out.steps >= opts.max_steps {
            return Err(Error::MaxStepsExceeded {
                t: t.as_f64(),
                max_steps: opts.max_steps,
                state: y.iter().map(|x| x.as_f64()).collect(),
            });
        }
        let h_floor = lit(16.0) * T::epsilon() * t.abs().max(T::one());
        if h < h_floor || !h.is_finite() {
            return Err(Error::StepSizeUnderflow {
                t: t.as_f64(),
                h: h.as_f64(),
                state: y.iter().map(|x| x.as_f64()).collect(),
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        stage(&mut ytmp, &y, h, &[(lit(A21), &k1)]);
        f(t + lit(C2) * h, &ytmp, &mut k2);
        stage(&mut ytmp, &y, h, &[(lit(A31), &k1), (lit(A32), &k2)]);
        f(t + lit(C3) * h, &ytmp, &mut k3);
        stage(&mut ytmp, &y, h, &[(lit(A41), &k1), (lit(A42), &k2), (lit(A43), &k3)]);
        f(t + lit(C4) * h, &ytmp, &mut k4);
        stage(
            &mut ytmp,
            &y,
            h,
            &[(lit(A51), &k1), (lit(A52), &k2), (lit(A53), &k3), (lit(A54), &k4)],
        );
        f(t + lit(C5) * h, &ytmp, &mut k5);
        stage(
            &mut ytmp,
            &y,
            h,
            &[(lit(A61), &k1), (lit(A62), &k2), (lit(A63), &k3), (lit(A64), &k4), (lit(A65), &k5)],
        );
        f(t + h, &ytmp, &mut k6);
        stage(
            &mut ynew,
            &y,
            h,
            &[(lit(A71), &k1), (lit(A73), &k3), (lit(A74), &k4), (lit(A75), &k5), (lit(A76), &k6)],
        );
        f(t + h, &ynew, &mut k7);

        let mut err_max = T::zero();
        for i in 0..n {
            let e = h
                * (lit(E1) * k1[i] + lit(E3) * k3[i] + lit(E4) * k4[i] + lit(E5) * k5[i] + lit(E6) * k6[i]
                    + lit(E7) * k7[i]);
            let sc = lit(TOL_SCALE) * (opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs()));
            err_max = err_max.max((e / sc).abs());
        }
        let err = err_max;

        if !err.is_finite() {
            h *= lit(0.25);
            rejected_last = true;
            continue;
        }
        if err <= T::one() {
            let t_new = t + h;
            while next < sample_times.len() && sample_times[next] <= t_new {
                let theta = if h > T::zero() { (sample_times[next] - t) / h } else { T::one() };
                out.times.push(sample_times[next]);
                out.states
                    .push(dense(&y, &ynew, &k1, &k3, &k4, &k5, &k6, &k7, h, theta));
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            out.steps += 1;
            out.last_step = h;
            let mut fac = lit(0.9) * err.powf(lit(-0.2));
            fac = fac.min(lit(5.0)).max(lit(0.2));
            if rejected_last {
                fac = fac.min(T::one());
            }
            h = (h * fac).min(h_max);
            rejected_last = false;
        } else {
            let fac = (lit(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(out)
}

fn stage<T: Scalar>(out: &mut [T], y: &[T], h: T, terms: &[(T, &Vec<T>)]) {
    for i in 0..y.len() {
        let mut acc = T::zero();
        for (a, k) in terms {
            acc += *a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

#[allow(clippy::too_many_arguments)]
fn dense<T: Scalar>(
    y: &[T],
    ynew: &[T],
    k1: &[T],
    k3: &[T],
    k4: &[T],
    k5: &[T],
    k6: &[T],
    k7: &[T],
    h: T,
    theta: T,
) -> Vec<T> {
    let lit = T::lit;
    let theta1 = T::one() - theta;
    (0..y.len())
        .map(|i| {
            let r2 = ynew[i] - y[i];
            let r3 = h * k1[i] - r2;
            let r4 = r2 - h * k7[i] - r3;
            let r5 = h
                * (lit(D1) * k1[i] + lit(D3) * k3[i] + lit(D4) * k4[i] + lit(D5) * k5[i] + lit(D6) * k6[i]
                    + lit(D7) * k7[i]);
            y[i] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)))
        })
        .collect()
}

fn initial_step<T, F>(f: &mut F, t: T, y: &[T], k1: &[T], opts: &OdeOptions<T>) -> T
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y.len().max(1);
    let nf = T::lit(n as f64);
    let sc: Vec<T> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[T]| {
        (v.iter().zip(&sc).fold(T::zero(), |a, (x, s)| a + (*x / *s) * (*x / *s)) / nf).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let y1: Vec<T> = y.iter().zip(k1).map(|(a, b)| *a + h0 * *b).collect();
    let mut k2 = vec![T::zero(); y.len()];
    f(t + h0, &y1, &mut k2);
    let diff: Vec<T> = k2.iter().zip(k1).map(|(a, b)| *a - *b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1)
}
