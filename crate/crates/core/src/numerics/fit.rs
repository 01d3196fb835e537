//! Least-squares power-law fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Straight line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Fits `ln y = slope · ln x + intercept`; needs at least five positive points.
pub fn fit_loglog<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LogLogFit<T>> {
    const MIN_POINTS: usize = 5;
    let n = xs.len().min(ys.len());
    if n < MIN_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_POINTS,
            got: n,
        });
    }
    if let Some((x, y)) = xs.iter().zip(ys).find(|(x, y)| !(**x > T::zero() && **y > T::zero())) {
        return Err(Error::NonPositiveData {
            x: x.as_f64(),
            y: y.as_f64(),
        });
    }
    let lx: Vec<T> = xs[..n].iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys[..n].iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Ordinary least squares `y = slope · x + intercept` with coefficient of
/// determination.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LogLogFit<T>> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let nf = T::lit(n as f64);
    let mx = xs[..n].iter().fold(T::zero(), |a, &x| a + x) / nf;
    let my = ys[..n].iter().fold(T::zero(), |a, &y| a + y) / nf;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs[..n].iter().zip(&ys[..n]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::InvalidRange("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = xs[..n]
        .iter()
        .zip(&ys[..n])
        .fold(T::zero(), |a, (&x, &y)| {
            let r = y - (slope * x + intercept);
            a + r * r
        });
    let r_squared = if syy == T::zero() { T::one() } else { T::one() - ss_res / syy };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decade_grid() -> Vec<f64> {
        (0..=20).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64)).collect()
    }

    #[test]
    fn identity_power_law() {
        let xs = decade_grid();
        let fit = fit_loglog(&xs, &xs).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_power_law() {
        let xs = decade_grid();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let xs = decade_grid();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            .collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit_loglog(&xs, &xs),
            Err(Error::InsufficientPoints { needed: 5, got: 4 })
        ));
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.0, 2.0, 0.0, 4.0, 5.0];
        assert!(matches!(fit_loglog(&xs, &ys), Err(Error::NonPositiveData { .. })));
    }
}
