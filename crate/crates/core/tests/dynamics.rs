mod common;

use dptom_core::gaussian::{evolve_moments, steady_covariance, wigner_density, GaussianState};
use dptom_core::model::SystemParams;
use dptom_core::numerics::Mat4;
use dptom_core::semiclassical::{
    bistable_window, hysteresis_sweep, integrate_semiclassical, photon_number_branches, relax, DwellRule,
};
use dptom_core::stability::classify_params;
use dptom_core::{BranchId, Params, StabilityClass, Tol};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Relaxation from random initial amplitudes ends on a branch that the
/// linear analysis calls stable. Points with a hard-unstable branch are
/// skipped: limit cycles can coexist with the stable branches there.
#[test]
fn random_starts_settle_on_stable_branches() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rule = DwellRule { threshold: 1e-9, max_periods: 4000, tol: 1e-10 };
    let mut settled = 0;
    let mut starts = 0;
    while starts < 1000 {
        let p = Params::from_effective(
            rng.gen_range(-1.5..0.0),
            rng.gen_range(0.05..0.8),
            0.25,
            rng.gen_range(0.05..0.3),
            1.0,
        )
        .unwrap();
        let sig = classify_params(&p, &Tol::default());
        // Keep points whose branches are all decisively classified and where
        // relaxation is reasonably fast.
        let decisive = sig.reports.iter().flatten().all(|r| r.spectrum.max_real().abs() > 0.02);
        let hard = sig.classes.iter().any(|c| matches!(c, StabilityClass::HardUnstable | StabilityClass::BothUnstable));
        if !decisive || hard || sig.stable_set().is_empty() {
            continue;
        }
        for _ in 0..10 {
            starts += 1;
            let a0 = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b0 = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let end = relax(&p, a0, b0, &rule).unwrap();
            assert!(end.converged, "{p:?}: no convergence from {a0}, {b0}");
            settled += 1;
            let hit = sig
                .branches
                .iter()
                .filter(|b| b.physical)
                .map(|b| (b.id, (b.alpha_tilde.unwrap() - end.alpha).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(hit.1 < 1e-6, "{p:?}: ended {:?} away from every branch", hit.1);
            assert!(sig.is_stable(hit.0), "{p:?}: settled on unstable branch {}", hit.0);
        }
    }
    assert_eq!(settled, starts);
}

#[test]
fn trajectory_from_a_branch_stays_put() {
    let p = Params::from_effective(-0.5, 0.3, 0.25, 0.1, 1.0).unwrap();
    let b = photon_number_branches(&p)[0];
    let times: Vec<f64> = (1..=20).map(|k| k as f64).collect();
    let tr = integrate_semiclassical(&p, b.alpha_tilde.unwrap(), b.beta_tilde.unwrap(), &times, 1e-11).unwrap();
    for n in tr.photon_numbers() {
        assert!((n - b.n()).abs() < 1e-8);
    }
}

#[test]
fn hysteresis_loop_opens_inside_the_bistable_window() {
    let (delta, kappa, gamma) = (-0.6, 0.25, 0.1);
    let (lo, hi) = bistable_window(delta, kappa, gamma, 1.0).expect("bistable");
    let template = SystemParams::from_bare(delta, 0.0, kappa, gamma, 1.0).unwrap();
    let ramp: Vec<f64> = (0..=30).map(|k| 0.10 + 0.08 * k as f64 / 30.0).collect();
    let h = hysteresis_sweep(&template, &ramp, &DwellRule::default()).unwrap();
    assert!(h.up.iter().chain(&h.down).all(|p| p.converged));
    let (a, b) = h.open_interval(1e-3).expect("loop opens");
    let step = ramp[1] - ramp[0];
    assert!(a >= lo - step && b <= hi + step, "open on [{a}, {b}], window [{lo}, {hi}]");
    assert!(a <= lo + step && b >= hi - step, "open on [{a}, {b}], window [{lo}, {hi}]");
    // Each curve sits on a stationary solution of the cubic.
    for pt in h.up.iter().chain(&h.down) {
        let p = template.with_bare(delta, pt.e_tilde).unwrap();
        let c = p.photon_cubic();
        let r = c[0] + pt.n_tilde * (c[1] + pt.n_tilde * (c[2] + pt.n_tilde * c[3]));
        assert!(r.abs() < 1e-6 * (1.0 + c[0].abs()), "{pt:?}");
    }
}

#[test]
fn no_hysteresis_when_monostable() {
    let (delta, kappa, gamma) = (-0.2, 0.25, 0.1);
    assert!(bistable_window(delta, kappa, gamma, 1.0).is_none());
    let template = SystemParams::from_bare(delta, 0.0, kappa, gamma, 1.0).unwrap();
    // Above Ẽ ≈ 0.18 the branch turns hard-unstable; stay below.
    let ramp: Vec<f64> = (0..=15).map(|k| 0.02 + 0.15 * k as f64 / 15.0).collect();
    let h = hysteresis_sweep(&template, &ramp, &DwellRule::default()).unwrap();
    assert!(h.max_gap() < 1e-6, "{}", h.max_gap());
}

#[test]
fn moment_flow_relaxes_to_the_lyapunov_solution() {
    let p = Params::from_effective(-0.8, 0.3, 0.25, 0.1, 1.0).unwrap();
    let vs = steady_covariance(&p, BranchId::I).unwrap().v;
    let tr = evolve_moments(&p, BranchId::I, [0.3, -0.2, 0.1, 0.4], &Mat4::identity(), &[400.0], 1e-10).unwrap();
    assert!((tr.v[0] - vs).max_abs() < 1e-7);
    assert!(tr.x[0].iter().all(|x| x.abs() < 1e-8));
}

/// Monte-Carlo estimate of `∫W = 1` by importance sampling from a wide
/// isotropic Gaussian.
#[test]
fn wigner_density_is_normalised() {
    let p = Params::from_effective(-0.7, 0.35, 0.25, 0.1, 1.0).unwrap();
    let state = steady_covariance(&p, BranchId::I).unwrap();
    let sigma = 2.0 * dptom_core::numerics::symmetric_eigenvalues(&state.v)[3].sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let x = [0; 4].map(|_| sigma * rng.sample::<f64, _>(StandardNormal));
        let q: f64 = x.iter().map(|v| v * v).sum();
        let proposal = (-q / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).powi(2);
        acc += wigner_density(&state, &x).unwrap() / proposal;
    }
    let est = acc / n as f64;
    assert!((est - 1.0).abs() < 0.01, "{est}");
    let vac = GaussianState::<f64>::vacuum();
    assert!((wigner_density(&vac, &[0.0; 4]).unwrap() - 1.0 / std::f64::consts::PI.powi(2)).abs() < 1e-15);
}
