//! Subcommand implementations. Each returns the bytes to write.

use dptom_core::gaussian::{
    evolve_moments, log_negativity, photon_fluctuations, squeezing_spectrum, steady_covariance, symplectic_eigenvalues,
};
use dptom_core::numerics::Mat4;
use dptom_core::phasediagram::{
    estimate_exponents, slice_transitions, sweep_grid, BranchRule, ExponentOptions, LinRange, Slice, SliceOptions,
};
use dptom_core::semiclassical::{bistable_window, hysteresis_sweep, integrate_semiclassical, DwellRule};
use dptom_core::stability::classify_params;
use dptom_core::{BranchId, Cell, GridSpec, Params, StabilityClass, Tol};
use num_complex::Complex;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{config, kernel, CliResult};
use crate::output::{fmt_f64, fmt_opt, json_bytes, Table};

fn params_from(phys: &Physical, point: &Point) -> CliResult<Params> {
    let Physical { kappa, gamma, omega_m } = *phys;
    match (point.dtilde, point.g, point.delta, point.e_tilde) {
        (Some(d), Some(g), None, None) => Params::from_effective(d, g, kappa, gamma, omega_m)
            .map_err(kernel("model", format!("dtilde={d}, g={g}, kappa={kappa}, gamma={gamma}, omega_m={omega_m}"))),
        (None, None, Some(d), Some(e)) => Params::from_bare(d, e, kappa, gamma, omega_m)
            .map_err(kernel("model", format!("delta={d}, e_tilde={e}, kappa={kappa}, gamma={gamma}, omega_m={omega_m}"))),
        _ => config("give exactly one complete point: (--dtilde, --g) or (--delta, --e-tilde)"),
    }
}

fn describe(p: &Params) -> String {
    format!(
        "dtilde={}, g={}, kappa={}, gamma={}, omega_m={}",
        fmt_f64(p.dtilde),
        fmt_f64(p.g_eff),
        fmt_f64(p.kappa),
        fmt_f64(p.gamma),
        fmt_f64(p.omega_m)
    )
}

fn params_json(p: &Params) -> Value {
    json!({
        "kappa": p.kappa,
        "gamma": p.gamma,
        "omega_m": p.omega_m,
        "delta": p.delta,
        "e_tilde": p.e_tilde,
        "dtilde": p.dtilde,
        "g": p.g_eff,
    })
}

fn complex_json(z: Complex<f64>) -> Value {
    json!([z.re, z.im])
}

fn ids_json(ids: &[BranchId]) -> Value {
    json!(ids)
}

fn join_ids(ids: &[BranchId]) -> String {
    ids.iter().map(|id| format!("{id:?}")).collect::<Vec<_>>().join(";")
}

fn range_json(r: &LinRange<f64>) -> Value {
    json!({ "min": r.min, "max": r.max, "count": r.count })
}

pub fn branches(cmd: &PointCmd) -> CliResult<Vec<u8>> {
    if cmd.output.format == Some(Format::Csv) {
        return config("branches writes JSON only");
    }
    let p = params_from(&cmd.phys, &cmd.point)?;
    let sig = classify_params(&p, &cmd.tol.resolve());
    let branches: Vec<Value> = sig
        .branches
        .iter()
        .map(|b| {
            let report = sig.reports[b.id.index()];
            json!({
                "id": b.id,
                "physical": b.physical,
                "n": b.physical.then(|| b.n()),
                "n_complex": complex_json(b.n_tilde),
                "alpha": b.alpha_tilde.map(complex_json),
                "beta": b.beta_tilde.map(complex_json),
                "class": sig.classes[b.id.index()].to_string(),
                "hard_margin": report.map(|r| r.hard_margin),
                "soft_margin": report.map(|r| r.soft_margin),
                "eigenvalues": report.map(|r| r.spectrum.eigenvalues.map(complex_json).to_vec()),
                "consistent": report.map(|r| r.consistent),
            })
        })
        .collect();
    Ok(json_bytes(&json!({
        "params": params_json(&p),
        "region": sig.label.as_str(),
        "signature": sig.code(),
        "stable": ids_json(&sig.stable_set()),
        "branches": branches,
    })))
}

const GRID_HEADER: [&str; 11] =
    ["dtilde", "g", "region", "n1", "n2", "n3", "stable_I", "stable_II", "stable_III", "gap_real", "gap_imag"];

fn flag(b: bool) -> &'static str {
    if b { "1" } else { "0" }
}

pub fn phase_diagram(cmd: &PhaseDiagramCmd) -> CliResult<Vec<u8>> {
    let spec = GridSpec {
        dtilde: cmd.dtilde.0,
        g: cmd.g.0,
        kappa: cmd.phys.kappa,
        gamma: cmd.phys.gamma,
        omega_m: cmd.phys.omega_m,
    };
    let measures = cmd.measures.0;
    let map = sweep_grid(&spec, measures, &cmd.rule.0, &cmd.tol.resolve()).map_err(kernel(
        "sweep_grid",
        format!(
            "dtilde={:?}, g={:?}, kappa={}, gamma={}, omega_m={}",
            spec.dtilde, spec.g, spec.kappa, spec.gamma, spec.omega_m
        ),
    ))?;
    if cmd.output.format == Some(Format::Json) {
        let counts: serde_json::Map<String, Value> =
            map.label_counts().into_iter().map(|(l, n)| (l.as_str().to_string(), json!(n))).collect();
        let cells: Vec<Value> = map.cells.iter().map(cell_json).collect();
        return Ok(json_bytes(&json!({
            "kappa": spec.kappa,
            "gamma": spec.gamma,
            "omega_m": spec.omega_m,
            "dtilde": range_json(&spec.dtilde),
            "g": range_json(&spec.g),
            "rule": { "A": map.rule.a, "B": map.rule.b, "C": map.rule.c },
            "counts": counts,
            "cells": cells,
        })));
    }
    let mut header: Vec<&str> = GRID_HEADER.to_vec();
    if measures.any() {
        header.push("branch");
    }
    if measures.entanglement {
        header.push("log_neg");
    }
    if measures.squeezing {
        header.extend(["min_eigenvalue", "min_quadrature_diagonal"]);
    }
    if measures.fluctuations {
        header.push("fluctuations");
    }
    let mut table = Table::new(&header);
    for c in &map.cells {
        let mut row = vec![
            fmt_f64(c.dtilde),
            fmt_f64(c.g),
            c.label.as_str().to_string(),
            fmt_opt(c.n[0]),
            fmt_opt(c.n[1]),
            fmt_opt(c.n[2]),
            flag(c.is_stable(BranchId::I)).into(),
            flag(c.is_stable(BranchId::II)).into(),
            flag(c.is_stable(BranchId::III)).into(),
            fmt_f64(c.gap_real),
            fmt_f64(c.gap_imag),
        ];
        if measures.any() {
            let m = c.measures.as_ref();
            row.push(c.selected.map(|id| format!("{id:?}")).unwrap_or_default());
            if measures.entanglement {
                row.push(fmt_opt(m.and_then(|m| m.log_neg)));
            }
            if measures.squeezing {
                row.push(fmt_opt(m.and_then(|m| m.min_eigenvalue)));
                row.push(fmt_opt(m.and_then(|m| m.min_quadrature_diagonal)));
            }
            if measures.fluctuations {
                row.push(fmt_opt(m.and_then(|m| m.fluctuations)));
            }
        }
        table.row(row);
    }
    Ok(table.into_bytes())
}

fn cell_json(c: &Cell) -> Value {
    json!({
        "dtilde": c.dtilde,
        "g": c.g,
        "region": c.label.as_str(),
        "n": c.n,
        "classes": c.classes.map(|k| k.to_string()),
        "selected": c.selected,
        "gap_real": c.gap_real,
        "gap_imag": c.gap_imag,
        "consistent": c.consistent,
        "measures": c.measures.map(|m| json!({
            "branch": m.branch,
            "log_neg": m.log_neg,
            "min_eigenvalue": m.min_eigenvalue,
            "min_quadrature_diagonal": m.min_quadrature_diagonal,
            "fluctuations": m.fluctuations,
        })),
        "error": c.error,
    })
}

pub fn slice(cmd: &SliceCmd) -> CliResult<Vec<u8>> {
    let (slice, range, fixed) = match (cmd.dtilde, cmd.g) {
        (AxisArg::Value(d), AxisArg::Range(r)) => (Slice::FixedDtilde(d), r, ("dtilde", d)),
        (AxisArg::Range(r), AxisArg::Value(g)) => (Slice::FixedG(g), r, ("g", g)),
        _ => return config("slice needs one fixed coordinate and one `min:max:count` range"),
    };
    let (d0, g0) = slice.point(range.min);
    let template = Params::from_effective(d0, g0, cmd.phys.kappa, cmd.phys.gamma, cmd.phys.omega_m)
        .map_err(kernel("model", format!("{}={}, kappa={}, gamma={}", fixed.0, fixed.1, cmd.phys.kappa, cmd.phys.gamma)))?;
    let defaults = SliceOptions::default();
    let opts = SliceOptions {
        resolution: cmd.resolution.unwrap_or(defaults.resolution),
        jump_threshold: cmd.jump_threshold.unwrap_or(defaults.jump_threshold),
        tol: cmd.tol.resolve(),
        ..defaults
    };
    let events = slice_transitions(&template, slice, &range, &opts)
        .map_err(kernel("slice_transitions", format!("{}={}, range={:?}, {}", fixed.0, fixed.1, range, describe(&template))))?;
    if cmd.output.format == Some(Format::Csv) {
        let mut table = Table::new(&[
            "location", "bracket", "kind", "stable_before", "stable_after", "branches", "jump", "lambda_re", "lambda_im",
        ]);
        for e in &events {
            table.row([
                fmt_f64(e.location),
                fmt_f64(e.bracket),
                json!(e.kind).as_str().unwrap_or_default().to_string(),
                join_ids(&e.stable_before),
                join_ids(&e.stable_after),
                join_ids(&e.branches),
                fmt_f64(e.jump),
                fmt_f64(e.lambda[0]),
                fmt_f64(e.lambda[1]),
            ]);
        }
        return Ok(table.into_bytes());
    }
    let events: Vec<Value> = events
        .iter()
        .map(|e| {
            json!({
                "location": e.location,
                "bracket": e.bracket,
                "kind": e.kind,
                "stable_before": e.stable_before,
                "stable_after": e.stable_after,
                "branches": e.branches,
                "jump": e.jump,
                "lambda": e.lambda,
            })
        })
        .collect();
    Ok(json_bytes(&json!({
        "kappa": cmd.phys.kappa,
        "gamma": cmd.phys.gamma,
        "omega_m": cmd.phys.omega_m,
        "fixed": { "axis": fixed.0, "value": fixed.1 },
        "range": range_json(&range),
        "events": events,
    })))
}

pub fn evolve(cmd: &EvolveCmd) -> CliResult<Vec<u8>> {
    if cmd.output.format == Some(Format::Json) {
        return config("evolve writes CSV only");
    }
    if !(cmd.t_end > 0.0) || cmd.samples == 0 {
        return config("evolve needs --t-end > 0 and --samples >= 1");
    }
    let p = params_from(&cmd.phys, &cmd.point)?;
    let times: Vec<f64> = (0..=cmd.samples).map(|k| cmd.t_end * k as f64 / cmd.samples as f64).collect();
    match cmd.mode {
        Mode::Semiclassical => {
            let a0 = Complex::new(cmd.alpha0.0, cmd.alpha0.1);
            let b0 = Complex::new(cmd.beta0.0, cmd.beta0.1);
            let tr = integrate_semiclassical(&p, a0, b0, &times, cmd.tol).map_err(kernel(
                "integrate_semiclassical",
                format!("{}, alpha0={a0}, beta0={b0}, t_end={}", describe(&p), cmd.t_end),
            ))?;
            let mut table = Table::new(&["t", "re_alpha", "im_alpha", "re_beta", "im_beta", "n"]);
            for ((t, a), b) in tr.times.iter().zip(&tr.alpha).zip(&tr.beta) {
                table.row([t, &a.re, &a.im, &b.re, &b.im, &a.norm_sqr()].map(|x| fmt_f64(*x)));
            }
            Ok(table.into_bytes())
        }
        Mode::Moments => {
            if !(cmd.v0 > 0.0) {
                return config("--v0 must be positive");
            }
            let id = cmd.branch.0;
            let v0 = Mat4::identity().scale(cmd.v0);
            let tr = evolve_moments(&p, id, cmd.x0.0, &v0, &times, cmd.tol).map_err(kernel(
                "evolve_moments",
                format!("{}, branch={id:?}, x0={:?}, v0={}, t_end={}", describe(&p), cmd.x0.0, cmd.v0, cmd.t_end),
            ))?;
            let mut header = vec!["t".to_string(), "x_c".into(), "p_c".into(), "x_m".into(), "p_m".into()];
            for i in 0..4 {
                for j in i..4 {
                    header.push(format!("v{}{}", i + 1, j + 1));
                }
            }
            let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            for ((t, x), v) in tr.times.iter().zip(&tr.x).zip(&tr.v) {
                let mut row = vec![fmt_f64(*t)];
                row.extend(x.iter().map(|x| fmt_f64(*x)));
                for i in 0..4 {
                    for j in i..4 {
                        row.push(fmt_f64(v[(i, j)]));
                    }
                }
                table.row(row);
            }
            Ok(table.into_bytes())
        }
    }
}

pub fn hysteresis(cmd: &HysteresisCmd) -> CliResult<Vec<u8>> {
    let Physical { kappa, gamma, omega_m } = cmd.phys;
    let template = Params::from_bare(cmd.delta, 0.0, kappa, gamma, omega_m)
        .map_err(kernel("model", format!("delta={}, kappa={kappa}, gamma={gamma}, omega_m={omega_m}", cmd.delta)))?;
    if cmd.e_tilde.0.min < 0.0 {
        return config("drive ramp must be non-negative");
    }
    let ramp = cmd.e_tilde.0.values();
    let rule = DwellRule { threshold: cmd.threshold, max_periods: cmd.max_periods, ..DwellRule::default() };
    let h = hysteresis_sweep(&template, &ramp, &rule).map_err(kernel(
        "hysteresis_sweep",
        format!("delta={}, e_tilde={:?}, kappa={kappa}, gamma={gamma}, omega_m={omega_m}", cmd.delta, cmd.e_tilde.0),
    ))?;
    if cmd.output.format == Some(Format::Json) {
        let pts = |v: &[dptom_core::semiclassical::SweepPoint<f64>]| -> Vec<Value> {
            v.iter().map(|p| json!({ "e_tilde": p.e_tilde, "n_tilde": p.n_tilde, "converged": p.converged })).collect()
        };
        return Ok(json_bytes(&json!({
            "delta": cmd.delta,
            "kappa": kappa,
            "gamma": gamma,
            "omega_m": omega_m,
            "bistable_window": bistable_window(cmd.delta, kappa, gamma, omega_m).map(|(a, b)| [a, b]),
            "max_gap": h.max_gap(),
            "up": pts(&h.up),
            "down": pts(&h.down),
        })));
    }
    let mut table = Table::new(&["sweep", "e_tilde", "n_tilde", "converged"]);
    for (name, pts) in [("up", &h.up), ("down", &h.down)] {
        for p in pts {
            table.row([name.to_string(), fmt_f64(p.e_tilde), fmt_f64(p.n_tilde), flag(p.converged).to_string()]);
        }
    }
    Ok(table.into_bytes())
}

pub fn covariance(cmd: &CovarianceCmd) -> CliResult<Vec<u8>> {
    if cmd.output.format == Some(Format::Csv) {
        return config("covariance writes JSON only");
    }
    let p = params_from(&cmd.phys, &cmd.point)?;
    let id = match cmd.branch {
        Some(b) => b.0,
        None => {
            let sig = classify_params(&p, &cmd.tol.resolve());
            match BranchRule::default().select(&sig) {
                Some(id) => id,
                None => {
                    return Err(kernel("classify_params", describe(&p))(dptom_core::Error::UnstableDrift {
                        max_real: sig
                            .reports
                            .iter()
                            .flatten()
                            .map(|r| r.spectrum.max_real())
                            .fold(f64::NEG_INFINITY, f64::max),
                    }))
                }
            }
        }
    };
    let inputs = format!("{}, branch={id:?}", describe(&p));
    let state = steady_covariance(&p, id).map_err(kernel("steady_covariance", &inputs))?;
    let v = state.v;
    let en = log_negativity(&v).map_err(kernel("log_negativity", &inputs))?;
    let sq = squeezing_spectrum(&v).map_err(kernel("squeezing_spectrum", &inputs))?;
    let fl = photon_fluctuations(&v).map_err(kernel("photon_fluctuations", &inputs))?;
    let (nu_minus, nu_plus) = symplectic_eigenvalues(&v).map_err(kernel("symplectic_eigenvalues", &inputs))?;
    Ok(json_bytes(&json!({
        "params": params_json(&p),
        "branch": id,
        "x_s": state.x_s,
        "v": v.0,
        "symplectic": [nu_minus, nu_plus],
        "entanglement": {
            "sigma": en.sigma,
            "eta_minus": en.eta_minus,
            "log_neg": en.log_neg,
            "entangled": en.entangled,
        },
        "squeezing": {
            "min_eigenvalue": sq.min_eigenvalue,
            "min_quadrature_diagonal": sq.min_quadrature_diagonal,
            "squeezed_hybrid": sq.squeezed_hybrid,
            "squeezed_local": sq.squeezed_local,
        },
        "fluctuations": fl,
    })))
}

pub fn critical(cmd: &CriticalCmd) -> CliResult<Vec<u8>> {
    if cmd.output.format == Some(Format::Csv) {
        return config("critical writes JSON only");
    }
    let Physical { kappa, gamma, omega_m } = cmd.phys;
    // Validate rates up front so bad input exits as a configuration error.
    Params::from_effective(0.0, 0.0, kappa, gamma, omega_m)
        .map_err(kernel("model", format!("kappa={kappa}, gamma={gamma}, omega_m={omega_m}")))?;
    let opts = ExponentOptions {
        window: (cmd.window.0, cmd.window.1),
        samples: cmd.samples,
        side: cmd.side.into(),
        ..ExponentOptions::default()
    };
    let ex = estimate_exponents(kappa, gamma, omega_m, &opts).map_err(kernel(
        "estimate_exponents",
        format!("kappa={kappa}, gamma={gamma}, omega_m={omega_m}, window={:?}, side={:?}", opts.window, cmd.side),
    ))?;
    let c = ex.critical;
    Ok(json_bytes(&json!({
        "kappa": kappa,
        "gamma": gamma,
        "omega_m": omega_m,
        "dtilde_c": c.dtilde,
        "g_c": c.g,
        "soft_residual": c.soft_residual,
        "fold_residual": c.fold_residual,
        "iterations": c.iterations,
        "side": ex.side,
        "branch": ex.branch,
        "window": [opts.window.0, opts.window.1],
        "nu_adr": ex.nu_adr.slope,
        "nu_adr_r_squared": ex.nu_adr.r_squared,
        "nu_c": ex.nu_c.slope,
        "nu_c_r_squared": ex.nu_c.r_squared,
        "samples": {
            "offset": ex.offsets,
            "adr": ex.adr,
            "fluctuations": ex.fluctuations,
        },
    })))
}

pub fn spectrum(cmd: &SpectrumCmd) -> CliResult<Vec<u8>> {
    if cmd.output.format == Some(Format::Json) {
        return config("spectrum writes CSV only");
    }
    if cmd.g.0.min < 0.0 {
        return config("g range must be non-negative");
    }
    let Physical { kappa, gamma, omega_m } = cmd.phys;
    let tol: Tol = cmd.tol.resolve();
    let mut header = vec!["dtilde", "g", "branch", "class"];
    header.extend(["re1", "im1", "re2", "im2", "re3", "im3", "re4", "im4"]);
    let mut table = Table::new(&header);
    for g in cmd.g.0.values() {
        let p = Params::from_effective(cmd.dtilde, g, kappa, gamma, omega_m).map_err(kernel(
            "model",
            format!("dtilde={}, g={g}, kappa={kappa}, gamma={gamma}, omega_m={omega_m}", cmd.dtilde),
        ))?;
        let sig = classify_params(&p, &tol);
        for id in BranchId::ALL {
            let class = sig.classes[id.index()];
            let Some(report) = sig.reports[id.index()] else { continue };
            if class == StabilityClass::Unphysical {
                continue;
            }
            let mut row = vec![fmt_f64(cmd.dtilde), fmt_f64(g), format!("{id:?}"), class.to_string()];
            for z in report.spectrum.eigenvalues {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            table.row(row);
        }
    }
    Ok(table.into_bytes())
}
