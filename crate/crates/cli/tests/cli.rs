use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dptom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dptom"))
        .args(args)
        .env_remove("DPTOM_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = dptom(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn ok_json(args: &[&str]) -> Value {
    serde_json::from_slice(&ok(args)).expect("valid JSON")
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = dptom(args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn branches_at_a_bistable_point() {
    let doc = ok_json(&["branches", "--dtilde", "-0.2", "--g", "0.45", "--kappa", "0.25", "--gamma", "0"]);
    assert_valid("branches", &doc);
    let b = doc["branches"].as_array().unwrap();
    assert_eq!(b.len(), 3);
    assert_eq!(b.iter().map(|x| x["id"].as_str().unwrap()).collect::<Vec<_>>(), ["I", "II", "III"]);
    assert!(b.iter().all(|x| x["physical"] == true));
    assert_eq!(doc["params"]["dtilde"], -0.2);
}

#[test]
fn bare_and_effective_inputs_agree() {
    let eff = ok_json(&["branches", "--dtilde", "-0.5", "--g", "0.3", "--kappa", "0.25", "--gamma", "0.1"]);
    let delta = eff["params"]["delta"].as_f64().unwrap().to_string();
    let e = eff["params"]["e_tilde"].as_f64().unwrap().to_string();
    let bare = ok_json(&["branches", "--delta", &delta, "--e-tilde", &e, "--kappa", "0.25", "--gamma", "0.1"]);
    assert_eq!(eff["region"], bare["region"]);
    let g = bare["params"]["g"].as_f64().unwrap();
    assert!((g - 0.3).abs() < 1e-12, "{g}");
}

#[test]
fn phase_diagram_csv_contract() {
    let args = ["phase-diagram", "--dtilde", "-2:0.5:40", "--g", "0:1:40", "--kappa", "0.25", "--gamma", "0"];
    let csv = String::from_utf8(ok(&args)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "dtilde,g,region,n1,n2,n3,stable_I,stable_II,stable_III,gap_real,gap_imag");
    assert_eq!(lines.count(), 1600);
    assert!(!csv.contains('\r'));
    let with = String::from_utf8(ok(&[&args[..], &["--measures", "all"]].concat())).unwrap();
    assert!(with.starts_with(
        "dtilde,g,region,n1,n2,n3,stable_I,stable_II,stable_III,gap_real,gap_imag,branch,log_neg,min_eigenvalue,min_quadrature_diagonal,fluctuations\n"
    ));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        ok(&[
            "--threads", threads, "phase-diagram", "--dtilde", "-1.5:0.3:30", "--g", "0:0.9:30", "--kappa", "0.25",
            "--gamma", "0.05", "--measures", "all", "--out", path.to_str().unwrap(),
        ]);
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    let c = run("c.csv", "4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(b, c);
    let entries: Vec<PathBuf> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 3, "no temporary files left behind: {entries:?}");
}

#[test]
fn critical_point_and_exponents() {
    let doc = ok_json(&["critical", "--kappa", "0.25", "--gamma", "0"]);
    assert_valid("critical", &doc);
    let d = doc["dtilde_c"].as_f64().unwrap();
    let g = doc["g_c"].as_f64().unwrap();
    let r = 1.0 / (4.0 * 3f64.sqrt());
    assert!((d + r).abs() < 1e-3 && (g - r.sqrt()).abs() < 1e-3, "({d}, {g})");
    let nu_adr = doc["nu_adr"].as_f64().unwrap();
    let nu_c = doc["nu_c"].as_f64().unwrap();
    assert!((nu_adr - 1.0).abs() < 0.05 && (nu_c + 1.0).abs() < 0.05, "{nu_adr}, {nu_c}");
}

#[test]
fn json_outputs_match_their_schemas() {
    let p = ["--kappa", "0.25", "--gamma", "0.05"];
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("phase-diagram", vec!["phase-diagram", "--dtilde", "-1:0.2:6", "--g", "0:0.8:5", "--measures", "all", "--format", "json"]),
        ("slice", vec!["slice", "--dtilde", "-0.2", "--g", "0:1:100"]),
        ("slice", vec!["slice", "--dtilde", "-1.5:0:100", "--g", "0.4"]),
        ("hysteresis", vec!["hysteresis", "--delta", "-0.6", "--e-tilde", "0.1:0.18:9", "--format", "json"]),
        ("covariance", vec!["covariance", "--dtilde", "-0.5", "--g", "0.3"]),
        ("covariance", vec!["covariance", "--dtilde", "-1", "--g", "0.1", "--branch", "I"]),
        ("branches", vec!["branches", "--dtilde", "0.3", "--g", "0.2"]),
    ];
    for (name, args) in cases {
        let doc = ok_json(&[&args[..], &p[..]].concat());
        assert_valid(name, &doc);
    }
}

#[test]
fn time_series_and_spectrum_tables() {
    let sc = String::from_utf8(ok(&[
        "evolve", "--dtilde", "-1", "--g", "0.2", "--kappa", "0.25", "--gamma", "0", "--t-end", "5", "--samples", "10",
        "--alpha0", "0.1,-0.2",
    ]))
    .unwrap();
    assert!(sc.starts_with("t,re_alpha,im_alpha,re_beta,im_beta,n\n0,0.1,-0.2,0,0,"));
    assert_eq!(sc.lines().count(), 12);
    let mo = String::from_utf8(ok(&[
        "evolve", "--mode", "moments", "--dtilde", "-1", "--g", "0.2", "--kappa", "0.25", "--gamma", "0.1",
        "--t-end", "5", "--samples", "5",
    ]))
    .unwrap();
    assert!(mo.starts_with("t,x_c,p_c,x_m,p_m,v11,v12,v13,v14,v22,v23,v24,v33,v34,v44\n0,0,0,0,0,0.5,0,0,0,0.5,"));
    let sp = String::from_utf8(ok(&[
        "spectrum", "--dtilde", "-1", "--g", "0.3:0.7:5", "--kappa", "0.25", "--gamma", "0",
    ]))
    .unwrap();
    assert!(sp.starts_with("dtilde,g,branch,class,re1,im1,re2,im2,re3,im3,re4,im4\n"));
    assert!(sp.lines().skip(1).all(|l| l.split(',').count() == 12));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# anchor point\ndtilde = -0.2\ng = 0.45\nkappa = 0.5\ngamma = 0\n").unwrap();
    let from_file = ok(&["--config", cfg.to_str().unwrap(), "branches", "--kappa", "0.25"]);
    let direct = ok(&["branches", "--dtilde", "-0.2", "--g", "0.45", "--kappa", "0.25", "--gamma", "0"]);
    assert_eq!(from_file, direct);

    std::fs::write(&cfg, "no_such_flag = 1\n").unwrap();
    assert_eq!(exit_code(&["--config", cfg.to_str().unwrap(), "branches"]).0, 2);
    std::fs::write(&cfg, "kappa 0.25\n").unwrap();
    assert_eq!(exit_code(&["--config", cfg.to_str().unwrap(), "branches"]).0, 2);
    assert_eq!(exit_code(&["--config", dir.path().join("missing").to_str().unwrap(), "branches"]).0, 2);
}

#[test]
fn configuration_errors_exit_with_2() {
    let p = ["--kappa", "0.25", "--gamma", "0"];
    let bad: Vec<Vec<&str>> = vec![
        vec!["branches", "--dtilde", "-0.2"],
        vec!["branches", "--dtilde", "-0.2", "--g", "0.4", "--delta", "-0.3", "--e-tilde", "0.1"],
        vec!["branches", "--dtilde", "-0.2", "--g", "-0.4"],
        vec!["phase-diagram", "--dtilde", "0.5:-2:10", "--g", "0:1:10"],
        vec!["phase-diagram", "--dtilde", "-2:0.5", "--g", "0:1:10"],
        vec!["phase-diagram", "--dtilde", "-2:0.5:10", "--g", "0:1:10", "--rule", "D=I"],
        vec!["slice", "--dtilde", "-0.2", "--g", "0.3"],
        vec!["evolve", "--dtilde", "-1", "--g", "0.2", "--t-end", "0"],
        vec!["critical", "--window", "1e-2:1e-4"],
        vec!["branches", "--dtilde", "-0.2", "--g", "0.4", "--format", "csv"],
        vec!["nonsense"],
    ];
    for args in bad {
        let (code, err) = exit_code(&[&args[..], &p[..]].concat());
        assert_eq!(code, 2, "{args:?}: {err}");
    }
    let (code, err) = exit_code(&["branches", "--dtilde", "0", "--g", "0", "--kappa", "-1", "--gamma", "0"]);
    assert_eq!(code, 2, "{err}");
    let out = Command::new(env!("CARGO_BIN_EXE_dptom"))
        .args(["critical", "--kappa", "0.25", "--gamma", "0"])
        .env("DPTOM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(exit_code(&["--help"]).0, 0);
}

#[test]
fn numerical_failures_exit_with_3_and_name_the_kernel() {
    // Branch III is hard-unstable here, so it has no steady covariance.
    let (code, err) = exit_code(&[
        "covariance", "--dtilde", "-1", "--g", "0.4", "--kappa", "0.25", "--gamma", "0", "--branch", "III",
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("steady_covariance") && err.contains("dtilde=-1") && err.contains("branch=III"), "{err}");
    // Above the hard threshold on this line every branch is unstable.
    let (code, err) = exit_code(&["covariance", "--dtilde", "0.5", "--g", "1", "--kappa", "0.25", "--gamma", "0"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.json");
    let (code, err) = exit_code(&[
        "critical", "--kappa", "0.25", "--gamma", "0", "--out", target.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
    assert!(!target.exists());
}
