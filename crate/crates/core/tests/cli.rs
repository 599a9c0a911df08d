use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qollide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qollide")).args(args).output().expect("binary runs")
}

fn qollide_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qollide"))
        .args(args)
        .env("QOLLIDE_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn close(v: &Value, expected: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < 1e-12
}

#[test]
fn coeffs_dicke() {
    let v = json(&qollide(&["coeffs", "--bath", "dicke", "--N", "8", "--k", "3"]));
    assert!(close(&v["coefficients"]["r_e"], 18.0));
    assert!(close(&v["coefficients"]["r_d"], 20.0));
    assert_eq!(v["bath"]["kind"], "dicke");
}

#[test]
fn coeffs_product() {
    let v = json(&qollide(&["coeffs", "--bath", "product", "--N", "3", "--pe", "0.2"]));
    assert!(close(&v["coefficients"]["r_e"], 0.6));
    assert!(close(&v["coefficients"]["r_d"], 2.4));
}

#[test]
fn coeffs_explicit_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.csv");
    let mut text = String::from("N=2,basis=excitation-sorted\n");
    for i in 0..4 {
        let row: Vec<&str> = (0..4).map(|j| if i == j { "0.25" } else { "0" }).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let v = json(&qollide(&["coeffs", "--bath", "explicit", "--file", path.to_str().unwrap()]));
    assert!(close(&v["coefficients"]["r_e"], 1.0));
    assert!(close(&v["coefficients"]["r_d"], 1.0));
}

#[test]
fn config_errors_name_the_field() {
    for (args, field) in [
        (vec!["coeffs", "--bath", "dicke", "--N", "8"], "`k`"),
        (vec!["coeffs", "--bath", "dicke", "--N", "8", "--k", "9"], "`k`"),
        (vec!["coeffs", "--bath", "product", "--N", "3", "--pe", "1.5"], "`pe`"),
        (vec!["coeffs", "--bath", "nonsense", "--N", "3"], "`bath`"),
        (vec!["coeffs", "--bath", "dicke", "--N", "4", "--k", "1", "--tau", "-1"], "`tau`"),
        (vec!["sweep", "--family", "dicke", "--N", "8:4"], "`N`"),
        (vec!["evolve", "--bath", "dicke", "--N", "4", "--k", "1", "--engine", "collisions", "--dt", "1"], "`dt`"),
    ] {
        let out = qollide(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{args:?}: {err}");
    }
}

#[test]
fn unknown_flag_is_a_config_error() {
    assert_eq!(qollide(&["coeffs", "--colour", "red"]).status.code(), Some(2));
    assert_eq!(qollide(&[]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exit_code() {
    let out = qollide(&["prepare", "--N", "8", "--nbar", "2", "--dt", "0.5", "--t_end", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# dicke bath\nbath = dicke\nN = 8\nk = 1\n").unwrap();
    let v = json(&qollide(&["coeffs", "--config", cfg.to_str().unwrap(), "--k", "3"]));
    assert!(close(&v["coefficients"]["r_e"], 18.0));
    std::fs::write(&cfg, "bath = dicke\nvolume = 11\n").unwrap();
    assert_eq!(qollide(&["coeffs", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_grid_gives_header_only() {
    let out = stdout(&qollide(&["evolve", "--bath", "dicke", "--N", "8", "--k", "3", "--n_points", "0"]));
    assert_eq!(out, "t,mu_t,rho_ee,rho_gg,re_rho_eg,im_rho_eg,temperature,entropy\n");
}

#[test]
fn decay_reaches_inverse_e_at_one_over_38() {
    let out = stdout(&qollide(&[
        "evolve", "--bath", "dicke", "--N", "8", "--k", "3", "--time", "scaled", "--t_end", "0.2", "--n_points", "2",
    ]));
    // one step from the ground state: rho_ee = r_e/(r_e + r_d) (1 − e^{−μt·38})
    let row: Vec<f64> = out.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let expected = 18.0 / 38.0 * (1.0 - (-0.2f64 * 38.0).exp());
    assert!((row[2] - expected).abs() < 1e-12);
}

#[test]
fn engines_agree() {
    let base = ["evolve", "--bath", "dicke", "--N", "4", "--k", "1", "--n_points", "11"];
    let parse = |out: String| -> Vec<f64> {
        out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect()
    };
    let analytic = parse(stdout(&qollide(&base)));
    let ode = parse(stdout(&qollide(&[&base[..], &["--engine", "ode"]].concat())));
    let coll = parse(stdout(&qollide(&[&base[..], &["--engine", "collisions"]].concat())));
    for i in 0..analytic.len() {
        assert!((analytic[i] - ode[i]).abs() < 1e-8);
        assert!((analytic[i] - coll[i]).abs() < 0.05);
    }
}

#[test]
fn analytic_engine_rejects_coherent_bath() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plus.csv");
    std::fs::write(&path, "N=1,basis=excitation-sorted\n0.5,0.5\n0.5,0.5\n").unwrap();
    let file = path.to_str().unwrap();
    let out = qollide(&["evolve", "--bath", "explicit", "--file", file]);
    assert_eq!(out.status.code(), Some(2));
    let out = qollide(&["evolve", "--bath", "explicit", "--file", file, "--engine", "ode", "--n_points", "5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("temperatures use populations only"));
}

#[test]
fn stochastic_output_independent_of_threads() {
    let args = [
        "evolve", "--bath", "dicke", "--N", "3", "--k", "1", "--engine", "collisions", "--scheme", "stochastic",
        "--trajectories", "200", "--seed", "7", "--n_points", "6",
    ];
    let one = qollide_env(&args, "1");
    let four = qollide_env(&args, "4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, qollide_env(&args, "4").stdout);
    assert_eq!(qollide_env(&args, "zero").status.code(), Some(2));
}

#[test]
fn sweep_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let slopes = dir.path().join("slopes.json");
    let csv = stdout(&qollide(&[
        "sweep", "--family", "product", "--pe", "0.2", "--N", "2:32:2", "--slopes", slopes.to_str().unwrap(),
    ]));
    assert_eq!(csv.lines().next().unwrap(), "N,k,r_e,r_d,t_q,T_q");
    assert_eq!(csv.lines().count(), 17);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&slopes).unwrap()).unwrap();
    assert!((v["slope_t_q"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let csv = stdout(&qollide(&["sweep", "--family", "thermal-hec", "--nbar", "1", "--N", "2:10"]));
    let temps: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert!(temps.iter().all(|t| (t - 1.0 / 2f64.ln()).abs() < 1e-12));
}

#[test]
fn classify_two_qubits() {
    let v = json(&qollide(&["classify", "--N", "2"]));
    assert_eq!(v["block_sizes"], serde_json::json!([1, 2, 1]));
    let squeezing: Vec<(String, String)> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["primary"] == "squeezing")
        .map(|e| (e["row"].as_str().unwrap().to_string(), e["col"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(squeezing, vec![("gg".into(), "ee".into()), ("ee".into(), "gg".into())]);
}

#[test]
fn classify_four_qubit_complements_are_ineffective() {
    let v = json(&qollide(&["classify", "--bath", "dicke", "--N", "4", "--k", "2"]));
    for e in v["entries"].as_array().unwrap() {
        let (row, col) = (e["row"].as_str().unwrap(), e["col"].as_str().unwrap());
        let complement = row.chars().zip(col.chars()).all(|(a, b)| a != b);
        if complement && e["k_row"] == 2 && e["k_col"] == 2 {
            assert_eq!(e["primary"], "ineffective", "{row} {col}");
            assert_eq!(e["occupied"], true);
        }
    }
    assert!(v["occupied_counts"]["ineffective"].as_u64().unwrap() > 0);
}

#[test]
fn classify_single_qubit() {
    let v = json(&qollide(&["classify", "--N", "1"]));
    assert_eq!(v["counts"]["squeezing"], 0);
    assert_eq!(v["counts"]["hec"], 0);
    let text = stdout(&qollide(&["classify", "--N", "1", "--format", "text"]));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn prepare_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("bath.csv");
    let csv = stdout(&qollide(&["prepare", "--N", "4", "--nbar", "1", "--matrix", matrix.to_str().unwrap()]));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    for k in 0..4 {
        assert!((last[k + 1] / last[k] - 0.5).abs() < 1e-6);
    }
    let v = json(&qollide(&["coeffs", "--bath", "explicit", "--file", matrix.to_str().unwrap()]));
    let hec = json(&qollide(&["coeffs", "--bath", "thermal-hec", "--N", "4", "--nbar", "1"]));
    assert!((v["coefficients"]["r_e"].as_f64().unwrap() - hec["coefficients"]["r_e"].as_f64().unwrap()).abs() < 1e-6);

    let csv = stdout(&qollide(&["prepare", "--N", "1", "--nbar", "0.5"]));
    let excited: f64 = csv.lines().last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((excited - 0.25).abs() < 1e-9);

    let csv = stdout(&qollide(&["prepare", "--N", "3", "--nbar", "1", "--t_end", "0"]));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0,0.0"));
}

#[test]
fn failed_runs_leave_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let status = qollide(&[
        "evolve", "--bath", "dicke", "--N", "4", "--k", "1", "--engine", "bogus", "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    assert!(!out.exists());
    let status = qollide(&["prepare", "--N", "8", "--nbar", "2", "--dt", "0.5", "-o", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(3));
    assert!(!out.exists());
    let missing = dir.path().join("no/such/dir/x.csv");
    assert_eq!(qollide(&["coeffs", "--bath", "dicke", "--N", "4", "--k", "1", "-o", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = qollide(&["evolve", "--bath", "thermal-hec", "--N", "3", "--nbar", "1", "--engine", "ode", "-o", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(Path::new(&b)).unwrap());
    assert_eq!(a, b);
    assert!(!a.contains(&b'\r'));
}
