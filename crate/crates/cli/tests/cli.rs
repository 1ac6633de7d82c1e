use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossgeom")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Scalar field of the JSON record; vectors are addressed as `key_1..`.
fn value(args: &[&str], key: &str) -> serde_json::Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let v: serde_json::Value = serde_json::from_str(&stdout(&full)).unwrap();
    match key.rsplit_once('_').and_then(|(k, i)| Some((k, i.parse::<usize>().ok()?))) {
        Some((k, i)) if v.get(key).is_none() => v[k][i - 1].clone(),
        _ => v[key].clone(),
    }
}

fn num(args: &[&str], key: &str) -> f64 {
    value(args, key).as_f64().unwrap_or_else(|| panic!("{key} is not numeric"))
}

#[test]
fn eval_log_and_brier() {
    let out = stdout(&["eval", "--loss", "log", "--p", "0.5,0.5"]);
    assert_eq!(out, "loss,p_1,p_2,l_1,l_2,rho\nlog:n=2,0.5,0.5,0.69314718056,0.69314718056,0.69314718056\n");
    let args = ["eval", "--loss", "brier", "--p", "0.2,0.8"];
    let l = [num(&args, "l_1"), num(&args, "l_2"), num(&args, "rho")];
    for (got, want) in l.iter().zip([1.28, 0.08, 0.32]) {
        assert!((got - want).abs() < 1e-12, "{l:?}");
    }
}

#[test]
fn bad_input_exits_two() {
    let out = run(&["eval", "--loss", "cnorm:a=0", "--p", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains('^'), "{err}");
    assert_eq!(run(&["eval", "--loss", "log", "--p=-0.1,1.1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--loss", "log:n=3", "--p", "0.5,0.5"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--loss", "log"]).status.code(), Some(2));
}

#[test]
fn antipolar_of_self_polar_losses_is_one_at_uniform() {
    for loss in ["brier", "zeroone", "cd:a=1,1"] {
        let v = num(&["antipolar", "--loss", loss, "--x", "0.5,0.5"], "value");
        assert!((v - 1.0).abs() < 1e-9, "{loss}: {v}");
    }
    let args = ["antipolar", "--loss", "log", "--x", "0.3,0.7", "--method", "numeric"];
    assert_eq!(value(&args, "method"), "numeric");
}

#[test]
fn boundary_rows() {
    let out = stdout(&["boundary", "--loss", "log", "--resolution", "4"]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,l1,l2");
    assert_eq!(rows[2], "0.5,0.69314718056,0.69314718056");
    assert_eq!(rows.len(), 4);
    let out = stdout(&["boundary", "--loss", "normloss:alpha=2", "--resolution", "2"]);
    assert!(out.contains("\n0.5,1,1\n"), "{out}");
}

#[test]
fn normalize_and_shiftmax() {
    let out = stdout(&["normalize", "--loss", "log"]);
    assert!(out.lines().nth(1).unwrap().starts_with("log:n=2,1.44269504089,"), "{out}");
    assert!((num(&["normalize", "--loss", "log"], "peak") - 1.0).abs() < 1e-12);
    let args = ["shiftmax", "--loss", "brier", "--p0", "0.25,0.75"];
    let spacing = num(&args, "grid_spacing");
    assert!((num(&args, "grid_argmax_1") - 0.25).abs() <= spacing);
    assert!((num(&args, "loss_at_p0_1") - 1.0).abs() < 1e-12);
}

#[test]
fn bregman_of_log_is_kl() {
    let b = num(&["bregman", "--loss", "log", "--p", "0.2,0.8", "--q", "0.5,0.5"], "bregman");
    let kl = 0.2 * (0.2f64 / 0.5).ln() + 0.8 * (0.8f64 / 0.5).ln();
    assert!((b - kl).abs() < 1e-11);
}

#[test]
fn verify_passes_for_shipped_families() {
    for n in ["2", "3"] {
        for loss in ["log", "brier", "zeroone", "const", "cnorm:a=-1", "cnorm:a=0.5", "normloss:alpha=inf"] {
            let out = run(&["verify", "--loss", loss, "--n", n, "--resolution", "12"]);
            assert_eq!(out.status.code(), Some(0), "{loss} n={n}: {}", String::from_utf8_lossy(&out.stdout));
        }
    }
    let out = run(&["verify", "--loss", "msum:combiner=cnorm:a=-inf;parts=[log],[brier];mode=dual", "--resolution", "12"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_fails_under_an_impossible_tolerance() {
    let out = run(&["verify", "--loss", "log", "--tol=-1", "--resolution", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn compose_reports_parts_or_split() {
    let args = ["compose", "--loss", "msum:combiner=const;parts=[log],[brier]", "--p", "0.3,0.7"];
    let parts = num(&args, "part_risks_1") + num(&args, "part_risks_2");
    assert!((num(&args, "rho") - parts).abs() < 1e-9);
    let args = ["compose", "--loss", "msum:combiner=cnorm:a=-inf;parts=[log],[brier];mode=dual", "--p", "0.3,0.7"];
    assert!(num(&args, "gap") < 1e-6);
}

#[test]
fn json_output_and_out_file() {
    let out = stdout(&["--format", "json", "eval", "--loss", "log", "--p", "0.5,0.5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["loss"], "log:n=2");
    assert_eq!(v["l"].as_array().unwrap().len(), 2);

    let path = std::env::temp_dir().join(format!("lossgeom-cli-{}.csv", std::process::id()));
    let printed = stdout(&["eval", "--loss", "brier", "--p", "0.2,0.8"]);
    stdout(&["--out", path.to_str().unwrap(), "eval", "--loss", "brier", "--p", "0.2,0.8"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    std::fs::remove_file(path).ok();
}

#[test]
fn runs_are_deterministic() {
    let args = ["antipolar", "--loss", "normloss:alpha=3", "--x", "0.2,0.3,0.5", "--method", "numeric"];
    assert_eq!(stdout(&args), stdout(&args));
}
