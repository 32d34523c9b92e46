use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrw"))
        .args(args)
        .env("RRW_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schema() -> jsonschema::Validator {
    let text = fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schema/result.schema.json"
    ))
    .unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(file: &Path) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    let validator = schema();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    v
}

fn simulate(dir: &Path, name: &str, seed: &str) -> std::path::PathBuf {
    let file = dir.join(name);
    let o = rrw(&[
        "simulate",
        "--alpha",
        "1",
        "--c",
        "1",
        "--paths",
        "50",
        "--length",
        "100",
        "--seed",
        seed,
        "--out",
        s(&file),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    file
}

#[test]
fn fisher_prints_table_value() {
    let o = rrw(&[
        "fisher", "--alpha", "0.5", "--c", "0.5", "--length", "100", "--paths", "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("sigma_alpha/sqrt(N) = 5.02e-2"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.csv", "7");
    let b = simulate(dir.path(), "b.csv", "7");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = simulate(dir.path(), "c.csv", "8");
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let first = fs::read_to_string(&a).unwrap();
    assert!(first.starts_with("x1,x2,"));
    assert_eq!(first.lines().count(), 51);
}

#[test]
fn fit_writes_schema_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", "3");
    for method in ["mle", "wlse", "wlse-eff"] {
        let out = dir.path().join(format!("{method}.json"));
        let o = rrw(&[
            "fit",
            "--input",
            s(&data),
            "--method",
            method,
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v = assert_valid(&out);
        assert_eq!(v["method"], method);
        // efficient weights are erratic at N = 50, so only the other two are checked
        let alpha = v["theta_hat"]["alpha"].as_f64().unwrap();
        assert!(
            method == "wlse-eff" || (alpha - 1.0).abs() < 0.3,
            "{method}: {alpha}"
        );
        assert!(v["covariance"].is_array());
    }
    let out = dir.path().join("sym.json");
    let o = rrw(&[
        "fit",
        "--input",
        s(&data),
        "--method",
        "wlse",
        "--symmetrized",
        "--fix-c",
        "1",
        "--box",
        "0.1,10,0.1,100",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = assert_valid(&out);
    assert_eq!(v["method"], "wlse-sym");
    assert_eq!(v["theta_hat"]["c"], 1.0);
}

#[test]
fn bootstrap_writes_interval_and_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", "5");
    let out = dir.path().join("boot.json");
    let args = [
        "bootstrap",
        "--input",
        s(&data),
        "--method",
        "mle",
        "--B",
        "60",
        "--level",
        "0.9",
        "--seed",
        "11",
        "--out",
        s(&out),
    ];
    let o = rrw(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = assert_valid(&out);
    assert_eq!(v["ci"]["kind"], "pivotal");
    assert_eq!(v["seed"], 11);
    let lo = v["ci"]["alpha"][0].as_f64().unwrap();
    let hi = v["ci"]["alpha"][1].as_f64().unwrap();
    assert!(lo <= hi);
    let reps = fs::read_to_string(dir.path().join("boot.replicates.csv")).unwrap();
    assert_eq!(reps.lines().next(), Some("alpha,c"));
    assert_eq!(reps.lines().count(), 61);
    // same seed, same bytes
    let first = fs::read(&out).unwrap();
    assert!(rrw(&args).status.success());
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn profile_lists_one_row_per_c() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", "9");
    let out = dir.path().join("profile.csv");
    let o = rrw(&[
        "profile",
        "--input",
        s(&data),
        "--c-values",
        "0.5,1,2",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("c,alpha_hat,objective,at_boundary"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = rrw(&["fit", "--input", s(&empty)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EmptyData"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0\n0,2\n").unwrap();
    let o = rrw(&["fit", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = rrw(&["fit", "--input", s(&dir.path().join("missing.csv"))]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(
        rrw(&["fit", "--input", s(&bad), "--method", "ols"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rrw(&["fit", "--input", s(&bad), "--box", "2,1,1,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rrw(&["fisher", "--alpha", "-1", "--c", "1", "--length", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rrw(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn std_study_from_toml_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("std.toml");
    fs::write(
        &cfg,
        "params = [[0.5, 0.5], [1.0, 1.0]]\nn_paths = 50\nlength = 100\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = rrw(&["study", "std", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("std.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(
        csv.lines().nth(1).unwrap().starts_with("0.5,0.5,5.02"),
        "{csv}"
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("std.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert!(report["tool_version"].is_string());

    let json_cfg = dir.path().join("phase.json");
    fs::write(
        &json_cfg,
        r#"{"params": [[1.0, 1.0]], "length": 50, "phase_reps": 1000, "seed": 4}"#,
    )
    .unwrap();
    let o = rrw(&["study", "phase", "--config", s(&json_cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("phase.csv").exists());

    fs::write(&cfg, "params = []\n").unwrap();
    assert_eq!(
        rrw(&["study", "std", "--config", s(&cfg), "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    fs::write(&cfg, "params = [[1, 1]]\nunknown = 3\n").unwrap();
    assert_eq!(
        rrw(&["study", "std", "--config", s(&cfg), "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn mse_study_writes_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mse.toml");
    fs::write(
        &cfg,
        "params = [[1.0, 1.0]]\nn_paths = 20\nlength = 30\nreps_mle = 4\nreps_wlse = 4\nmethods = [\"mle\", \"wlse-sym\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = rrw(&["study", "mse", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("mse.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    assert_eq!(
        fs::read_to_string(out.join("mse_estimates.csv"))
            .unwrap()
            .lines()
            .count(),
        9
    );
}
