use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_fn(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn constants_row_at_two() {
    let out = run(&["constants", "--p", "2"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    assert!(csv.starts_with("p,tau,c_p,alpha0,beta0,r_alpha0,gap"));
    let cp = column(&csv, "c_p")[0];
    assert!((cp - 3f64.powf(0.75) / 2f64.sqrt()).abs() < 1e-12);
    assert!(column(&csv, "gap")[0] <= 1e-10);
}

#[test]
fn constants_batch_and_domain() {
    let out = run(&["constants", "--p", "1.5,2,3,5,10"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 6);
    assert_eq!(code(&run(&["constants", "--p", "0.5"])), 2);
}

#[test]
fn maxfn_tent_value_at_two() {
    let out = run(&["maxfn", "--fn", "tent", "--points", "-2,2"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let g = column(&csv, "g");
    let want = (3.0 - 7f64.sqrt()) / 2.0;
    assert!(g.iter().all(|v| (v - want).abs() < 1e-12), "{csv}");
}

#[test]
fn maxfn_tent_profile_is_even() {
    let out = run(&["maxfn", "--grid", "50,1e-3,100"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let (x, g, s) = (column(&csv, "x"), column(&csv, "g"), column(&csv, "s"));
    let n = x.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        assert_eq!(x[i], -x[j]);
        assert!((g[i] - g[j]).abs() <= 1e-14 * g[i]);
        assert!((s[i] + s[j]).abs() <= 1e-12 * s[j].abs());
    }
}

#[test]
fn maxfn_gate_and_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    // Indicator of [-1, 1] with steep ramps: not convex off the peak.
    let ind = write_fn(
        dir.path(),
        "ind.json",
        r#"{"breakpoints":[-1.0001,-1,1,1.0001],"values":[0,1,1,0],"peak_index":1}"#,
    );
    assert_eq!(code(&run(&["maxfn", "--fn", &ind, "--require-peak"])), 2);
    let bad = write_fn(dir.path(), "bad.json", r#"{"breakpoints":[0,1"#);
    assert_eq!(code(&run(&["maxfn", "--fn", &bad])), 2);
    assert_eq!(code(&run(&["maxfn", "--fn", "/no/such/file.json"])), 2);
    assert_eq!(code(&run(&["maxfn", "--points", "0"])), 2);
}

#[test]
fn maxfn_reads_function_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_fn(
        dir.path(),
        "jump.json",
        r#"{"breakpoints":[-1,0,0,1],"values":[0,1,2,0],"peak_index":1}"#,
    );
    let out_path = dir.path().join("profile.json");
    let out = run(&[
        "maxfn",
        "--fn",
        &f,
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["checks"]["mf_peakshape"]["is_peak_shaped"], true);
    assert_eq!(v["profile"]["g"].as_array().unwrap().len(), 800);
}

#[test]
fn sharpness_family_and_size_gate() {
    let out = run(&["sharpness", "--p", "2"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let ratio = column(&csv, "ratio");
    let c2 = 3f64.powf(0.75) / 2f64.sqrt();
    assert!(ratio.windows(2).all(|w| w[1] >= w[0]));
    assert!(ratio.iter().all(|&r| r <= c2 * (1.0 + 1e-6)));
    assert!(*ratio.last().unwrap() >= 0.98 * c2);
    assert_eq!(code(&run(&["sharpness", "--caps", "10"])), 2);
    // An unattainable band turns into a failed check.
    assert_eq!(
        code(&run(&["sharpness", "--caps", "10,20,40", "--band", "0.001"])),
        1
    );
}

#[test]
fn variational_tent_and_domain() {
    let out = run(&[
        "variational",
        "--fn",
        "tent",
        "--p",
        "2",
        "--alpha",
        "auto",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rep = &v[0]["report"];
    assert!(rep["i_s_rel_gap"].as_f64().unwrap().abs() < 5e-3);
    assert!(rep["el_residual_max"].as_f64().unwrap() < 1e-9);
    assert_eq!(code(&run(&["variational", "--alpha", "0.3"])), 2);
}

#[test]
fn variational_seed_sweep() {
    let out = run(&["variational", "--seed", "0", "--count", "20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 21);
    // A budget far below the quadrature error is a failed check.
    assert_eq!(code(&run(&["variational", "--tol", "1e-9"])), 1);
}

#[test]
fn weaktype_levels() {
    let out = run(&["weaktype"]);
    assert_eq!(code(&out), 0);
    let ratio = column(&stdout(&out), "ratio");
    assert!(ratio.iter().all(|&r| r <= 1.0 + 1e-6));
    assert!(ratio.iter().cloned().fold(0.0, f64::max) >= 0.95);
    let above = run(&["weaktype", "--lambdas", "2"]);
    assert_eq!(code(&above), 0);
    assert_eq!(column(&stdout(&above), "ratio"), vec![0.0]);
    assert_eq!(code(&run(&["weaktype", "--lambdas", "-1"])), 2);
    assert_eq!(code(&run(&["weaktype", "--p", "2"])), 2);
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = run(&[
            "variational",
            "--seed",
            "5",
            "--count",
            "3",
            "--format",
            "json",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let first = stdout(&run(&["weaktype", "--seed", "2", "--count", "3"]));
    let second = stdout(&run(&["weaktype", "--seed", "2", "--count", "3"]));
    assert_eq!(first, second);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["nonsense"])), 2);
    assert_eq!(code(&run(&["maxfn", "--grid", "10,1"])), 2);
    assert_eq!(code(&run(&["constants", "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["variational", "--count", "0"])), 2);
}
