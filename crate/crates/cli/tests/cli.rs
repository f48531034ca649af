use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_thermoscope"));
    c.env_remove("THERMOSCOPE_THREADS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path, command: &str) -> Value {
    let text = fs::read_to_string(out.join(format!("{command}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn schema_check(out: &Path, command: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join(format!("schemas/{command}_summary.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let doc = summary(out, command);
    let errors: Vec<String> = v
        .iter_errors(&doc)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{command}: {errors:?}");
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        o.status,
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn commands_write_valid_summaries() {
    let cases: &[(&str, &[&str])] = &[
        ("kernels", &["kernels", "--L", "4", "--beta", "5"]),
        (
            "spectrum",
            &["spectrum", "--line", "--x0", "1", "--beta-max", "80"],
        ),
        (
            "popov",
            &["popov", "--interval", "--L", "4", "--x0", "1", "--check"],
        ),
        ("discretize", &["discretize", "--m", "6", "--crossing"]),
        (
            "vie",
            &["vie", "--beta", "20", "--t-end", "5", "--dt", "0.01"],
        ),
        ("simulate", &["simulate", "--beta", "75", "--t-end", "20"]),
        (
            "sweep",
            &["sweep", "--kind", "popov-delta", "--grid", "0.2,0.5,0.8"],
        ),
        ("figures", &["figures", "--figure", "4"]),
        ("selftest", &["selftest", "--only", "1,2,7"]),
    ];
    for (cmd, args) in cases {
        let dir = TempDir::new().unwrap();
        let o = run(args, dir.path());
        ok(&o);
        schema_check(dir.path(), cmd);
        assert_eq!(
            summary(dir.path(), cmd)["passed"],
            Value::Bool(true),
            "{cmd}"
        );
    }
}

#[test]
fn line_constants_table() {
    let dir = TempDir::new().unwrap();
    ok(&run(
        &["spectrum", "--line", "--x0", "1", "--beta-max", "80"],
        dir.path(),
    ));
    let s = summary(dir.path(), "spectrum");
    let rows = s["results"]["constants"].as_array().unwrap();
    let get = |q: &str| {
        rows.iter().find(|r| r["quantity"] == q).unwrap()["computed"]
            .as_f64()
            .unwrap()
    };
    assert!((get("beta0") - std::f64::consts::PI).abs() < 1e-12);
    assert!((get("beta1") - 70.3134).abs() < 1e-3);
    assert!((get("omega1") - 11.1033).abs() < 1e-4);
}

#[test]
fn interval_popov_report() {
    let dir = TempDir::new().unwrap();
    ok(&run(
        &["popov", "--interval", "--L", "4", "--x0", "1", "--check"],
        dir.path(),
    ));
    let s = summary(dir.path(), "popov");
    let r = &s["results"];
    assert!(r["criterion"]["satisfied"].as_bool().unwrap());
    let bh = r["beta_hat"]["beta_hat"].as_f64().unwrap();
    assert!((bh - 70.3135).abs() < 1e-3);
    assert!(r["criterion"]["max_f"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args: &[&[&str]] = &[
        &["popov", "--delta", "0.3"],
        &["spectrum", "--L", "8"],
        &["sweep", "--kind", "crossing-length"],
        &["figures", "--figure", "5"],
        &["simulate", "--beta", "72", "--t-end", "10"],
    ];
    for a in args {
        let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        ok(&run(a, d1.path()));
        let o = bin()
            .args(*a)
            .arg("--out")
            .arg(d2.path())
            .env("THERMOSCOPE_THREADS", "1")
            .output()
            .unwrap();
        ok(&o);
        let mut names: Vec<_> = fs::read_dir(d1.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            let (x, y) = (
                fs::read(d1.path().join(&n)).unwrap(),
                fs::read(d2.path().join(&n)).unwrap(),
            );
            assert!(x == y, "{:?} differs for {a:?}", n);
        }
    }
}

#[test]
fn csv_format() {
    let dir = TempDir::new().unwrap();
    ok(&run(&["popov", "--line"], dir.path()));
    let text = fs::read_to_string(dir.path().join("popov_curve.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega [1/time],x [1],y [1],F [1]");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 4);
    for field in first {
        let mantissa = field
            .split('e')
            .next()
            .unwrap()
            .trim_start_matches('-')
            .replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
    assert_eq!(text.lines().count(), 2001);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "L = 8\nx0 = 2.0\nbeta = 3.0\n").unwrap();
    let out = dir.path().join("a");
    let o = bin()
        .args(["kernels", "--config"])
        .arg(&cfg)
        .args(["--x0", "1.5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    let p = &summary(&out, "kernels")["params"];
    assert_eq!(p["L"], 8.0);
    assert_eq!(p["x0"], 1.5);
    assert_eq!(p["beta"], 3.0);
    fs::write(&cfg, "L = \"inf\"\nx0 = 1\n").unwrap();
    let out = dir.path().join("b");
    ok(&bin()
        .args(["kernels", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap());
    assert_eq!(summary(&out, "kernels")["params"]["L"], "inf");
}

#[test]
fn configuration_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "x0 = 1.0\nunknown_key = 3\n").unwrap();
    let code = |o: Output| o.status.code();
    assert_eq!(
        code(
            bin()
                .args(["popov", "--config"])
                .arg(&cfg)
                .output()
                .unwrap()
        ),
        Some(2)
    );
    assert_eq!(
        code(
            bin()
                .args(["popov", "--config", "/nonexistent/run.toml"])
                .output()
                .unwrap()
        ),
        Some(2)
    );
    assert_eq!(
        code(run(&["spectrum", "--line", "--interval"], dir.path())),
        Some(2)
    );
    assert_eq!(code(run(&["kernels", "--L", "-1"], dir.path())), Some(2));
    assert_eq!(
        code(run(&["kernels", "--L", "4", "--x0", "5"], dir.path())),
        Some(2)
    );
    assert_eq!(code(run(&["vie", "--line"], dir.path())), Some(2));
    assert_eq!(
        code(run(&["vie", "--t-end", "1", "--dt", "0.3"], dir.path())),
        Some(2)
    );
    assert_eq!(code(run(&["sweep"], dir.path())), Some(2));
    assert_eq!(code(run(&["figures"], dir.path())), Some(2));
    assert_eq!(
        code(run(&["selftest", "--only", "18"], dir.path())),
        Some(2)
    );
    let o = bin()
        .args(["popov", "--line", "--out"])
        .arg(dir.path())
        .env("THERMOSCOPE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_1() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["popov", "--line", "--beta", "75", "--q", "0.128", "--check"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path(), "popov");
    assert_eq!(s["passed"], Value::Bool(false));
    assert!(!s["results"]["criterion"]["satisfied"].as_bool().unwrap());
}

#[test]
fn sweep_records_row_failures() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["sweep", "--kind", "crossing-length", "--grid", "4,1.1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let text = fs::read_to_string(dir.path().join("sweep_crossing-length.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",ok"));
    assert!(rows[2].contains("error:"));
    let s = summary(dir.path(), "sweep");
    assert_eq!(s["results"]["failures"][0]["index"], 1);
    schema_check(dir.path(), "sweep");
}
