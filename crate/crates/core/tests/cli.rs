use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dflux(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dflux"))
        .args(args)
        .env("DFLUX_OUTPUT_DIR", out_dir)
        .output()
        .expect("spawn dflux")
}

const EXAMPLE_1: &str = "\
# constant data across a coefficient jump
model = multiplicative
model.k_left = 3
model.k_right = 1
domain.x_min = -1
domain.x_max = 1
dx = 0.04
lambda = 0.03333333333333333
scheme = NT
t_end = 0.4, 0.8
initial = constant
initial.value = 0.15
diagnostics = true
";

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_snapshots_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), EXAMPLE_1);
    let out = dir.path().join("out");
    let o = dflux(&["run", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["u_t0.400000.csv", "u_t0.800000.csv", "diagnostics.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let csv = fs::read_to_string(out.join("u_t0.800000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,u"));
    assert_eq!(lines.count(), 50);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(report["scheme"], "NessyahuTadmor");
    assert_eq!(report["steps"], 600);
    assert_eq!(report["onesided_holds"], true);
    assert!(report["u_min"].as_f64().unwrap() >= 0.15 - 1e-12);
    assert!(report["u_max"].as_f64().unwrap() <= 1.0);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), EXAMPLE_1);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(dflux(&["run", &cfg], &a).status.success());
    assert!(dflux(&["run", &cfg], &b).status.success());
    for name in ["u_t0.800000.csv", "diagnostics.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn cfl_violation_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &EXAMPLE_1.replace("lambda = 0.03333333333333333", "lambda = 0.5"));
    let o = dflux(&["run", &cfg], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn bad_input_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!("{EXAMPLE_1}bogus = 1\n"));
    assert_eq!(dflux(&["run", &cfg], &out).status.code(), Some(1));
    assert_eq!(dflux(&["run", "/nonexistent/run.cfg"], &out).status.code(), Some(1));
    assert_eq!(dflux(&["reproduce", "3"], &out).status.code(), Some(1));
    assert_eq!(dflux(&["verify", "bogus"], &out).status.code(), Some(1));
}

#[test]
fn verify_identity_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dflux(&["verify", "identity"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().count() >= 2 && !stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn reproduce_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex2");
    let o = dflux(&["reproduce", "2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["errors.csv", "diagnostics_lf.json", "diagnostics_nt.json", "diagnostics_ref.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.lines().count() >= 5, "{errors}");
}
