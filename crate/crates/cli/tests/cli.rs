use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn msqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msqg")).args(args).env("MSQG_THREADS", "2").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed(m: &serde_json::Value) -> Vec<String> {
    m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap().to_string()).collect()
}

const MODE_RUN: &str = r#"
[run]
alpha = 0.5
n = 8
ng = 16
t_end = 1.0
diagnostics_every = 5
snapshot_every = 10
dt_policy = { policy = "fixed", dt = 0.01 }
initial = { kind = "single_mode", m = 1, k = 1, amplitude = 1.0 }
"#;

#[test]
fn make_data_writes_snapshot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = msqg(&["make-data", "--delta", "0.25", "--N", "64", "--Ng", "128", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "make-data");
    let files = listed(&m);
    assert!(files.contains(&"omega0.bin".to_string()));
    assert!(files.contains(&"checks.json".to_string()));
    for f in m["files"].as_array().unwrap() {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
    let on_disk = fs::read_dir(&out).unwrap().count();
    assert_eq!(on_disk, files.len() + 1);
}

#[test]
fn make_data_rejects_bad_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&msqg(&["make-data", "--delta", "0", "--N", "16", "--out", out])), 2);
    assert_eq!(code(&msqg(&["make-data", "--delta", "1.5707963", "--N", "16", "--out", out])), 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&msqg(&["simulate", "--bogus"])), 2);
}

#[test]
fn zero_horizon_gives_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = msqg(&["simulate", "--N", "16", "--Ng", "32", "--delta", "0.6", "--T", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "time,hessian_sup,omega_max,l2_norm,degeneracy,dt");
    assert_eq!(lines.len(), 2);
}

#[test]
fn stationary_mode_then_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mode.toml");
    fs::write(&cfg, MODE_RUN).unwrap();
    let run = dir.path().join("run");
    let o = msqg(&["simulate", "--config", cfg.to_str().unwrap(), "--out", run.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    let hess: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(hess.iter().all(|h| (h - hess[0]).abs() <= 1e-10 * hess[0]));
    assert!(listed(&manifest(&run)).iter().any(|f| f.starts_with("snapshots/omega_t_")));

    let tr = dir.path().join("trace");
    let o = msqg(&[
        "trace",
        "--config",
        cfg.to_str().unwrap(),
        "--run",
        run.to_str().unwrap(),
        "--out",
        tr.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(tr.join("summary.json")).unwrap()).unwrap();
    assert!(s["transport_defect"].as_f64().unwrap() < 1e-6);
    let traj = fs::read_to_string(tr.join("trajectory.csv")).unwrap();
    let psi: Vec<f64> = traj
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').take(3).map(|x| x.parse().unwrap()).collect();
            v[1].sin() * v[2].sin()
        })
        .collect();
    assert!(psi.iter().all(|p| (p - psi[0]).abs() <= 1e-6));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = msqg(&["simulate", "--N", "16", "--Ng", "32", "--delta", "0.6", "--T", "0.05", "--out", out.to_str().unwrap()]);
        assert!(code(&o) <= 1);
    }
    assert_eq!(fs::read(a.join("diagnostics.csv")).unwrap(), fs::read(b.join("diagnostics.csv")).unwrap());
}

#[test]
fn trace_without_snapshots_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(&["trace", "--run", dir.path().to_str().unwrap(), "--out", dir.path().join("t").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_zero_field_passes_trivially() {
    let dir = tempfile::tempdir().unwrap();
    for which in ["near", "medium", "far"] {
        let out = dir.path().join(which);
        let o = msqg(&["verify", "--which", which, "--field", "zero", "--alpha", "0.5", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{which}: {}", String::from_utf8_lossy(&o.stdout));
        let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("reports.json")).unwrap()).unwrap();
        assert_eq!(reports.as_array().unwrap().len(), 1);
    }
}

#[test]
fn verify_kernels_reports_bounded_product() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let o = msqg(&["verify", "--which", "kernels", "--alpha", "0.5", "--out", out.to_str().unwrap()]);
    assert!(code(&o) <= 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("kernel_asymptotics"));
    let csv = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(csv.starts_with("estimate_id,alpha,L_or_delta,x1,x2,component,measured,bound,ratio"));
    assert_eq!(csv.lines().count(), 1 + 3 * 48 * 2);
}

#[test]
fn verify_rejects_invalid_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(&["verify", "--which", "kernels", "--alpha", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}
