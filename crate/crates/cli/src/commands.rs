use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use msqg::biot_savart::{KernelParams, OddOddFn, VorticitySource};
use msqg::estimates::{
    sample_points, verify_background, verify_far_field, verify_kernel_asymptotics, verify_medium_ratio,
    verify_near_field, write_csv, BackgroundCase, BoundReport,
};
use msqg::evolution::{run_with_sink, write_diagnostics_csv, Frame, FrameSink};
use msqg::initial_data::{build_omega0, check_degeneracy, max_gradient, InitialData, InitialDataSpec};
use msqg::snapshot::{load_snapshot, write_snapshot, SnapshotHeader};
use msqg::spectral::{SineField, SpectralGrid};
use msqg::trajectory::{
    fit_gamma, grid_floor, medium_ratio_monitor, select_start, stopping_time, trace, write_growth_csv,
    write_trajectory_csv, SnapshotFlow, StartPoint, StopReason,
};

use crate::config::{Config, FieldKind};
use crate::error::{CliError, CliResult, EXIT_FAIL, EXIT_OK};
use crate::manifest::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Kernels,
    Near,
    Medium,
    Far,
    Background,
    All,
}

#[derive(Debug, Serialize)]
struct NamedCheck {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn check(name: &'static str, value: f64, threshold: f64) -> NamedCheck {
    NamedCheck { name, value, threshold, pass: value <= threshold }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> msqg::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn snapshot_bytes(header: &SnapshotHeader, field: &SineField) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, header, field)?;
    Ok(buf)
}

pub fn make_data(cfg: &Config) -> CliResult<i32> {
    let spec = cfg.run.initial_data_spec();
    spec.validate()?;
    let built = build_omega0(&spec)?;
    let sg = SpectralGrid::with_execution(spec.n, spec.ng, cfg.run.execution)?;
    let g = &built.grid;
    let h = g.spacing();
    let (lo, hi) = (spec.delta, std::f64::consts::PI - spec.delta);
    let mut plateau_defect: f64 = 0.0;
    let mut ones = 0usize;
    for i in 0..g.ng() {
        for j in 0..g.ng() {
            let v = g.at(i, j);
            let (a, b) = (i as f64 * h, j as f64 * h);
            if a >= lo && a <= hi && b >= lo && b <= hi {
                plateau_defect = plateau_defect.max((v - 1.0).abs());
            }
            if v == 1.0 {
                ones += 1;
            }
        }
    }
    let gradient = max_gradient(&built.omega, &sg);
    let degeneracy = check_degeneracy(&built.omega, spec.ng);
    let checks = vec![
        check("range_below_zero", (-g.min()).max(0.0), 0.0),
        check("range_above_one", (g.max() - 1.0).max(0.0), 0.0),
        check("plateau_defect", plateau_defect, 1e-12),
        check("degeneracy_over_gradient", degeneracy / gradient, 1e-8),
    ];
    let measure = ones as f64 / (g.ng() * g.ng()) as f64;
    let expected = ((hi - lo) / std::f64::consts::PI).powi(2);
    println!("range        [{:.3e}, {:.6}]", g.min(), g.max());
    println!("plateau      fraction {measure:.4} of samples (square [delta, pi-delta]^2: {expected:.4})");
    println!("degeneracy   {degeneracy:.3e} (max |grad| {gradient:.4e})");
    if built.under_resolved {
        println!("warning      delta spans only {:.1} grid cells", spec.cells_across_strip());
    }
    let mut out = OutputDir::create(&cfg.out)?;
    let header = SnapshotHeader::new(spec.n, spec.ng, cfg.run.alpha, 0.0);
    out.write("omega0.bin", &snapshot_bytes(&header, &built.omega)?)?;
    out.write_json(
        "checks.json",
        &serde_json::json!({ "checks": checks, "plateau_fraction": measure, "under_resolved": built.under_resolved }),
    )?;
    out.finish("make-data", cfg)?;
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!("{:<26} {:.3e} <= {:.1e}  {}", c.name, c.value, c.threshold, if c.pass { "PASS" } else { "FAIL" });
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

struct DiskSink<'a> {
    out: &'a mut OutputDir,
    n: usize,
    ng: usize,
    alpha: f64,
}

impl FrameSink for DiskSink<'_> {
    fn accept(&mut self, frame: Frame) -> msqg::Result<()> {
        let mut header = SnapshotHeader::new(self.n, self.ng, self.alpha, frame.time);
        for (name, field) in [("omega", &frame.omega), ("omega_t", &frame.omega_t)] {
            header.field = name.into();
            let rel = format!("snapshots/{name}_{:08}.bin", frame.step);
            let path = self.out.path(&rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            write_snapshot(BufWriter::new(fs::File::create(&path)?), &header, field)?;
            self.out.record(&rel);
        }
        Ok(())
    }
}

pub fn simulate(cfg: &Config) -> CliResult<i32> {
    cfg.run.validate()?;
    let mut out = OutputDir::create(&cfg.out)?;
    let result = {
        let mut sink = DiskSink { out: &mut out, n: cfg.run.n, ng: cfg.run.ng, alpha: cfg.run.alpha };
        run_with_sink(&cfg.run, &mut sink)?
    };
    out.write("diagnostics.csv", &csv_bytes(|b| write_diagnostics_csv(&result.records, b))?)?;
    out.write("metadata.json", result.metadata.to_json()?.as_bytes())?;
    if let Some(g) = &result.metadata.growth {
        out.write("growth.csv", &csv_bytes(|b| write_growth_csv(g, b))?)?;
    }
    out.finish("simulate", cfg)?;
    let m = &result.metadata;
    println!("halt         {:?}", m.halt);
    println!("steps        {} to t = {:.6} in {:.1} s", m.steps, m.final_time, m.wall_seconds);
    if let (Some(a), Some(b)) = (result.records.first(), result.records.last()) {
        println!("hessian      {:.4e} -> {:.4e} (x{:.3})", a.hessian_sup, b.hessian_sup, b.hessian_sup / a.hessian_sup);
        println!("l2 drift     {:.3e}", (b.l2_norm - a.l2_norm).abs() / a.l2_norm.max(f64::MIN_POSITIVE));
    }
    match &m.growth {
        Some(g) => println!("gamma        {:.6} (R^2 {:.4})", g.fitted_gamma, g.fit_r2),
        None => println!("gamma        not fitted (too few records)"),
    }
    Ok(if m.halt.is_clean() { EXIT_OK } else { EXIT_FAIL })
}

fn print_report(r: &BoundReport) {
    println!(
        "{:<18} alpha={:<5} exponent={:+.4} (theory {:+.3} +/- {:.2}) r2={:.4} C={:.4e} {}",
        r.estimate_id.as_str(),
        r.alpha,
        r.fitted_exponent,
        r.theoretical_exponent,
        r.exponent_tolerance,
        r.regression_r2,
        r.fitted_constant,
        if r.pass { "PASS" } else { "FAIL" }
    );
    for c in &r.checks {
        println!("    {:<28} {:.4e} <= {:.4e} {}", c.name, c.value, c.threshold, if c.pass { "ok" } else { "violated" });
    }
}

fn field_source(cfg: &Config) -> CliResult<(Box<dyn VorticitySource>, f64, f64)> {
    Ok(match cfg.verify.field {
        FieldKind::Construction => {
            let spec = cfg.run.initial_data_spec();
            spec.validate()?;
            let built = build_omega0(&spec)?;
            let hess = SpectralGrid::with_execution(spec.n, spec.ng, cfg.run.execution)?.hessian_sup_norm(&built.omega);
            (Box::new(InitialData::new(spec)?), 1.0, hess)
        }
        FieldKind::Zero => (Box::new(OddOddFn(|_: f64, _: f64| 0.0)), 0.0, 1.0),
        FieldKind::Mode => (Box::new(SineField::single_mode(4, 1, 1, 1.0)?), 1.0, 1.0),
    })
}

pub fn verify(cfg: &Config, which: Which) -> CliResult<i32> {
    let v = &cfg.verify;
    let mut params = KernelParams::new(cfg.run.alpha)?;
    params.image_radius = v.image_radius;
    params.pv_cells = v.pv_cells;
    params.validate()?;
    let wants = |w: Which| which == Which::All || which == w;
    let mut reports = Vec::new();
    if wants(Which::Kernels) {
        reports.push(verify_kernel_asymptotics(params.alpha, &v.ratios, v.directions)?);
    }
    if wants(Which::Near) || wants(Which::Medium) || wants(Which::Far) {
        let (omega, sup, hess) = field_source(cfg)?;
        if wants(Which::Near) {
            let xs = sample_points(cfg.run.seed, 1, v.near_points, v.near_radii.0, v.near_radii.1);
            reports.push(verify_near_field(omega.as_ref(), &params, &xs, &[cfg.run.l], hess)?);
        }
        if wants(Which::Medium) {
            reports.push(verify_medium_ratio(omega.as_ref(), &params, &[v.medium_x], &v.medium_l)?);
        }
        if wants(Which::Far) {
            let xs: Vec<[f64; 2]> = v.far_x1.iter().map(|&a| [a, v.far_x2]).collect();
            reports.push(verify_far_field(omega.as_ref(), &params, &xs, sup)?);
        }
    }
    if wants(Which::Background) {
        if v.field == FieldKind::Construction {
            let datas = v
                .deltas
                .iter()
                .map(|&d| InitialData::new(InitialDataSpec::new(d, cfg.run.n, cfg.run.ng)))
                .collect::<msqg::Result<Vec<_>>>()?;
            let l = v.background_l;
            let cases: Vec<BackgroundCase> = datas
                .iter()
                .map(|d| {
                    let s = d.spec().delta / (2.0 * l);
                    BackgroundCase { delta: d.spec().delta, omega: d, x_samples: vec![[s, s]] }
                })
                .collect();
            reports.push(verify_background(&cases, &params, l)?);
        } else {
            println!("background         skipped: the bound concerns the plateau data");
        }
    }
    for r in &reports {
        print_report(r);
    }
    let mut out = OutputDir::create(&cfg.out)?;
    out.write_json("reports.json", &reports)?;
    out.write("bounds.csv", &csv_bytes(|b| write_csv(&reports, b))?)?;
    out.finish("verify", &serde_json::json!({ "which": which, "config": cfg }))?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAIL })
}

/// `(step, omega path, omega_t path)` triples found in `dir`, by step.
fn snapshot_pairs(dir: &Path) -> CliResult<Vec<(u64, PathBuf, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("snapshots at {}: {e}", dir.display())))?;
    let mut steps = Vec::new();
    for e in entries {
        let name = e?.file_name().to_string_lossy().into_owned();
        if let Some(step) = name.strip_prefix("omega_").and_then(|s| s.strip_suffix(".bin")) {
            if let Ok(k) = step.parse::<u64>() {
                steps.push(k);
            }
        }
    }
    steps.sort_unstable();
    let pairs: Vec<_> = steps
        .into_iter()
        .map(|k| (k, dir.join(format!("omega_{k:08}.bin")), dir.join(format!("omega_t_{k:08}.bin"))))
        .collect();
    if let Some((k, _, _)) = pairs.iter().find(|(_, _, t)| !t.exists()) {
        return Err(CliError::Usage(format!("snapshot {k} has no time derivative file")));
    }
    if pairs.is_empty() {
        return Err(CliError::Usage(format!("no snapshots in {}", dir.display())));
    }
    Ok(pairs)
}

#[derive(Debug, Serialize)]
struct TraceReport {
    start: StartPoint,
    t0: f64,
    reason: StopReason,
    gamma: Option<f64>,
    gamma_r2: Option<f64>,
    transport_defect: f64,
    max_ratio_deviation: Option<f64>,
    dominance_failures: Option<usize>,
    exited: bool,
}

pub fn trace_cmd(cfg: &Config) -> CliResult<i32> {
    let t = &cfg.trace;
    let run = t.run.as_ref().ok_or_else(|| CliError::Usage("trace needs --run DIR from a simulate run".into()))?;
    let pairs = snapshot_pairs(&run.join("snapshots"))?;
    let mut frames = Vec::with_capacity(pairs.len());
    let mut alpha = cfg.run.alpha;
    let mut ng = cfg.run.ng;
    for (step, wp, tp) in &pairs {
        let (h, omega) = load_snapshot(wp)?;
        let (_, omega_t) = load_snapshot(tp)?;
        if h.alpha != alpha {
            log::warn!("snapshot alpha {} overrides configured {}", h.alpha, alpha);
            alpha = h.alpha;
        }
        ng = h.n_g;
        frames.push(Frame { time: h.time, step: *step, omega, omega_t });
    }
    let flow = SnapshotFlow::new(&frames, alpha, t.interp)?;
    let r = &cfg.run;
    let start = match t.start {
        Some(x) => StartPoint { x, unscaled_x1: x[0], scaled: false },
        None => select_start(r.t_end, r.delta, alpha, r.beta, grid_floor(ng)),
    };
    if start.scaled {
        println!("start        formula value {:.3e} floored to {:.3e}", start.unscaled_x1, start.x[0]);
    }
    let (_, horizon) = flow.time_range();
    let mut traj = trace(start.x, &flow, horizon, t.dt)?;
    let n = frames[0].omega.n();
    let sg = SpectralGrid::with_execution(n, ng, r.execution)?;
    let series: Vec<(f64, f64)> = frames.iter().map(|f| (f.time, sg.hessian_sup_norm(&f.omega))).collect();
    let threshold = t.hessian_factor * series[0].1;
    let (t0, reason) = stopping_time(&traj, &series, horizon, start.x[0], threshold);
    let ratio = if alpha > 0.0 {
        Some(medium_ratio_monitor(&mut traj, &flow, &KernelParams::new(alpha)?, r.l, t.ratio_stride)?)
    } else {
        None
    };
    let (ts, hs): (Vec<f64>, Vec<f64>) = series.iter().filter(|(s, _)| *s <= t0).copied().unzip();
    let growth = fit_gamma(&ts, &hs, t.skip_fraction).ok();
    let w0 = frames[0].omega.evaluate(start.x);
    let transport_defect = traj
        .history
        .iter()
        .map(|p| (flow.vorticity(p.position, p.time) - w0).abs())
        .fold(0.0, f64::max);
    let report = TraceReport {
        start,
        t0,
        reason,
        gamma: growth.as_ref().map(|g| g.fitted_gamma),
        gamma_r2: growth.as_ref().map(|g| g.fit_r2),
        transport_defect,
        max_ratio_deviation: ratio.as_ref().map(|s| s.max_deviation),
        dominance_failures: ratio.as_ref().map(|s| s.dominance_failures),
        exited: traj.exited.is_some(),
    };
    let mut out = OutputDir::create(&cfg.out)?;
    out.write("trajectory.csv", &csv_bytes(|b| write_trajectory_csv(&traj, b))?)?;
    if let Some(s) = &ratio {
        out.write_json("ratio.json", s)?;
    }
    if let Some(g) = &growth {
        out.write("growth.csv", &csv_bytes(|b| write_growth_csv(g, b))?)?;
    }
    out.write_json("summary.json", &report)?;
    out.finish("trace", cfg)?;
    println!("start        ({:.6e}, {:.6e})", start.x[0], start.x[1]);
    println!("T0           {t0:.6} ({reason:?})");
    match &growth {
        Some(g) => println!("gamma        {:.6} (R^2 {:.4})", g.fitted_gamma, g.fit_r2),
        None => println!("gamma        not fitted"),
    }
    println!("transport    {transport_defect:.3e}");
    if let Some(e) = &traj.exited {
        println!("exit         left the quadrant at t = {:.6} at {:?}", e.time, e.position);
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}
