//! Pseudo-spectral time integration of `∂ₜω + u·∇ω = 0` on sine coefficients.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::initial_data::{build_omega0, check_degeneracy, InitialDataSpec};
use crate::spectral::{check_alpha_spectral, velocity_modes, SineField, SpectralGrid, VelocityField};
use crate::trajectory::{fit_gamma, GrowthRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    Cfl { safety: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Degenerate plateau data built from `delta` and `blend_order`.
    Construction,
    SingleMode { m: usize, k: usize, amplitude: f64 },
}

/// Multiplies `a_{mn}` by `exp(−s((m/N)^p + (n/N)^p))` after every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub strength: f64,
    pub order: f64,
}

impl Default for SpectralFilter {
    fn default() -> Self {
        SpectralFilter { strength: 36.0, order: 36.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub n: usize,
    pub ng: usize,
    pub dt_policy: DtPolicy,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub delta: f64,
    pub l: f64,
    pub beta: f64,
    pub blend_order: usize,
    pub initial: InitialCondition,
    /// Steps between diagnostics records.
    pub diagnostics_every: usize,
    /// Steps between retained snapshots; 0 disables them.
    pub snapshot_every: usize,
    pub filter: Option<SpectralFilter>,
    /// Halt when the grid maximum of `|ω|` grows by more than this fraction in one step.
    pub growth_halt: f64,
    /// Halt when the top-third spectral shell exceeds this fraction of the largest coefficient.
    pub tail_halt: f64,
    /// Records with a tail ratio at or below this are flagged resolved.
    pub tail_resolved: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 0.5,
            n: 256,
            ng: 512,
            dt_policy: DtPolicy::Cfl { safety: 0.4 },
            dt_min: 1e-8,
            dt_max: 0.05,
            t_end: 10.0,
            delta: 0.25,
            l: 8.0,
            beta: 5.0,
            blend_order: 4,
            initial: InitialCondition::Construction,
            diagnostics_every: 10,
            snapshot_every: 0,
            filter: None,
            growth_halt: 0.1,
            tail_halt: 1e-3,
            tail_resolved: 1e-6,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha_spectral(self.alpha)?;
        if self.n < SineField::MIN_ORDER {
            return Err(Error::TruncationTooSmall(self.n));
        }
        if self.ng < 2 * self.n {
            return Err(Error::GridTooCoarse { n: self.n, ng: self.ng });
        }
        match self.dt_policy {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::InvalidParameter(format!("fixed dt = {dt}")));
            }
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 0.5) => {
                return Err(Error::InvalidParameter(format!("CFL safety {safety} outside (0, 0.5]")));
            }
            _ => {}
        }
        if !(self.dt_min > 0.0 && self.dt_max >= self.dt_min) {
            return Err(Error::InvalidParameter("need 0 < dt_min <= dt_max".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("T = {}", self.t_end)));
        }
        if !(self.l >= 2.0) {
            return Err(Error::InvalidParameter(format!("L = {} must be >= 2", self.l)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {}", self.beta)));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::InvalidParameter("diagnostics_every must be >= 1".into()));
        }
        if let InitialCondition::Construction = self.initial {
            self.initial_data_spec().validate()?;
        }
        Ok(())
    }

    pub fn initial_data_spec(&self) -> InitialDataSpec {
        InitialDataSpec::new(self.delta, self.n, self.ng).with_blend_order(self.blend_order)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub omega: SineField,
    pub time: f64,
    pub step_count: u64,
    pub config: ExperimentConfig,
}

impl SimState {
    pub fn initial(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let omega = match config.initial {
            InitialCondition::Construction => {
                let built = build_omega0(&config.initial_data_spec())?;
                if built.under_resolved {
                    log::warn!("initial data under-resolved at N_g = {}", config.ng);
                }
                built.omega
            }
            InitialCondition::SingleMode { m, k, amplitude } => SineField::single_mode(config.n, m, k, amplitude)?,
        };
        Ok(SimState { omega, time: 0.0, step_count: 0, config: config.clone() })
    }
}

/// Right-hand side evaluation on a fixed transform plan.
pub struct Stepper {
    grid: SpectralGrid,
    alpha: f64,
}

impl Stepper {
    pub fn new(n: usize, ng: usize, alpha: f64, exec: Execution) -> Result<Self> {
        check_alpha_spectral(alpha)?;
        Ok(Stepper { grid: SpectralGrid::with_execution(n, ng, exec)?, alpha })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `−P_N(u·∇ω)` and `max(‖u₁‖_∞, ‖u₂‖_∞)` on the grid.
    pub fn rhs(&self, omega: &SineField) -> Result<(SineField, f64)> {
        let [m1, m2] = velocity_modes(omega, self.alpha)?;
        let w = omega.as_modal();
        let u1 = self.grid.evaluate(&m1);
        let u2 = self.grid.evaluate(&m2);
        let g1 = self.grid.evaluate(&w.derivative(0, 1));
        let g2 = self.grid.evaluate(&w.derivative(1, 1));
        let prod: Vec<f64> = u1
            .values()
            .iter()
            .zip(u2.values())
            .zip(g1.values().iter().zip(g2.values()))
            .map(|((a, b), (c, d))| -(a * c + b * d))
            .collect();
        if let Some(index) = prod.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "nonlinear product", index });
        }
        let speed = u1.max_abs().max(u2.max_abs());
        Ok((self.grid.forward_unchecked(&prod), speed))
    }

    /// Classical RK4 step given the first stage.
    pub fn step_with(&self, omega: &SineField, k1: &SineField, dt: f64) -> Result<SineField> {
        let (k2, _) = self.rhs(&omega.axpy(0.5 * dt, k1))?;
        let (k3, _) = self.rhs(&omega.axpy(0.5 * dt, &k2))?;
        let (k4, _) = self.rhs(&omega.axpy(dt, &k3))?;
        let c = dt / 6.0;
        let coeffs: Vec<f64> = omega
            .coeffs()
            .iter()
            .zip(k1.coeffs())
            .zip(k2.coeffs().iter().zip(k3.coeffs()))
            .zip(k4.coeffs())
            .map(|(((w, a), (b, d)), e)| w + c * (a + 2.0 * b + 2.0 * d + e))
            .collect();
        SineField::from_coeffs(omega.n(), coeffs)
    }

    pub fn step(&self, omega: &SineField, dt: f64) -> Result<SineField> {
        let (k1, _) = self.rhs(omega)?;
        self.step_with(omega, &k1, dt)
    }
}

/// Nonlinear transport term `−P_N(u·∇ω)` evaluated on an `N_g` grid.
pub fn nonlinear_term(omega: &SineField, alpha: f64, ng: usize) -> Result<SineField> {
    Ok(Stepper::new(omega.n(), ng, alpha, Execution::default())?.rhs(omega)?.0)
}

pub fn step_rk4(state: &SimState, dt: f64) -> Result<SimState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}")));
    }
    let c = &state.config;
    let stepper = Stepper::new(c.n, c.ng, c.alpha, c.execution)?;
    Ok(SimState {
        omega: stepper.step(&state.omega, dt)?,
        time: state.time + dt,
        step_count: state.step_count + 1,
        config: state.config.clone(),
    })
}

/// `safety · (π/N_g) / max‖u_j‖_∞`, clamped to `[dt_min, dt_max]`.
pub fn cfl_dt(speed: f64, ng: usize, safety: f64, dt_min: f64, dt_max: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 0.5) {
        return Err(Error::InvalidParameter(format!("CFL safety {safety} outside (0, 0.5]")));
    }
    if speed == 0.0 {
        return Ok(dt_max);
    }
    let h = std::f64::consts::PI / ng as f64;
    Ok((safety * h / speed).clamp(dt_min, dt_max))
}

pub fn cfl_dt_field(u: &VelocityField, safety: f64, dt_min: f64, dt_max: f64) -> Result<f64> {
    cfl_dt(u.max_speed_component(), u.u1.ng(), safety, dt_min, dt_max)
}

pub const DIAGNOSTICS_HEADER: &str = "time,hessian_sup,omega_max,l2_norm,degeneracy,dt";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub hessian_sup: f64,
    pub omega_max: f64,
    pub l2_norm: f64,
    pub degeneracy: f64,
    /// Step size taken from this record's time; 0 at the final record.
    pub dt: f64,
    pub max_gradient: f64,
    pub tail: f64,
    pub resolved: bool,
}

/// Largest coefficient with `max(m, n) > 2N/3` relative to the largest overall.
pub fn tail_ratio(omega: &SineField) -> f64 {
    let top = omega.max_abs_coeff();
    if top == 0.0 {
        return 0.0;
    }
    omega.shell_max(2 * omega.n() / 3) / top
}

fn l2_norm(omega: &SineField) -> f64 {
    0.5 * std::f64::consts::PI * omega.l2_norm_sq().sqrt()
}

pub fn diagnostics(grid: &SpectralGrid, omega: &SineField, time: f64, dt: f64, tail_resolved: f64) -> DiagnosticsRecord {
    let m = omega.as_modal();
    let g1 = grid.evaluate(&m.derivative(0, 1)).max_abs();
    let g2 = grid.evaluate(&m.derivative(1, 1)).max_abs();
    let tail = tail_ratio(omega);
    DiagnosticsRecord {
        time,
        hessian_sup: grid.hessian_sup_norm(omega),
        omega_max: grid.inverse(omega).max_abs(),
        l2_norm: l2_norm(omega),
        degeneracy: check_degeneracy(omega, grid.ng()),
        dt,
        max_gradient: g1.max(g2),
        tail,
        resolved: tail <= tail_resolved,
    }
}

pub fn write_diagnostics_csv<W: Write>(records: &[DiagnosticsRecord], mut w: W) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e}", r.time, r.hessian_sup, r.omega_max, r.l2_norm, r.degeneracy, r.dt)?;
    }
    Ok(())
}

/// A retained state together with its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub step: u64,
    pub omega: SineField,
    pub omega_t: SineField,
}

/// Receives snapshots as the run produces them.
pub trait FrameSink {
    fn accept(&mut self, frame: Frame) -> Result<()>;
}

impl FrameSink for Vec<Frame> {
    fn accept(&mut self, frame: Frame) -> Result<()> {
        self.push(frame);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HaltReason {
    Horizon,
    ResolutionExhausted { time: f64, detail: String },
    NonFinite { time: f64, detail: String },
}

impl HaltReason {
    pub fn is_clean(&self) -> bool {
        matches!(self, HaltReason::Horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub provenance: String,
    pub filter_enabled: bool,
    pub halt: HaltReason,
    pub steps: u64,
    pub final_time: f64,
    pub wall_seconds: f64,
    pub growth: Option<GrowthRecord>,
}

impl RunMetadata {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn provenance() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SimState,
    pub metadata: RunMetadata,
}

fn apply_filter(omega: &mut SineField, f: &SpectralFilter) {
    let n = omega.n();
    let damp: Vec<f64> = (1..=n).map(|m| (-f.strength * (m as f64 / n as f64).powf(f.order)).exp()).collect();
    for (i, row) in omega.coeffs_mut().chunks_mut(n).enumerate() {
        for (j, a) in row.iter_mut().enumerate() {
            *a *= damp[i] * damp[j];
        }
    }
}

/// Integrates to `t_end` or a halt; snapshots go to `sink` when enabled.
pub fn run_with_sink(config: &ExperimentConfig, sink: &mut dyn FrameSink) -> Result<RunOutput> {
    let started = Instant::now();
    let mut state = SimState::initial(config)?;
    let stepper = Stepper::new(config.n, config.ng, config.alpha, config.execution)?;
    let grid = stepper.grid();
    let mut records = Vec::new();
    let (mut k1, mut speed) = stepper.rhs(&state.omega)?;
    let mut omega_max = grid.inverse(&state.omega).max_abs();
    let mut warned_cfl = false;
    let halt = loop {
        let remaining = config.t_end - state.time;
        let done = remaining <= 1e-12 * config.t_end.max(1.0);
        let dt = if done {
            0.0
        } else {
            let limit = cfl_dt(speed, config.ng, 0.5, config.dt_min, f64::INFINITY)?;
            let dt = match config.dt_policy {
                DtPolicy::Fixed { dt } => {
                    if dt > limit && !warned_cfl {
                        log::warn!("fixed dt {dt} exceeds the CFL limit {limit} at t = {}", state.time);
                        warned_cfl = true;
                    }
                    dt
                }
                DtPolicy::Cfl { safety } => cfl_dt(speed, config.ng, safety, config.dt_min, config.dt_max)?,
            };
            dt.min(remaining)
        };
        if state.step_count % config.diagnostics_every as u64 == 0 || done {
            records.push(diagnostics(grid, &state.omega, state.time, dt, config.tail_resolved));
        }
        if config.snapshot_every > 0 && (state.step_count % config.snapshot_every as u64 == 0 || done) {
            sink.accept(Frame {
                time: state.time,
                step: state.step_count,
                omega: state.omega.clone(),
                omega_t: k1.clone(),
            })?;
        }
        if done {
            break HaltReason::Horizon;
        }
        let mut next = match stepper.step_with(&state.omega, &k1, dt) {
            Ok(w) => w,
            Err(e) => break HaltReason::NonFinite { time: state.time, detail: e.to_string() },
        };
        if let Some(f) = &config.filter {
            apply_filter(&mut next, f);
        }
        let next_max = grid.inverse(&next).max_abs();
        if next_max > (1.0 + config.growth_halt) * omega_max {
            break HaltReason::ResolutionExhausted {
                time: state.time,
                detail: format!("max|ω| grew from {omega_max:.6e} to {next_max:.6e} in one step"),
            };
        }
        let tail = tail_ratio(&next);
        if tail > config.tail_halt {
            break HaltReason::ResolutionExhausted {
                time: state.time,
                detail: format!("spectral tail ratio {tail:.3e} above {:.1e}", config.tail_halt),
            };
        }
        let (nk1, nspeed) = match stepper.rhs(&next) {
            Ok(v) => v,
            Err(e) => break HaltReason::NonFinite { time: state.time + dt, detail: e.to_string() },
        };
        state.omega = next;
        state.time += dt;
        state.step_count += 1;
        omega_max = next_max;
        k1 = nk1;
        speed = nspeed;
    };
    if !halt.is_clean() {
        let last = records.last().map(|r| r.time);
        if last != Some(state.time) {
            records.push(diagnostics(grid, &state.omega, state.time, 0.0, config.tail_resolved));
        }
        log::warn!("run halted: {halt:?}");
    }
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let hess: Vec<f64> = records.iter().map(|r| r.hessian_sup).collect();
    let growth = fit_gamma(&times, &hess, 0.1).ok();
    let metadata = RunMetadata {
        config: config.clone(),
        provenance: provenance(),
        filter_enabled: config.filter.is_some(),
        halt,
        steps: state.step_count,
        final_time: state.time,
        wall_seconds: started.elapsed().as_secs_f64(),
        growth,
    };
    Ok(RunOutput { records, final_state: state, metadata })
}

/// [`run_with_sink`] keeping snapshots in memory.
pub fn run(config: &ExperimentConfig) -> Result<(RunOutput, Vec<Frame>)> {
    let mut frames = Vec::new();
    let out = run_with_sink(config, &mut frames)?;
    Ok((out, frames))
}
