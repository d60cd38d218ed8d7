//! Characteristics of the flow map, the stopping-time bookkeeping of the
//! growth construction, and exponential growth-rate fits.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::biot_savart::{velocity_quadrature_with, KernelParams, RegionSpec};
use crate::error::{Error, Result};
use crate::estimates::linear_fit;
use crate::evolution::Frame;
use crate::exec::Execution;
use crate::spectral::{check_alpha_spectral, fill_trig, velocity_modes, ModalField, Parity, SineField};

/// Time-dependent velocity `u(x, t)`.
pub trait FlowSource: Sync {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2];
}

/// Time-independent flow of a single field.
pub struct SteadyFlow {
    u: [ModalField; 2],
}

impl SteadyFlow {
    pub fn new(omega: &SineField, alpha: f64) -> Result<Self> {
        Ok(SteadyFlow { u: velocity_modes(omega, alpha)? })
    }
}

impl FlowSource for SteadyFlow {
    fn velocity(&self, x: [f64; 2], _t: f64) -> [f64; 2] {
        [self.u[0].evaluate(x), self.u[1].evaluate(x)]
    }
}

/// Closure flow.
pub struct FnFlow<F>(pub F);

impl<F: Fn([f64; 2], f64) -> [f64; 2] + Sync> FlowSource for FnFlow<F> {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        (self.0)(x, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeInterp {
    Linear,
    /// Cubic Hermite using the stored time derivatives.
    Hermite,
}

struct FlowFrame {
    time: f64,
    omega: SineField,
    omega_t: SineField,
}

/// Velocity interpolated in time between stored snapshots. Frames keep only
/// vorticity; the velocity law is applied during point evaluation.
pub struct SnapshotFlow {
    frames: Vec<FlowFrame>,
    interp: TimeInterp,
    n: usize,
    /// `(m² + k²)^{−1+α}`, row-major in `(m, k)`.
    multiplier: Vec<f64>,
}

fn hermite(s: f64, h: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [2.0 * s3 - 3.0 * s2 + 1.0, h * (s3 - 2.0 * s2 + s), -2.0 * s3 + 3.0 * s2, h * (s3 - s2)]
}

impl SnapshotFlow {
    pub fn new(frames: &[Frame], alpha: f64, interp: TimeInterp) -> Result<Self> {
        Self::from_frames(frames.to_vec(), alpha, interp)
    }

    pub fn from_frames(frames: Vec<Frame>, alpha: f64, interp: TimeInterp) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if frames.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::InvalidParameter("snapshot times must increase".into()));
        }
        check_alpha_spectral(alpha)?;
        let n = frames[0].omega.n();
        if frames.iter().any(|f| f.omega.n() != n || f.omega_t.n() != n) {
            return Err(Error::InvalidParameter("snapshots differ in truncation order".into()));
        }
        let e = alpha - 1.0;
        let multiplier = (1..=n)
            .flat_map(|m| (1..=n).map(move |k| ((m * m + k * k) as f64).powf(e)))
            .collect();
        let frames = frames
            .into_iter()
            .map(|f| FlowFrame { time: f.time, omega: f.omega, omega_t: f.omega_t })
            .collect();
        Ok(SnapshotFlow { frames, interp, n, multiplier })
    }

    pub fn set_interp(&mut self, interp: TimeInterp) {
        self.interp = interp;
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.frames[0].time, self.frames[self.frames.len() - 1].time)
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }

    pub fn omega_at_frame(&self, i: usize) -> &SineField {
        &self.frames[i].omega
    }

    /// Bracketing frame index and local coordinate `s ∈ [0, 1]`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.frames.len();
        if n == 1 || t <= self.frames[0].time {
            return (0, 0.0);
        }
        if t >= self.frames[n - 1].time {
            return (n - 2, 1.0);
        }
        let i = self.frames.partition_point(|f| f.time <= t) - 1;
        let (a, b) = (self.frames[i].time, self.frames[i + 1].time);
        (i, (t - a) / (b - a))
    }

    fn blend<const K: usize>(
        &self,
        t: f64,
        a: impl Fn(&FlowFrame) -> [f64; K],
        d: impl Fn(&FlowFrame) -> [f64; K],
    ) -> [f64; K] {
        if self.frames.len() == 1 {
            return a(&self.frames[0]);
        }
        let (i, s) = self.locate(t);
        let (f0, f1) = (&self.frames[i], &self.frames[i + 1]);
        let (a0, a1) = (a(f0), a(f1));
        match self.interp {
            TimeInterp::Linear => std::array::from_fn(|j| (1.0 - s) * a0[j] + s * a1[j]),
            TimeInterp::Hermite => {
                let h = hermite(s, f1.time - f0.time);
                let (d0, d1) = (d(f0), d(f1));
                std::array::from_fn(|j| h[0] * a0[j] + h[1] * d0[j] + h[2] * a1[j] + h[3] * d1[j])
            }
        }
    }

    /// `(−∂₂ψ, ∂₁ψ)` at `x` for `ψ = (−Δ)^{−1+α} f`.
    fn point_velocity(&self, f: &SineField, x: [f64; 2]) -> [f64; 2] {
        let n = self.n;
        let mut s1 = vec![0.0; n];
        let mut c1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        let mut c2 = vec![0.0; n];
        fill_trig(Parity::Sin, x[0], &mut s1);
        fill_trig(Parity::Cos, x[0], &mut c1);
        fill_trig(Parity::Sin, x[1], &mut s2);
        fill_trig(Parity::Cos, x[1], &mut c2);
        let coeffs = f.coeffs();
        let (mut u1, mut u2) = (0.0, 0.0);
        for m in 0..n {
            let row = &coeffs[m * n..(m + 1) * n];
            let mu = &self.multiplier[m * n..(m + 1) * n];
            let (mut dk, mut plain) = (0.0, 0.0);
            for k in 0..n {
                let b = row[k] * mu[k];
                dk += b * (k + 1) as f64 * c2[k];
                plain += b * s2[k];
            }
            u1 -= s1[m] * dk;
            u2 += (m + 1) as f64 * c1[m] * plain;
        }
        [u1, u2]
    }

    pub fn vorticity(&self, x: [f64; 2], t: f64) -> f64 {
        self.blend(t, |f| [f.omega.evaluate(x)], |f| [f.omega_t.evaluate(x)])[0]
    }
}

impl FlowSource for SnapshotFlow {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.blend(t, |f| self.point_velocity(&f.omega, x), |f| self.point_velocity(&f.omega_t, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub position: [f64; 2],
    pub u: [f64; 2],
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitDiagnostic {
    pub time: f64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub position: [f64; 2],
    pub start: [f64; 2],
    pub time: f64,
    pub history: Vec<TrajectoryPoint>,
    /// Set when the path left the closed quadrant beyond tolerance.
    pub exited: Option<ExitDiagnostic>,
}

/// Allowed excursion outside `[0, π]²` before tracing halts.
pub const QUADRANT_TOLERANCE: f64 = 1e-6;

fn inside(x: [f64; 2]) -> bool {
    let t = QUADRANT_TOLERANCE;
    x.iter().all(|&c| c >= -t && c <= PI + t)
}

/// RK4 integration of `dΦ/dt = u(Φ, t)` from `t = 0` to `t_end`.
pub fn trace(start: [f64; 2], flow: &dyn FlowSource, t_end: f64, dt: f64) -> Result<TrajectoryState> {
    if !(start[0] > 0.0 && start[1] > 0.0 && start[0] < PI && start[1] < PI) {
        return Err(Error::InvalidParameter(format!("start {start:?} outside the open quadrant")));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}, t_end = {t_end}")));
    }
    let mut x = start;
    let mut t = 0.0;
    let mut history = vec![TrajectoryPoint { time: 0.0, position: x, u: flow.velocity(x, 0.0), r: None }];
    let steps = (t_end / dt).ceil() as usize;
    let mut exited = None;
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        if h <= 0.0 {
            break;
        }
        let k1 = history.last().unwrap().u;
        let p2 = [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]];
        let k2 = flow.velocity(p2, t + 0.5 * h);
        let p3 = [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]];
        let k3 = flow.velocity(p3, t + 0.5 * h);
        let p4 = [x[0] + h * k3[0], x[1] + h * k3[1]];
        let k4 = flow.velocity(p4, t + h);
        for j in 0..2 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = if k + 1 == steps { t_end } else { t + h };
        if !inside(x) {
            exited = Some(ExitDiagnostic { time: t, position: x });
            break;
        }
        history.push(TrajectoryPoint { time: t, position: x, u: flow.velocity(x, t), r: None });
    }
    let last = history.last().unwrap();
    Ok(TrajectoryState { position: last.position, start, time: last.time, history, exited })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub x: [f64; 2],
    /// `e^{−Tδ^{−α/2}}` before flooring.
    pub unscaled_x1: f64,
    /// The grid floor replaced the formula value.
    pub scaled: bool,
}

/// `x₁⁰ = max(e^{−Tδ^{−α/2}}, floor)`, `x₂⁰ = (x₁⁰)^β`.
pub fn select_start(t: f64, delta: f64, alpha: f64, beta: f64, grid_floor: f64) -> StartPoint {
    let unscaled = (-t * delta.powf(-alpha / 2.0)).exp();
    let scaled = unscaled < grid_floor;
    let x1 = unscaled.max(grid_floor);
    StartPoint { x: [x1, x1.powf(beta)], unscaled_x1: unscaled, scaled }
}

/// Four grid cells of an `N_g` grid.
pub fn grid_floor(ng: usize) -> f64 {
    4.0 * PI / ng as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    X2ReachesX10,
    HessianThreshold,
}

/// First time the horizon, `x₂(t) ≥ x₁⁰`, or `‖∇²ω‖_∞ ≥ threshold` triggers.
pub fn stopping_time(
    trajectory: &TrajectoryState,
    hessian: &[(f64, f64)],
    t_end: f64,
    x1_0: f64,
    threshold: f64,
) -> (f64, StopReason) {
    let cross = trajectory.history.iter().find(|p| p.position[1] >= x1_0).map(|p| p.time);
    let hit = hessian.iter().find(|(_, h)| *h >= threshold).map(|(t, _)| *t);
    let mut best = (t_end, StopReason::Horizon);
    if let Some(t) = cross {
        if t < best.0 {
            best = (t, StopReason::X2ReachesX10);
        }
    }
    if let Some(t) = hit {
        if t < best.0 {
            best = (t, StopReason::HessianThreshold);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub time: f64,
    pub position: [f64; 2],
    pub r: Option<f64>,
    /// `L⁻¹(−1)ʲu_j^{med} − |u_j^{near}| − |u_j^{far}|` per component; negative
    /// entries mean the medium field does not dominate.
    pub dominance_margin: Option<[f64; 2]>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub samples: Vec<RatioSample>,
    pub max_deviation: f64,
    pub dominance_failures: usize,
    pub l: f64,
}

/// `r(t) = −u₁^{med} x₂/(x₁ u₂^{med})` at the trajectory position at each
/// snapshot time, using that snapshot's vorticity. Samples where near plus
/// far exceed `L⁻¹` of the medium field are logged and counted.
pub fn medium_ratio_monitor(
    trajectory: &mut TrajectoryState,
    flow: &SnapshotFlow,
    params: &KernelParams,
    l: f64,
    stride: usize,
) -> Result<RatioSummary> {
    let times = flow.times();
    let stride = stride.max(1);
    let mut samples = Vec::new();
    for (i, &t) in times.iter().enumerate().step_by(stride) {
        let Some(idx) = nearest(&trajectory.history, t) else { continue };
        let p = trajectory.history[idx];
        if (p.time - t).abs() > 1e-9 * t.max(1.0) {
            continue;
        }
        let x = p.position;
        if l * x[0].hypot(x[1]) > 1.0 {
            log::info!("ratio sample at t = {t} skipped: L|x| > 1");
            samples.push(RatioSample {
                time: t,
                position: x,
                r: None,
                dominance_margin: None,
                note: Some("L|x| > 1".into()),
            });
            continue;
        }
        let omega = flow.omega_at_frame(i);
        let at = |region| velocity_quadrature_with(omega, x, params, region, Execution::default()).map(|q| q.u);
        let med = at(RegionSpec::medium(l))?;
        let near = at(RegionSpec::near(l))?;
        let far = at(RegionSpec::far())?;
        let margin = [
            -med[0] / l - near[0].abs() - far[0].abs(),
            med[1] / l - near[1].abs() - far[1].abs(),
        ];
        if margin.iter().any(|m| *m < 0.0) {
            log::info!("medium field does not dominate at t = {t}, x = {x:?}: margin {margin:?}");
        }
        let (r, note) = if med[1] == 0.0 {
            (None, Some("u2 = 0".into()))
        } else {
            (Some(-med[0] * x[1] / (x[0] * med[1])), None)
        };
        trajectory.history[idx].r = r;
        samples.push(RatioSample { time: t, position: x, r, dominance_margin: Some(margin), note });
    }
    let max_deviation = samples.iter().filter_map(|s| s.r).map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let dominance_failures = samples
        .iter()
        .filter(|s| s.dominance_margin.is_some_and(|m| m.iter().any(|v| *v < 0.0)))
        .count();
    Ok(RatioSummary { samples, max_deviation, dominance_failures, l })
}

fn nearest(history: &[TrajectoryPoint], t: f64) -> Option<usize> {
    history
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.time - t).abs().total_cmp(&(b.1.time - t).abs()))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub times: Vec<f64>,
    pub hessian_sup: Vec<f64>,
    pub fitted_gamma: f64,
    pub fit_window: (f64, f64),
    pub fit_r2: f64,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares slope of `log ‖∇²ω‖_∞` against `t`, skipping the first
/// `skip_fraction` of the time span.
pub fn fit_gamma(times: &[f64], hessian: &[f64], skip_fraction: f64) -> Result<GrowthRecord> {
    if times.len() != hessian.len() {
        return Err(Error::InvalidParameter("series lengths differ".into()));
    }
    if let Some(&h) = hessian.iter().find(|h| !(**h > 0.0)) {
        return Err(Error::NonPositive(h));
    }
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(Error::TooFewSamples { needed: MIN_FIT_SAMPLES, got: 0 });
    };
    let start = t0 + skip_fraction * (t1 - t0);
    let (ts, ls): (Vec<f64>, Vec<f64>) =
        times.iter().zip(hessian).filter(|(t, _)| **t >= start).map(|(t, h)| (*t, h.ln())).unzip();
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_FIT_SAMPLES, got: ts.len() });
    }
    let f = linear_fit(&ts, &ls)?;
    Ok(GrowthRecord {
        times: times.to_vec(),
        hessian_sup: hessian.to_vec(),
        fitted_gamma: f.slope,
        fit_window: (start, t1),
        fit_r2: f.r2,
    })
}

pub const TRAJECTORY_HEADER: &str = "time,x1,x2,u1,u2,r";

pub fn write_trajectory_csv<W: Write>(t: &TrajectoryState, mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for p in &t.history {
        let r = p.r.map(|v| format!("{v:e}")).unwrap_or_default();
        writeln!(w, "{:e},{:e},{:e},{:e},{:e},{}", p.time, p.position[0], p.position[1], p.u[0], p.u[1], r)?;
    }
    Ok(())
}

pub fn write_growth_csv<W: Write>(g: &GrowthRecord, mut w: W) -> Result<()> {
    writeln!(w, "time,hessian_sup")?;
    for (t, h) in g.times.iter().zip(&g.hessian_sup) {
        writeln!(w, "{t:e},{h:e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub t0: f64,
    pub reason: StopReason,
    pub gamma: Option<f64>,
    pub r2: Option<f64>,
    pub start: StartPoint,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_flow_keeps_position() {
        let f = FnFlow(|_: [f64; 2], _: f64| [0.0, 0.0]);
        let t = trace([0.3, 0.4], &f, 1.0, 0.1).unwrap();
        assert_eq!(t.position, [0.3, 0.4]);
        assert_eq!(t.history.len(), 11);
    }

    #[test]
    fn stationary_mode_preserves_stream_function() {
        let w = SineField::single_mode(4, 1, 1, 1.0).unwrap();
        let flow = SteadyFlow::new(&w, 0.0).unwrap();
        let psi = |x: [f64; 2]| x[0].sin() * x[1].sin() / 2.0;
        for start in [[0.3, 0.5], [1.2, 2.0], [2.5, 0.4]] {
            let t = trace(start, &flow, 10.0, 0.01).unwrap();
            let drift = t.history.iter().map(|p| (psi(p.position) - psi(start)).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-6, "{drift}");
            assert!(t.exited.is_none());
        }
    }

    #[test]
    fn snapshot_velocity_matches_series() {
        let n = 6;
        let mut w = SineField::zeros(n).unwrap();
        for (i, c) in w.coeffs_mut().iter_mut().enumerate() {
            *c = ((i * 7 % 11) as f64 - 5.0) / (1.0 + i as f64);
        }
        let alpha = 0.4;
        let frame = |time: f64, step| Frame { time, step, omega: w.clone(), omega_t: w.clone() };
        let flow = SnapshotFlow::new(&[frame(0.0, 0), frame(1.0, 1)], alpha, TimeInterp::Linear).unwrap();
        let steady = SteadyFlow::new(&w, alpha).unwrap();
        for x in [[0.3, 0.5], [1.7, 2.9], [3.0, 0.1]] {
            let (a, b) = (flow.velocity(x, 0.4), steady.velocity(x, 0.0));
            assert_relative_eq!(a[0], b[0], epsilon = 1e-12);
            assert_relative_eq!(a[1], b[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn outward_flow_is_halted() {
        let f = FnFlow(|_: [f64; 2], _: f64| [-1.0, 0.0]);
        let t = trace([0.05, 1.0], &f, 1.0, 0.01).unwrap();
        assert!(t.exited.is_some());
        assert!(t.position[0] >= -QUADRANT_TOLERANCE);
    }

    #[test]
    fn start_point_formula() {
        // e^{−T δ^{−α/2}} with T = 1, δ = 1/4, α = 1/2
        let s = select_start(1.0, 0.25, 0.5, 5.0, 0.0);
        assert_relative_eq!(s.x[0], (-2f64.sqrt()).exp(), max_relative = 1e-14);
        assert_relative_eq!(s.x[1], (-5.0 * 2f64.sqrt()).exp(), max_relative = 1e-12);
        assert!(!s.scaled);
        let s = select_start(1.0, 0.25, 0.5, 1.0, 0.0);
        assert_eq!(s.x[0], s.x[1]);
        let s = select_start(10.0, 0.25, 0.5, 5.0, 0.01);
        assert!(s.scaled);
        assert_eq!(s.x[0], 0.01);
    }

    fn line(times: &[f64], xs: &[f64]) -> TrajectoryState {
        let history = times
            .iter()
            .zip(xs)
            .map(|(t, x)| TrajectoryPoint { time: *t, position: [0.1, *x], u: [0.0; 2], r: None })
            .collect::<Vec<_>>();
        TrajectoryState { position: history.last().unwrap().position, start: [0.1, xs[0]], time: 1.0, history, exited: None }
    }

    #[test]
    fn stopping_time_cases() {
        let ts: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let flat = line(&ts, &vec![0.01; 11]);
        let hs: Vec<(f64, f64)> = ts.iter().map(|t| (*t, 1.0)).collect();
        assert_eq!(stopping_time(&flat, &hs, 1.0, 0.1, 1e3), (1.0, StopReason::Horizon));
        let rising: Vec<f64> = ts.iter().map(|t| 0.01 + 0.2 * t).collect();
        let tr = line(&ts, &rising);
        let (t0, why) = stopping_time(&tr, &hs, 1.0, 0.1, 1e3);
        assert_eq!(why, StopReason::X2ReachesX10);
        assert_relative_eq!(t0, 0.5, epsilon = 1e-12);
        let big: Vec<(f64, f64)> = ts.iter().map(|t| (*t, if *t > 0.25 { 1e4 } else { 1.0 })).collect();
        assert_eq!(stopping_time(&tr, &big, 1.0, 0.1, 1e3).1, StopReason::HessianThreshold);
    }

    #[test]
    fn gamma_of_synthetic_series() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let hs: Vec<f64> = ts.iter().map(|t| (2.0 * t).exp()).collect();
        let g = fit_gamma(&ts, &hs, 0.1).unwrap();
        assert!((g.fitted_gamma - 2.0).abs() < 1e-10);
        let c = fit_gamma(&ts, &vec![3.0; 50], 0.1).unwrap();
        assert!(c.fitted_gamma.abs() < 1e-14);
        assert!(fit_gamma(&ts[..5], &hs[..5], 0.1).is_err());
        let mut bad = hs.clone();
        bad[3] = 0.0;
        assert!(fit_gamma(&ts, &bad, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn gamma_is_scale_invariant(scale in 1e-3f64..1e3, rate in -1.0f64..3.0) {
            let ts: Vec<f64> = (0..30).map(|k| k as f64 * 0.2).collect();
            let hs: Vec<f64> = ts.iter().map(|t| (rate * t + (3.0 * t).sin() * 0.1).exp()).collect();
            let scaled: Vec<f64> = hs.iter().map(|h| h * scale).collect();
            let a = fit_gamma(&ts, &hs, 0.1).unwrap().fitted_gamma;
            let b = fit_gamma(&ts, &scaled, 0.1).unwrap().fitted_gamma;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let df = |t: f64| 1.0 - 4.0 * t + 1.5 * t * t;
        let (a, b) = (0.3, 0.8);
        for s in [0.0, 0.25, 0.6, 1.0] {
            let h = hermite(s, b - a);
            let v = h[0] * f(a) + h[1] * df(a) + h[2] * f(b) + h[3] * df(b);
            assert_relative_eq!(v, f(a + s * (b - a)), epsilon = 1e-14);
        }
    }
}
