//! Layered configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use msqg::evolution::{DtPolicy, ExperimentConfig};
use msqg::trajectory::TimeInterp;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// The degenerate plateau data.
    Construction,
    Zero,
    /// `sin x₁ sin x₂`.
    Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub field: FieldKind,
    pub near_radii: (f64, f64),
    pub near_points: usize,
    pub medium_x: [f64; 2],
    pub medium_l: Vec<f64>,
    pub far_x1: Vec<f64>,
    pub far_x2: f64,
    pub deltas: Vec<f64>,
    pub background_l: f64,
    pub ratios: Vec<f64>,
    pub directions: usize,
    pub image_radius: usize,
    pub pv_cells: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            field: FieldKind::Construction,
            near_radii: (0.002, 0.05),
            near_points: 6,
            medium_x: [1e-3, 1e-3],
            medium_l: vec![8.0, 16.0, 32.0, 64.0],
            far_x1: vec![0.001, 0.002, 0.004, 0.01],
            far_x2: 0.005,
            deltas: vec![0.1, 0.2, 0.4],
            background_l: 4.0,
            ratios: vec![10.0, 100.0, 1000.0],
            directions: 48,
            image_radius: msqg::biot_savart::KernelParams::DEFAULT_IMAGE_RADIUS,
            pv_cells: msqg::biot_savart::KernelParams::DEFAULT_PV_CELLS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSettings {
    /// Directory of a `simulate` run with snapshots.
    pub run: Option<PathBuf>,
    pub interp: TimeInterp,
    pub dt: f64,
    /// `‖∇²ω‖_∞` threshold as a multiple of its initial value.
    pub hessian_factor: f64,
    pub ratio_stride: usize,
    pub skip_fraction: f64,
    pub start: Option<[f64; 2]>,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            run: None,
            interp: TimeInterp::Linear,
            dt: 1e-3,
            hessian_factor: 1e3,
            ratio_stride: 10,
            skip_fraction: 0.1,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub out: PathBuf,
    pub run: ExperimentConfig,
    pub verify: VerifySettings,
    pub trace: TraceSettings,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            out: PathBuf::from("out"),
            run: ExperimentConfig::default(),
            verify: VerifySettings::default(),
            trace: TraceSettings::default(),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "Ng")]
    pub ng: Option<usize>,
    /// Fixed time step; the CFL policy is used when absent.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Config {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                Config::from_toml(&text)
            }
        }
    }

    pub fn apply(&mut self, f: &CommonFlags) {
        let r = &mut self.run;
        if let Some(v) = f.alpha {
            r.alpha = v;
        }
        if let Some(v) = f.delta {
            r.delta = v;
        }
        if let Some(v) = f.l {
            r.l = v;
        }
        if let Some(v) = f.beta {
            r.beta = v;
        }
        if let Some(v) = f.n {
            r.n = v;
            if f.ng.is_none() && r.ng < 2 * v {
                r.ng = 2 * v;
            }
        }
        if let Some(v) = f.ng {
            r.ng = v;
        }
        if let Some(dt) = f.dt {
            r.dt_policy = DtPolicy::Fixed { dt };
        }
        if let Some(v) = f.t {
            r.t_end = v;
        }
        if let Some(v) = f.seed {
            r.seed = v;
        }
        if let Some(v) = &f.out {
            self.out = v.clone();
        }
    }

    pub fn resolve(flags: &CommonFlags) -> CliResult<Self> {
        let mut c = Config::load(flags.config.as_deref())?;
        c.apply(flags);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let mut c = Config::from_toml("[run]\nalpha = 0.3\ndelta = 0.2\n").unwrap();
        assert_eq!(c.run.delta, 0.2);
        assert_eq!(c.run.n, 256);
        c.apply(&CommonFlags { alpha: Some(0.7), ..Default::default() });
        assert_eq!(c.run.alpha, 0.7);
        assert_eq!(c.run.delta, 0.2);
    }

    #[test]
    fn sections_parse() {
        let text = r#"
out = "x"
[run]
dt_policy = { policy = "fixed", dt = 0.01 }
initial = { kind = "single_mode", m = 1, k = 1, amplitude = 1.0 }
[verify]
field = "zero"
[trace]
interp = "hermite"
"#;
        let c = Config::from_toml(text).unwrap();
        assert_eq!(c.run.dt_policy, DtPolicy::Fixed { dt: 0.01 });
        assert_eq!(c.verify.field, FieldKind::Zero);
        assert_eq!(c.trace.interp, TimeInterp::Hermite);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("[verify]\nbogus = 1\n").is_err());
    }

    #[test]
    fn raising_n_raises_grid() {
        let mut c = Config::default();
        c.apply(&CommonFlags { n: Some(512), ..Default::default() });
        assert_eq!(c.run.ng, 1024);
    }
}
