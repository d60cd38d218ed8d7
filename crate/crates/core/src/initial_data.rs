//! Degenerate initial vorticity: plateau `1` away from a strip of width `δ`,
//! the monomial `δ⁻⁴x₁³x₂` on a quarter disk at the origin, and polynomial
//! blends between them. Every piece is `O(x₁³)` near `x₁ = 0`, so
//! `∂₁ω₀(0, x₂) = 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridField, SineField, SpectralGrid};

/// Minimum number of grid cells across the strip before a warning is raised.
pub const MIN_CELLS_ACROSS_STRIP: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub delta: f64,
    /// Radius of the quarter disk where the monomial holds exactly.
    pub origin_patch_radius: f64,
    /// Continuity order `k` of the `C^k` polynomial blends.
    pub blend_order: usize,
    pub n: usize,
    pub ng: usize,
    /// Upper bound accepted for `delta` (exclusive when equal to `π/4`).
    pub delta_max: f64,
}

impl InitialDataSpec {
    pub const DEFAULT_BLEND_ORDER: usize = 4;

    pub fn new(delta: f64, n: usize, ng: usize) -> Self {
        InitialDataSpec {
            delta,
            origin_patch_radius: delta / 2.0,
            blend_order: Self::DEFAULT_BLEND_ORDER,
            n,
            ng,
            delta_max: PI / 4.0,
        }
    }

    pub fn with_blend_order(mut self, k: usize) -> Self {
        self.blend_order = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.delta;
        if !(d > 0.0 && d < PI / 4.0 && d <= self.delta_max) {
            return Err(Error::InvalidParameter(format!(
                "delta = {d} must lie in (0, min(pi/4, {})]",
                self.delta_max
            )));
        }
        let r = self.origin_patch_radius;
        if !(r > 0.0 && r <= d / 2.0 + 1e-15) {
            return Err(Error::InvalidParameter(format!(
                "origin patch radius {r} must lie in (0, delta/2]"
            )));
        }
        if self.blend_order < 2 {
            return Err(Error::InvalidParameter("blend order must be at least 2".into()));
        }
        if self.ng < 2 * self.n {
            return Err(Error::GridTooCoarse { n: self.n, ng: self.ng });
        }
        Ok(())
    }

    /// Grid cells across the strip; below [`MIN_CELLS_ACROSS_STRIP`] the data is under-resolved.
    pub fn cells_across_strip(&self) -> f64 {
        self.delta * self.ng as f64 / PI
    }
}

/// Coefficients `c_i` of `Σ c_i t^{p_i}` with value 1 and vanishing
/// derivatives of orders `1..powers.len()` at `t = 1`.
fn flat_at_one(powers: &[i32]) -> Vec<f64> {
    let k = powers.len();
    let mut a = DMatrix::zeros(k, k);
    let mut b = DVector::zeros(k);
    b[0] = 1.0;
    for d in 0..k {
        for (i, &p) in powers.iter().enumerate() {
            let mut f = 1.0;
            for q in 0..d as i32 {
                f *= (p - q) as f64;
            }
            a[(d, i)] = f;
        }
    }
    let c = a.lu().solve(&b).expect("nonsingular blend system");
    c.iter().cloned().collect()
}

#[derive(Debug, Clone)]
struct Poly {
    powers: Vec<i32>,
    coeffs: Vec<f64>,
}

impl Poly {
    fn flat(powers: Vec<i32>) -> Self {
        let coeffs = flat_at_one(&powers);
        Poly { powers, coeffs }
    }

    fn eval(&self, t: f64) -> f64 {
        self.powers.iter().zip(&self.coeffs).map(|(&p, &c)| c * t.powi(p)).sum()
    }
}

/// Analytic initial vorticity on the whole plane (odd–odd, 2π-periodic).
#[derive(Debug, Clone)]
pub struct InitialData {
    spec: InitialDataSpec,
    /// `t³ + …`, flat at 1; profile across the strip in `x₁`.
    cubic: Poly,
    /// `t + …`, flat at 1; profile across the strip in `x₂`.
    linear: Poly,
    /// `C^k` step from 0 to 1 on `[0, 1]`.
    step: Poly,
}

impl InitialData {
    pub fn new(spec: InitialDataSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.blend_order as i32;
        let cubic = Poly::flat((0..=k).map(|i| 3 + 2 * i).collect());
        let linear = Poly::flat((0..=k).map(|i| 1 + 2 * i).collect());
        // t^{k+1} .. t^{2k+1}: derivatives up to k vanish at 0 as well
        let step = Poly::flat((k + 1..=2 * k + 1).collect());
        Ok(InitialData { spec, cubic, linear, step })
    }

    pub fn spec(&self) -> &InitialDataSpec {
        &self.spec
    }

    fn profile(p: &Poly, s: f64, delta: f64) -> f64 {
        let t = s / delta;
        if t >= 1.0 {
            1.0
        } else {
            p.eval(t)
        }
    }

    /// Value on the closed quadrant `[0, π]²`.
    pub fn value_in_quadrant(&self, x1: f64, x2: f64) -> f64 {
        let d = self.spec.delta;
        let s1 = x1.min(PI - x1);
        let s2 = x2.min(PI - x2);
        let strip = Self::profile(&self.cubic, s1, d) * Self::profile(&self.linear, s2, d);
        let r = x1.hypot(x2);
        let r0 = self.spec.origin_patch_radius;
        if r >= d {
            return strip;
        }
        let mono = x1.powi(3) * x2 / d.powi(4);
        if r <= r0 {
            return mono;
        }
        let chi = 1.0 - self.step.eval((r - r0) / (d - r0));
        chi * mono + (1.0 - chi) * strip
    }

    /// Value at any point through the odd, 2π-periodic extension.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let (a, sa) = fold(x[0]);
        let (b, sb) = fold(x[1]);
        sa * sb * self.value_in_quadrant(a, b)
    }

    pub fn sample(&self, ng: usize) -> GridField {
        GridField::from_fn(ng, |a, b| self.value_in_quadrant(a, b))
    }
}

/// Maps `x` to `[0, π]` with the sign of the odd periodic extension.
fn fold(x: f64) -> (f64, f64) {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y < 0.0 {
        (-y, -1.0)
    } else {
        (y, 1.0)
    }
}

/// Result of [`build_omega0`] together with the construction checks.
#[derive(Debug, Clone)]
pub struct BuiltInitialData {
    pub omega: SineField,
    pub grid: GridField,
    pub under_resolved: bool,
}

/// Grid construction, sine transform, and exact restoration of
/// `Σ_m m a_{mn} = 0` (the truncated series' `∂₁ω(0, ·)`).
pub fn build_omega0(spec: &InitialDataSpec) -> Result<BuiltInitialData> {
    let data = InitialData::new(spec.clone())?;
    let under_resolved = spec.cells_across_strip() < MIN_CELLS_ACROSS_STRIP;
    if under_resolved {
        log::warn!(
            "delta = {} spans only {:.1} grid cells (< {})",
            spec.delta,
            spec.cells_across_strip(),
            MIN_CELLS_ACROSS_STRIP
        );
    }
    let grid = data.sample(spec.ng);
    let sg = SpectralGrid::new(spec.n, spec.ng)?;
    let mut omega = sg.forward(&grid)?;
    enforce_degeneracy(&mut omega);
    Ok(BuiltInitialData { omega, grid, under_resolved })
}

/// Removes `Σ_m m a_{mn}` from every column with the minimum-norm
/// correction weighted by `1/m²`.
pub fn enforce_degeneracy(omega: &mut SineField) {
    let n = omega.n();
    for k in 1..=n {
        let s: f64 = (1..=n).map(|m| m as f64 * omega.get(m, k)).sum();
        for m in 1..=n {
            let v = omega.get(m, k) - s / (n as f64 * m as f64);
            omega.set(m, k, v);
        }
    }
}

/// `max_{x₂} |∂₁ω(0, x₂)|` over `ng` equispaced `x₂` in `[0, π)`.
pub fn check_degeneracy(omega: &SineField, ng: usize) -> f64 {
    let n = omega.n();
    let col: Vec<f64> = (1..=n)
        .map(|k| (1..=n).map(|m| m as f64 * omega.get(m, k)).sum())
        .collect();
    let h = PI / ng as f64;
    (0..ng)
        .map(|j| {
            let x2 = j as f64 * h;
            col.iter().enumerate().map(|(i, c)| c * ((i + 1) as f64 * x2).sin()).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}

/// Grid maximum of `|∇ω|`.
pub fn max_gradient(omega: &SineField, sg: &SpectralGrid) -> f64 {
    let m = omega.as_modal();
    let g1 = sg.evaluate(&m.derivative(0, 1));
    let g2 = sg.evaluate(&m.derivative(1, 1));
    g1.values().iter().zip(g2.values()).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn data(delta: f64) -> InitialData {
        InitialData::new(InitialDataSpec::new(delta, 64, 128)).unwrap()
    }

    #[test]
    fn blend_polynomials_are_flat() {
        let d = data(0.25);
        for p in [&d.cubic, &d.linear, &d.step] {
            assert_relative_eq!(p.eval(1.0), 1.0, epsilon = 1e-12);
            let h = 1e-4;
            let slope = (p.eval(1.0) - p.eval(1.0 - h)) / h;
            assert!(slope.abs() < 1e-6);
        }
        assert_eq!(d.step.eval(0.0), 0.0);
        // monotone on [0, 1]
        for p in [&d.cubic, &d.linear, &d.step] {
            let mut prev = 0.0;
            for i in 0..=1000 {
                let v = p.eval(i as f64 / 1000.0);
                assert!(v >= prev - 1e-14 && v <= 1.0 + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn examples() {
        let d = data(0.25);
        assert_eq!(d.value([0.0, 0.3]), 0.0);
        assert_eq!(d.value([0.3, 0.0]), 0.0);
        assert_eq!(d.value([FRAC_PI_2, FRAC_PI_2]), 1.0);
        let q = 0.25 / 4.0;
        assert_relative_eq!(d.value([q, q]), 1.0 / 256.0, epsilon = 1e-15);
    }

    #[test]
    fn odd_periodic_extension() {
        let d = data(0.3);
        let x = [0.2, 0.1];
        assert_relative_eq!(d.value([-x[0], x[1]]), -d.value(x));
        assert_relative_eq!(d.value([x[0], -x[1]]), -d.value(x));
        assert_relative_eq!(d.value([x[0] + 2.0 * PI, x[1]]), d.value(x), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(InitialData::new(InitialDataSpec::new(0.0, 64, 128)).is_err());
        assert!(InitialData::new(InitialDataSpec::new(FRAC_PI_2, 64, 128)).is_err());
        assert!(InitialData::new(InitialDataSpec::new(0.2, 64, 100)).is_err());
    }

    #[test]
    fn range_and_measure_defect() {
        let spec = InitialDataSpec::new(0.25, 64, 256);
        let d = InitialData::new(spec.clone()).unwrap();
        let g = d.sample(spec.ng);
        assert!(g.min() >= 0.0 && g.max() <= 1.0);
        let below = g.values().iter().filter(|&&v| v < 1.0).count() as f64;
        let frac = below / (spec.ng * spec.ng) as f64;
        let h = PI / spec.ng as f64;
        // strip of width delta plus one cell of grid margin on each side
        let bound = (4.0 * PI * (spec.delta + h)) / (PI * PI);
        assert!(frac <= bound, "{frac} > {bound}");
    }

    #[test]
    fn cubic_degeneracy_of_analytic_data() {
        let d = data(0.25);
        for x2 in [0.05, 0.2, 1.0, 3.0] {
            // odd in x1, so the central difference at 0 is v(h)/h; it must
            // vanish like h²
            let slope = |h: f64| d.value([h, x2]) / h;
            let (a, b) = (slope(1e-3), slope(5e-4));
            assert!(a.abs() < 1e-3);
            assert!((a / b - 4.0).abs() < 1e-2, "{a} {b}");
        }
    }

    #[test]
    fn degeneracy_of_built_series() {
        let spec = InitialDataSpec::new(0.25, 64, 128);
        let b = build_omega0(&spec).unwrap();
        let sg = SpectralGrid::new(64, 128).unwrap();
        let defect = check_degeneracy(&b.omega, 128);
        assert!(defect <= 1e-8 * max_gradient(&b.omega, &sg), "{defect}");
    }

    #[test]
    fn degeneracy_monitor_examples() {
        let f = SineField::single_mode(8, 1, 1, 1.0).unwrap();
        assert_relative_eq!(check_degeneracy(&f, 64), 1.0, epsilon = 1e-12);
        // sin³x = (3 sin x − sin 3x)/4
        let mut g = SineField::zeros(8).unwrap();
        g.set(1, 1, 0.75);
        g.set(3, 1, -0.25);
        assert!(check_degeneracy(&g, 64) < 1e-15);
    }

    #[test]
    fn spectral_decay_follows_blend_order() {
        for k in [4usize, 6] {
            let spec = InitialDataSpec::new(0.3, 128, 256).with_blend_order(k);
            let b = build_omega0(&spec).unwrap();
            let lo = b.omega.shell_max(32);
            let hi = b.omega.shell_max(96);
            let slope = (hi / lo).ln() / (96f64 / 32.0).ln();
            assert!(slope < -(k as f64), "order {k}: slope {slope}");
        }
    }

    #[test]
    fn under_resolution_is_flagged() {
        let spec = InitialDataSpec::new(0.05, 16, 32);
        assert!(build_omega0(&spec).unwrap().under_resolved);
    }
}
