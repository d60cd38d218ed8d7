use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::transform::Parity;
use crate::error::{Error, Result};

/// Odd–odd periodic scalar field as double sine-series coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineField {
    n: usize,
    coeffs: Vec<f64>,
}

impl SineField {
    pub const MIN_ORDER: usize = 4;

    pub fn zeros(n: usize) -> Result<Self> {
        if n < Self::MIN_ORDER {
            return Err(Error::TruncationTooSmall(n));
        }
        Ok(SineField { n, coeffs: vec![0.0; n * n] })
    }

    /// Wraps a row-major `(m, n)` coefficient array.
    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n < Self::MIN_ORDER {
            return Err(Error::TruncationTooSmall(n));
        }
        if coeffs.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                n * n,
                coeffs.len()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "sine coefficients", index });
        }
        Ok(SineField { n, coeffs })
    }

    /// `amplitude · sin(m x₁) sin(k x₂)` truncated at order `n`.
    pub fn single_mode(n: usize, m: usize, k: usize, amplitude: f64) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        f.set(m, k, amplitude);
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of `sin(m x₁) sin(k x₂)`, 1-based.
    pub fn get(&self, m: usize, k: usize) -> f64 {
        self.coeffs[(m - 1) * self.n + (k - 1)]
    }

    pub fn set(&mut self, m: usize, k: usize, v: f64) {
        self.coeffs[(m - 1) * self.n + (k - 1)] = v;
    }

    /// Copy truncated or zero-padded to order `n`.
    pub fn resized(&self, n: usize) -> Result<Self> {
        let mut out = Self::zeros(n)?;
        let keep = n.min(self.n);
        for m in 1..=keep {
            for k in 1..=keep {
                out.set(m, k, self.get(m, k));
            }
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `(π²/4) Σ a²`, the squared L² norm over `[0,π]²`.
    pub fn l2_norm_sq(&self) -> f64 {
        PI * PI / 4.0 * self.coeffs.iter().map(|a| a * a).sum::<f64>()
    }

    /// Largest coefficient magnitude in the shell `max(m, k) > cut`.
    pub fn shell_max(&self, cut: usize) -> f64 {
        let mut best = 0.0f64;
        for m in 1..=self.n {
            for k in 1..=self.n {
                if m.max(k) > cut {
                    best = best.max(self.get(m, k).abs());
                }
            }
        }
        best
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }

    /// `self + s·other` (same order).
    pub fn axpy(&self, s: f64, other: &SineField) -> SineField {
        debug_assert_eq!(self.n, other.n);
        SineField {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SineField {
        SineField { n: self.n, coeffs: self.coeffs.iter().map(|a| s * a).collect() }
    }

    pub fn as_modal(&self) -> ModalField {
        ModalField { n: self.n, parity: [Parity::Sin, Parity::Sin], coeffs: self.coeffs.clone() }
    }

    /// Point value; the periodic odd extension is implied by the basis.
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        eval_modal(self.n, [Parity::Sin, Parity::Sin], &self.coeffs, x)
    }

    /// Values on the tensor product `ys1 × ys2`, row-major in `ys1`.
    pub fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
        tensor_eval(self.n, [Parity::Sin, Parity::Sin], &self.coeffs, ys1, ys2)
    }

    /// Gradient `(∂₁f, ∂₂f)` at a point.
    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let d1 = self.as_modal().derivative(0, 1);
        let d2 = self.as_modal().derivative(1, 1);
        [d1.evaluate(x), d2.evaluate(x)]
    }
}

/// Separable trigonometric series with per-axis parity, modes `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    pub n: usize,
    pub parity: [Parity; 2],
    pub coeffs: Vec<f64>,
}

impl ModalField {
    /// Term-by-term derivative along `axis` (0 or 1) of the given order.
    pub fn derivative(&self, axis: usize, order: u32) -> ModalField {
        let mut parity = self.parity;
        let mut coeffs = self.coeffs.clone();
        let n = self.n;
        for _ in 0..order {
            let p = parity[axis];
            // d/dx sin(mx) = m cos(mx); d/dx cos(mx) = -m sin(mx)
            let sign = match p {
                Parity::Sin => 1.0,
                Parity::Cos => -1.0,
            };
            for m in 1..=n {
                for k in 1..=n {
                    let w = if axis == 0 { m } else { k } as f64;
                    coeffs[(m - 1) * n + (k - 1)] *= sign * w;
                }
            }
            parity[axis] = p.differentiated();
        }
        ModalField { n, parity, coeffs }
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        eval_modal(self.n, self.parity, &self.coeffs, x)
    }

    /// Values on the tensor product `ys1 × ys2`, row-major in `ys1`.
    pub fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
        tensor_eval(self.n, self.parity, &self.coeffs, ys1, ys2)
    }
}

fn tensor_eval(n: usize, parity: [Parity; 2], coeffs: &[f64], ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
    let t1 = trig_table(parity[0], n, ys1);
    let t2 = trig_table(parity[1], n, ys2);
    let mut tmp = vec![0.0; ys1.len() * n];
    for (i, row) in tmp.chunks_mut(n).enumerate() {
        let ti = &t1[i * n..(i + 1) * n];
        for (m, &s) in ti.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let a = &coeffs[m * n..(m + 1) * n];
            for (r, &ak) in row.iter_mut().zip(a) {
                *r += s * ak;
            }
        }
    }
    let mut out = vec![0.0; ys1.len() * ys2.len()];
    for i in 0..ys1.len() {
        let row = &tmp[i * n..(i + 1) * n];
        for j in 0..ys2.len() {
            let tj = &t2[j * n..(j + 1) * n];
            out[i * ys2.len() + j] = row.iter().zip(tj).map(|(a, b)| a * b).sum();
        }
    }
    out
}

/// `trig(m y)` for `m = 1..=n` at every `y`, row-major in `y`.
pub(crate) fn trig_table(p: Parity, n: usize, ys: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; ys.len() * n];
    for (row, &y) in t.chunks_mut(n).zip(ys) {
        fill_trig(p, y, row);
    }
    t
}

/// Chebyshev recurrence for `trig(m y)`, `m = 1..=row.len()`.
pub(crate) fn fill_trig(p: Parity, y: f64, row: &mut [f64]) {
    let y = y.rem_euclid(2.0 * PI);
    let c = y.cos();
    let (mut prev, mut cur) = match p {
        Parity::Sin => (0.0, y.sin()),
        Parity::Cos => (1.0, c),
    };
    for r in row.iter_mut() {
        *r = cur;
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
}

fn eval_modal(n: usize, parity: [Parity; 2], coeffs: &[f64], x: [f64; 2]) -> f64 {
    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    fill_trig(parity[0], x[0], &mut t1);
    fill_trig(parity[1], x[1], &mut t2);
    let mut total = 0.0;
    for (m, &s) in t1.iter().enumerate() {
        let row = &coeffs[m * n..(m + 1) * n];
        let inner: f64 = row.iter().zip(&t2).map(|(a, b)| a * b).sum();
        total += s * inner;
    }
    total
}

/// Samples on the uniform `N_g × N_g` grid `x_i = i·π/N_g` of `[0,π)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    ng: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(ng: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != ng * ng {
            return Err(Error::InvalidParameter(format!(
                "grid of size {ng} needs {} values, got {}",
                ng * ng,
                values.len()
            )));
        }
        Ok(GridField { ng, values })
    }

    pub fn zeros(ng: usize) -> Self {
        GridField { ng, values: vec![0.0; ng * ng] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(ng: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = PI / ng as f64;
        let mut values = Vec::with_capacity(ng * ng);
        for i in 0..ng {
            for j in 0..ng {
                values.push(f(i as f64 * h, j as f64 * h));
            }
        }
        GridField { ng, values }
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn spacing(&self) -> f64 {
        PI / self.ng as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ng + j]
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Discrete L² norm over `[0,π)²` with cell area `h²`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.spacing();
        (h * h * crate::exec::pairwise_sum(&self.values.iter().map(|v| v * v).collect::<Vec<_>>()))
            .sqrt()
    }
}

/// Grid velocity of a sine-series vorticity.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: GridField,
    pub u2: GridField,
    pub alpha: f64,
}

impl VelocityField {
    pub fn max_speed_component(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }
}
