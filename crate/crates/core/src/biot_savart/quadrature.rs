//! Region-restricted Biot–Savart velocity by adaptive tensor Gauss–Legendre
//! cubature with singular subtraction at `y = x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gauss::{adaptive, GaussLegendre};
use super::kernel::{check_alpha_kernel, kernel_split, KernelParams, PvGeometry, TailMode};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, Execution};
use crate::initial_data::InitialData;
use crate::spectral::SineField;

/// Odd–odd vorticity that can be sampled anywhere in the plane.
pub trait VorticitySource: Sync {
    /// Values on `ys1 × ys2`, row-major in `ys1`.
    fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64>;
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    /// Smallest length scale the source resolves, if it has one.
    fn resolution(&self) -> Option<f64> {
        None
    }
}

impl VorticitySource for SineField {
    fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
        SineField::sample_tensor(self, ys1, ys2)
    }
    fn value(&self, x: [f64; 2]) -> f64 {
        self.evaluate(x)
    }
    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        SineField::gradient(self, x)
    }
    fn resolution(&self) -> Option<f64> {
        Some(PI / self.n() as f64)
    }
}

fn fd_gradient(f: impl Fn([f64; 2]) -> f64, x: [f64; 2]) -> [f64; 2] {
    let h = 1e-6;
    [
        (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
        (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
    ]
}

fn tensor_from_points(f: impl Fn([f64; 2]) -> f64, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ys1.len() * ys2.len());
    for &a in ys1 {
        for &b in ys2 {
            out.push(f([a, b]));
        }
    }
    out
}

impl VorticitySource for InitialData {
    fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
        tensor_from_points(|p| self.value(p), ys1, ys2)
    }
    fn value(&self, x: [f64; 2]) -> f64 {
        InitialData::value(self, x)
    }
    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        fd_gradient(|p| self.value(p), x)
    }
}

/// Closure source: `f` is evaluated on the odd, 2π-periodic extension of
/// its values on `[0, π]²`.
pub struct OddOddFn<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> OddOddFn<F> {
    fn extended(&self, x: [f64; 2]) -> f64 {
        let (a, sa) = fold(x[0]);
        let (b, sb) = fold(x[1]);
        sa * sb * (self.0)(a, b)
    }
}

fn fold(x: f64) -> (f64, f64) {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y < 0.0 {
        (-y, -1.0)
    } else {
        (y, 1.0)
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> VorticitySource for OddOddFn<F> {
    fn sample_tensor(&self, ys1: &[f64], ys2: &[f64]) -> Vec<f64> {
        tensor_from_points(|p| self.extended(p), ys1, ys2)
    }
    fn value(&self, x: [f64; 2]) -> f64 {
        self.extended(x)
    }
    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        fd_gradient(|p| self.extended(p), x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    Near,
    Medium,
    Far,
    Full,
}

/// Integration region. `Near` is `[0, L|x|]²`, `Medium` is the rest of
/// `[0, π)²`, `Far` is `[0, ∞)² \ [0, π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub l: f64,
}

impl RegionSpec {
    pub fn near(l: f64) -> Self {
        RegionSpec { kind: RegionKind::Near, l }
    }
    pub fn medium(l: f64) -> Self {
        RegionSpec { kind: RegionKind::Medium, l }
    }
    pub fn far() -> Self {
        RegionSpec { kind: RegionKind::Far, l: f64::NAN }
    }
    pub fn full() -> Self {
        RegionSpec { kind: RegionKind::Full, l: f64::NAN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureVelocity {
    pub u: [f64; 2],
    pub warnings: Vec<String>,
}

/// `[a1, b1] × [a2, b2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Rect {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Self {
        Rect { a1, b1, a2, b2 }
    }

    fn contains_strictly(&self, x: [f64; 2]) -> bool {
        self.a1 < x[0] && x[0] < self.b1 && self.a2 < x[1] && x[1] < self.b2
    }

    fn quarters(&self) -> [Rect; 4] {
        let m1 = 0.5 * (self.a1 + self.b1);
        let m2 = 0.5 * (self.a2 + self.b2);
        [
            Rect::new(self.a1, m1, self.a2, m2),
            Rect::new(m1, self.b1, self.a2, m2),
            Rect::new(self.a1, m1, m2, self.b2),
            Rect::new(m1, self.b1, m2, self.b2),
        ]
    }

    fn side(&self) -> f64 {
        (self.b1 - self.a1).max(self.b2 - self.a2)
    }

    fn distance_to(&self, x: [f64; 2]) -> f64 {
        let d1 = (self.a1 - x[0]).max(x[0] - self.b1).max(0.0);
        let d2 = (self.a2 - x[1]).max(x[1] - self.b2).max(0.0);
        d1.hypot(d2)
    }
}

/// Linear Taylor polynomial of ω at `x`, subtracted inside singular boxes.
#[derive(Debug, Clone, Copy)]
struct Taylor {
    w0: f64,
    g: [f64; 2],
    excl: f64,
    geometry: PvGeometry,
}

impl Taylor {
    fn excluded(&self, d: [f64; 2]) -> bool {
        match self.geometry {
            PvGeometry::Disk => d[0] * d[0] + d[1] * d[1] < self.excl * self.excl,
            PvGeometry::Square => d[0].abs().max(d[1].abs()) < self.excl,
        }
    }
}

const PANEL_ORDER: usize = 8;
const MAX_DEPTH: u32 = 24;

struct Engine<'a, S: ?Sized> {
    x: [f64; 2],
    alpha: f64,
    src: &'a S,
    rule: GaussLegendre,
}

impl<'a, S: VorticitySource + ?Sized> Engine<'a, S> {
    fn panel(&self, r: &Rect, taylor: Option<&Taylor>) -> [f64; 2] {
        let (ys1, w1) = self.rule.mapped(r.a1, r.b1);
        let (ys2, w2) = self.rule.mapped(r.a2, r.b2);
        let vals = self.src.sample_tensor(&ys1, &ys2);
        let mut acc = [0.0; 2];
        for (i, (&y1, &wi)) in ys1.iter().zip(&w1).enumerate() {
            let mut row = [0.0; 2];
            for (j, (&y2, &wj)) in ys2.iter().zip(&w2).enumerate() {
                let w = vals[i * ys2.len() + j];
                let k = kernel_split(self.x, [y1, y2], self.alpha);
                let (c1, c2) = match taylor {
                    None => (
                        (k.singular[0] + k.regular[0]) * w,
                        (k.singular[1] + k.regular[1]) * w,
                    ),
                    Some(t) => {
                        let d = [y1 - self.x[0], y2 - self.x[1]];
                        let res = if t.excluded(d) {
                            0.0
                        } else {
                            w - t.w0 - t.g[0] * d[0] - t.g[1] * d[1]
                        };
                        (
                            k.regular[0] * w + k.singular[0] * res,
                            k.regular[1] * w + k.singular[1] * res,
                        )
                    }
                };
                row[0] += wj * c1;
                row[1] += wj * c2;
            }
            acc[0] += wi * row[0];
            acc[1] += wi * row[1];
        }
        acc
    }

    fn refine(
        &self,
        r: &Rect,
        whole: [f64; 2],
        tol: [f64; 2],
        depth: u32,
        min_side: f64,
        taylor: Option<&Taylor>,
    ) -> [f64; 2] {
        let q = r.quarters();
        let parts: Vec<[f64; 2]> = q.iter().map(|c| self.panel(c, taylor)).collect();
        let sum = [
            parts.iter().map(|p| p[0]).sum::<f64>(),
            parts.iter().map(|p| p[1]).sum::<f64>(),
        ];
        let converged = (sum[0] - whole[0]).abs() <= tol[0] && (sum[1] - whole[1]).abs() <= tol[1];
        if converged || depth == 0 || r.side() < min_side {
            return sum;
        }
        let child_tol = [0.5 * tol[0], 0.5 * tol[1]];
        let mut out = [0.0; 2];
        for (c, p) in q.iter().zip(&parts) {
            let v = self.refine(c, *p, child_tol, depth - 1, min_side, taylor);
            out[0] += v[0];
            out[1] += v[1];
        }
        out
    }
}

/// A rectangle of the decomposition, optionally treated by subtraction.
#[derive(Debug, Clone, Copy)]
struct Piece {
    rect: Rect,
    singular: bool,
}

/// `∫_0^B (t² + c²)^{−α} dt` for signed `B` and `c ≠ 0`.
fn half_line(b: f64, c: f64, alpha: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let rule = GaussLegendre::new(16);
    let c2 = c * c;
    let f = |t: f64| (t * t + c2).powf(-alpha);
    let ab = b.abs();
    let est = rule.integrate(0.0, ab, f);
    b.signum() * adaptive(&rule, 0.0, ab, 1e-14 * est.abs() + 1e-300, &f)
}

/// `∫_{a}^{b} (t² + c²)^{−α} dt`.
fn line_integral(a: f64, b: f64, c: f64, alpha: f64) -> f64 {
    half_line(b, c, alpha) - half_line(a, c, alpha)
}

/// `∫_0^A ∫_0^B |d|^{−2α}` for `A, B ≥ 0`, in polar form.
fn corner_integral(a: f64, b: f64, alpha: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let q = 2.0 - 2.0 * alpha;
    let theta0 = b.atan2(a);
    let rule = GaussLegendre::new(16);
    let fc = |t: f64| t.cos().powf(-q);
    let fs = |t: f64| t.sin().powf(-q);
    let ec = rule.integrate(0.0, theta0, fc);
    let es = rule.integrate(theta0, 0.5 * PI, fs);
    let ic = adaptive(&rule, 0.0, theta0, 1e-14 * ec.abs() + 1e-300, &fc);
    let is = adaptive(&rule, theta0, 0.5 * PI, 1e-14 * es.abs() + 1e-300, &fs);
    (a.powf(q) * ic + b.powf(q) * is) / q
}

fn signed_corner(s: f64, t: f64, alpha: f64) -> f64 {
    s.signum() * t.signum() * corner_integral(s.abs(), t.abs(), alpha)
}

/// `∫∫_R |d|^{−2α}` over `R = [a1,b1] × [a2,b2]` in `d`-coordinates.
fn rect_weakly_singular(a1: f64, b1: f64, a2: f64, b2: f64, alpha: f64) -> f64 {
    signed_corner(b1, b2, alpha) - signed_corner(a1, b2, alpha) - signed_corner(b1, a2, alpha)
        + signed_corner(a1, a2, alpha)
}

/// `[∫ −d₂|d|^{−p}, ∫ −d₁d₂|d|^{−p}, ∫ −d₂²|d|^{−p}]` over a box in
/// `d`-coordinates containing the origin strictly inside.
fn moments(a1: f64, b1: f64, a2: f64, b2: f64, alpha: f64) -> [f64; 3] {
    let inv = 1.0 / (2.0 * alpha);
    let fb = line_integral(a1, b1, b2, alpha);
    let fa = line_integral(a1, b1, a2, alpha);
    let q = 1.0 - alpha;
    let h = |c: f64| ((b1 * b1 + c * c).powf(q) - (a1 * a1 + c * c).powf(q)) / (2.0 * q);
    let j0 = inv * (fb - fa);
    let j1 = inv * (h(b2) - h(a2));
    let w = rect_weakly_singular(a1, b1, a2, b2, alpha);
    let j2 = inv * (b2 * fb - a2 * fa - w);
    [j0, j1, j2]
}

/// `∫_R K_s · T` for the singular kernel part and the Taylor polynomial.
fn singular_moment(x: [f64; 2], r: &Rect, t: &Taylor, alpha: f64) -> [f64; 2] {
    let (a1, b1, a2, b2) = (r.a1 - x[0], r.b1 - x[0], r.a2 - x[1], r.b2 - x[1]);
    let m = moments(a1, b1, a2, b2, alpha);
    let ms = moments(a2, b2, a1, b1, alpha);
    [
        t.w0 * m[0] + t.g[0] * m[1] + t.g[1] * m[2],
        -(t.w0 * ms[0] + t.g[1] * ms[1] + t.g[0] * ms[2]),
    ]
}

/// Dyadic L-shaped shells covering `[0, π)² \ [0, ℓ]²`.
fn medium_pieces(l: f64) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut s = l;
    while s < PI {
        let t = (2.0 * s).min(PI);
        for rect in [Rect::new(s, t, 0.0, s), Rect::new(0.0, s, s, t), Rect::new(s, t, s, t)] {
            out.push(Piece { rect, singular: false });
        }
        s = t;
    }
    out
}

/// Fixed composite Gauss rule on `[0, π]` whose nodes are symmetric under
/// `s ↦ π − s`.
struct CellRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CellRule {
    fn new(panels: usize) -> Self {
        let g = GaussLegendre::new(PANEL_ORDER);
        let h = PI / panels as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels {
            let (n, w) = g.mapped(p as f64 * h, (p + 1) as f64 * h);
            nodes.extend(n);
            weights.extend(w);
        }
        CellRule { nodes, weights }
    }
}

const FAR_PANELS: usize = 12;
const FAR_PANELS_COARSE: usize = 6;
/// Cells with `max(p, q)` above this use the coarse rule.
const FINE_RING: usize = 2;

struct FarField<'a, S: ?Sized> {
    engine: &'a Engine<'a, S>,
    rule: CellRule,
    central: Vec<f64>,
    coarse_rule: CellRule,
    coarse_central: Vec<f64>,
    tol: [f64; 2],
    exec: Execution,
}

impl<'a, S: VorticitySource + ?Sized> FarField<'a, S> {
    fn new(engine: &'a Engine<'a, S>, tol: [f64; 2], exec: Execution) -> Self {
        let rule = CellRule::new(FAR_PANELS);
        let central = engine.src.sample_tensor(&rule.nodes, &rule.nodes);
        let coarse_rule = CellRule::new(FAR_PANELS_COARSE);
        let coarse_central = engine.src.sample_tensor(&coarse_rule.nodes, &coarse_rule.nodes);
        FarField { engine, rule, central, coarse_rule, coarse_central, tol, exec }
    }

    fn cell(&self, p: usize, q: usize) -> [f64; 2] {
        let x = self.engine.x;
        let rect = Rect::new(p as f64 * PI, (p + 1) as f64 * PI, q as f64 * PI, (q + 1) as f64 * PI);
        let e = self.engine;
        if rect.distance_to(x) < 0.5 * PI {
            let whole = e.panel(&rect, None);
            return e.refine(&rect, whole, self.tol, MAX_DEPTH, 0.0, None);
        }
        let (rule, central) = if p.max(q) > FINE_RING {
            (&self.coarse_rule, &self.coarse_central)
        } else {
            (&self.rule, &self.central)
        };
        let m = rule.nodes.len();
        let (sp, sq) = (if p % 2 == 0 { 1.0 } else { -1.0 }, if q % 2 == 0 { 1.0 } else { -1.0 });
        let mut acc = [0.0; 2];
        for i in 0..m {
            let si = if p % 2 == 0 { i } else { m - 1 - i };
            let y1 = p as f64 * PI + rule.nodes[i];
            let mut row = [0.0; 2];
            for j in 0..m {
                let sj = if q % 2 == 0 { j } else { m - 1 - j };
                let w = sp * sq * central[si * m + sj];
                let y2 = q as f64 * PI + rule.nodes[j];
                let k = kernel_split(x, [y1, y2], e.alpha);
                let wj = rule.weights[j] * w;
                row[0] += wj * (k.singular[0] + k.regular[0]);
                row[1] += wj * (k.singular[1] + k.regular[1]);
            }
            acc[0] += rule.weights[i] * row[0];
            acc[1] += rule.weights[i] * row[1];
        }
        acc
    }

    /// Sum over image cells with `r_lo < max(p, q) ≤ r_hi`.
    fn ring_sum(&self, r_lo: usize, r_hi: usize) -> [f64; 2] {
        let cells: Vec<(usize, usize)> = (0..=r_hi)
            .flat_map(|p| (0..=r_hi).map(move |q| (p, q)))
            .filter(|&(p, q)| {
                let m = p.max(q);
                m > r_lo && m <= r_hi
            })
            .collect();
        let vals = map_indexed(self.exec, cells.len(), |i| self.cell(cells[i].0, cells[i].1));
        let c0: Vec<f64> = vals.iter().map(|v| v[0]).collect();
        let c1: Vec<f64> = vals.iter().map(|v| v[1]).collect();
        [pairwise_sum(&c0), pairwise_sum(&c1)]
    }

    fn total(&self, radius: usize, tail: TailMode, alpha: f64) -> [f64; 2] {
        let s_r = self.ring_sum(0, radius);
        if tail == TailMode::Truncated {
            return s_r;
        }
        let d1 = self.ring_sum(radius, 2 * radius);
        let s_2r = [s_r[0] + d1[0], s_r[1] + d1[1]];
        if tail == TailMode::Richardson {
            let f = 1.0 / (2f64.powf(2.0 * alpha) - 1.0);
            return [s_2r[0] + f * d1[0], s_2r[1] + f * d1[1]];
        }
        let d2 = self.ring_sum(2 * radius, 4 * radius);
        let s_4r = [s_2r[0] + d2[0], s_2r[1] + d2[1]];
        let den = d1[0] * d1[0] + d1[1] * d1[1];
        let rho = if den > 0.0 { (d1[0] * d2[0] + d1[1] * d2[1]) / den } else { 0.0 };
        if !(rho > 0.0 && rho < 1.0) {
            return s_4r;
        }
        let f = rho / (1.0 - rho);
        [s_4r[0] + f * d2[0], s_4r[1] + f * d2[1]]
    }
}

/// `∫ K_j(x, y) ω(y) dy` over `region`; the returned `u₂` includes the sign
/// carried by `K₂`.
pub fn velocity_quadrature<S: VorticitySource + ?Sized>(
    omega: &S,
    x: [f64; 2],
    params: &KernelParams,
    region: RegionSpec,
) -> Result<QuadratureVelocity> {
    velocity_quadrature_with(omega, x, params, region, Execution::default())
}

pub fn velocity_quadrature_with<S: VorticitySource + ?Sized>(
    omega: &S,
    x: [f64; 2],
    params: &KernelParams,
    region: RegionSpec,
    exec: Execution,
) -> Result<QuadratureVelocity> {
    params.validate()?;
    check_alpha_kernel(params.alpha)?;
    if !(x[0] > 0.0 && x[0] < PI && x[1] > 0.0 && x[1] < PI) {
        return Err(Error::InvalidParameter(format!("x = {x:?} outside (0, π)²")));
    }
    let mut warnings = Vec::new();
    let norm = x[0].hypot(x[1]);
    let (pieces, far, box_side) = match region.kind {
        RegionKind::Near | RegionKind::Medium => {
            let l = region.l;
            if !(l >= 2.0) {
                return Err(Error::InvalidParameter(format!("L = {l} must be >= 2")));
            }
            let ell = l * norm;
            if ell >= PI {
                return Err(Error::EmptyRegion(format!("L|x| = {ell} >= π")));
            }
            if let Some(h) = omega.resolution() {
                if ell < 4.0 * h {
                    warnings.push(format!("L|x| = {ell:.3e} spans fewer than 4 cells of size {h:.3e}"));
                }
            }
            if region.kind == RegionKind::Near {
                (vec![Piece { rect: Rect::new(0.0, ell, 0.0, ell), singular: true }], false, ell)
            } else {
                (medium_pieces(ell), false, ell)
            }
        }
        RegionKind::Far => (Vec::new(), true, PI),
        RegionKind::Full => (vec![Piece { rect: Rect::new(0.0, PI, 0.0, PI), singular: true }], true, PI),
    };

    let engine = Engine { x, alpha: params.alpha, src: omega, rule: GaussLegendre::new(PANEL_ORDER) };
    let taylor = Taylor {
        w0: omega.value(x),
        g: omega.gradient(x),
        excl: params.pv_cells * box_side / KernelParams::REFERENCE_CELLS,
        geometry: params.pv_geometry,
    };
    for p in &pieces {
        if p.singular && !p.rect.contains_strictly(x) {
            return Err(Error::InvalidParameter("x must lie inside the singular box".into()));
        }
    }

    // coarse pass fixes the absolute tolerance per component
    let coarse: Vec<[f64; 2]> = pieces
        .iter()
        .map(|p| {
            if p.singular {
                let a = engine.panel(&p.rect, Some(&taylor));
                let s = singular_moment(x, &p.rect, &taylor, params.alpha);
                [a[0] + s[0], a[1] + s[1]]
            } else {
                engine.panel(&p.rect, None)
            }
        })
        .collect();
    let mut scale = [0.0f64; 2];
    for c in &coarse {
        scale[0] += c[0].abs();
        scale[1] += c[1].abs();
    }
    if far {
        let e = FarField::new(&engine, [f64::INFINITY; 2], exec).cell(1, 1);
        scale[0] += e[0].abs();
        scale[1] += e[1].abs();
    }
    let big = scale[0].max(scale[1]);
    let tol = [
        params.rel_tol * scale[0].max(1e-3 * big).max(1e-300),
        params.rel_tol * scale[1].max(1e-3 * big).max(1e-300),
    ];
    let piece_tol = {
        let k = pieces.len().max(1) as f64 + if far { 1.0 } else { 0.0 };
        [tol[0] / k, tol[1] / k]
    };

    let min_side = taylor.excl / 8.0;
    let vals = map_indexed(exec, pieces.len(), |i| {
        let p = &pieces[i];
        if p.singular {
            let whole = engine.panel(&p.rect, Some(&taylor));
            let a = engine.refine(&p.rect, whole, piece_tol, MAX_DEPTH, min_side, Some(&taylor));
            let s = singular_moment(x, &p.rect, &taylor, params.alpha);
            [a[0] + s[0], a[1] + s[1]]
        } else {
            engine.refine(&p.rect, coarse[i], piece_tol, MAX_DEPTH, 0.0, None)
        }
    });
    let mut u = [
        pairwise_sum(&vals.iter().map(|v| v[0]).collect::<Vec<_>>()),
        pairwise_sum(&vals.iter().map(|v| v[1]).collect::<Vec<_>>()),
    ];
    if far {
        let ff = FarField::new(&engine, piece_tol, exec);
        let f = ff.total(params.image_radius, params.tail, params.alpha);
        u[0] += f[0];
        u[1] += f[1];
    }
    if !(u[0].is_finite() && u[1].is_finite()) {
        return Err(Error::NonFinite { what: "quadrature velocity", index: 0 });
    }
    Ok(QuadratureVelocity { u, warnings })
}

/// `u_quad / u_spec` implied by the Riesz-potential normalisation,
/// `4^{1−α} π Γ(1−α) / (2 Γ(1+α))`.
pub fn calibration_constant(alpha: f64) -> f64 {
    4f64.powf(1.0 - alpha) * PI * libm::tgamma(1.0 - alpha) / (2.0 * libm::tgamma(1.0 + alpha))
}

/// Least-squares `c` minimising `Σ |q_i − c s_i|²` over vector samples.
pub fn fit_calibration(quad: &[[f64; 2]], spec: &[[f64; 2]]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (q, s) in quad.iter().zip(spec) {
        num += q[0] * s[0] + q[1] * s[1];
        den += s[0] * s[0] + s[1] * s[1];
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // reference values from a 25-digit tanh-sinh cubature split along the
    // coordinate axes through the singular point
    #[test]
    fn weakly_singular_matches_reference() {
        let refs = [(0.25, 1.210064265727261479), (0.5, 2.631752279439440696), (0.75, 7.956186515497423855)];
        for (alpha, want) in refs {
            let w = rect_weakly_singular(-0.3, 0.7, -0.45, 0.2, alpha);
            assert_relative_eq!(w, want, max_relative = 1e-12);
        }
    }

    // principal values of the odd moments are the integrals outside the
    // symmetric square (−0.2, 0.2)², where they cancel
    #[test]
    fn moments_match_reference() {
        let m = moments(-0.2, 0.7, -0.2, 0.5, 0.75);
        assert_relative_eq!(m[0], -2.231926136836498992, max_relative = 1e-11);
        assert_relative_eq!(m[1], -0.170340827615881734, max_relative = 1e-11);
        assert_relative_eq!(m[2], -3.734537688852850830, max_relative = 1e-11);
    }

    #[test]
    fn zero_vorticity_gives_zero() {
        let z = SineField::zeros(8).unwrap();
        let p = KernelParams::new(0.5).unwrap();
        for region in [RegionSpec::near(4.0), RegionSpec::medium(4.0), RegionSpec::far(), RegionSpec::full()] {
            let v = velocity_quadrature(&z, [0.1, 0.2], &p, region).unwrap();
            assert_eq!(v.u, [0.0, 0.0]);
        }
    }

    #[test]
    fn empty_medium_region_rejected() {
        let z = SineField::zeros(8).unwrap();
        let p = KernelParams::new(0.5).unwrap();
        let r = velocity_quadrature(&z, [1.0, 1.0], &p, RegionSpec::medium(4.0));
        assert!(matches!(r, Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn calibration_constant_at_half() {
        assert_relative_eq!(calibration_constant(0.5), 2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn region_additivity() {
        let w = SineField::single_mode(4, 1, 1, 1.0).unwrap();
        let p = KernelParams::new(0.5).unwrap();
        let x = [0.05, 0.08];
        let get = |r| velocity_quadrature(&w, x, &p, r).unwrap().u;
        let near = get(RegionSpec::near(4.0));
        let med = get(RegionSpec::medium(4.0));
        let far = get(RegionSpec::far());
        let full = get(RegionSpec::full());
        for j in 0..2 {
            assert_relative_eq!(near[j] + med[j] + far[j], full[j], max_relative = 1e-6);
        }
    }

    #[test]
    fn single_mode_matches_calibrated_spectral_velocity() {
        let w = SineField::single_mode(4, 1, 1, 1.0).unwrap();
        for alpha in [0.25, 0.5, 0.75] {
            let p = KernelParams::new(alpha).unwrap();
            let modes = crate::spectral::velocity_modes(&w, alpha).unwrap();
            let c = calibration_constant(alpha);
            for x in [[0.3, 1.1], [2.0, 0.4], [1.5, 2.9]] {
                let q = velocity_quadrature(&w, x, &p, RegionSpec::full()).unwrap().u;
                let s = [modes[0].evaluate(x), modes[1].evaluate(x)];
                let err = (q[0] - c * s[0]).hypot(q[1] - c * s[1]) / (c * s[0]).hypot(c * s[1]);
                assert!(err < 1e-4, "alpha {alpha} x {x:?}: {q:?} vs {:?}", [c * s[0], c * s[1]]);
            }
        }
    }
}
