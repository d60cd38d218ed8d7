use super::field::{GridField, ModalField, SineField, VelocityField};
use super::transform::{transpose, Parity, TrigTransform};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Coordinate axis for spectral differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
        }
    }
}

/// The spectral velocity law accepts `0 ≤ α < 1`; `α = 0` is 2D Euler.
pub fn check_alpha_spectral(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha, "[0, 1)"));
    }
    Ok(())
}

/// Transform engine for truncation order `N` on an `N_g` grid.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    n: usize,
    ng: usize,
    exec: Execution,
    trig: TrigTransform,
}

impl SpectralGrid {
    pub fn new(n: usize, ng: usize) -> Result<Self> {
        Self::with_execution(n, ng, Execution::default())
    }

    pub fn with_execution(n: usize, ng: usize, exec: Execution) -> Result<Self> {
        if n < SineField::MIN_ORDER {
            return Err(Error::TruncationTooSmall(n));
        }
        if ng < 2 * n {
            return Err(Error::GridTooCoarse { n, ng });
        }
        Ok(SpectralGrid { n, ng, exec, trig: TrigTransform::new(ng) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Interpolating sine coefficients of grid samples, truncated to order `N`.
    pub fn forward(&self, g: &GridField) -> Result<SineField> {
        if g.ng() != self.ng {
            return Err(Error::InvalidParameter(format!(
                "grid size {} does not match transform size {}",
                g.ng(),
                self.ng
            )));
        }
        if let Some(index) = g.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "grid values", index });
        }
        Ok(self.forward_unchecked(g.values()))
    }

    pub(crate) fn forward_unchecked(&self, values: &[f64]) -> SineField {
        let (n, ng) = (self.n, self.ng);
        // along x₂: rows j₁ → modes k = 0..=N
        let a = self.trig.lanes(self.exec, values, ng, 0, Parity::Sin, n + 1);
        let mut b = Vec::with_capacity(ng * n);
        for row in a.chunks(n + 1) {
            b.extend_from_slice(&row[1..]);
        }
        // along x₁
        let bt = transpose(&b, ng, n);
        let c = self.trig.lanes(self.exec, &bt, ng, 0, Parity::Sin, n + 1);
        let mut d = Vec::with_capacity(n * n);
        for row in c.chunks(n + 1) {
            d.extend_from_slice(&row[1..]);
        }
        let scale = (2.0 / ng as f64).powi(2);
        let mut coeffs = transpose(&d, n, n);
        coeffs.iter_mut().for_each(|v| *v *= scale);
        SineField::from_coeffs(n, coeffs).expect("finite transform output")
    }

    /// Sine series evaluated on the grid.
    pub fn inverse(&self, f: &SineField) -> GridField {
        self.evaluate(&f.as_modal())
    }

    /// Any separable series evaluated on the grid.
    pub fn evaluate(&self, f: &ModalField) -> GridField {
        let (n, ng) = (f.n, self.ng);
        assert!(n <= ng, "series order exceeds grid");
        let a = self.trig.lanes(self.exec, &f.coeffs, n, 1, f.parity[1], ng);
        let at = transpose(&a, n, ng);
        let b = self.trig.lanes(self.exec, &at, n, 1, f.parity[0], ng);
        GridField::new(ng, transpose(&b, ng, ng)).expect("grid size")
    }

    pub fn velocity(&self, omega: &SineField, alpha: f64) -> Result<VelocityField> {
        let [u1, u2] = velocity_modes(omega, alpha)?;
        Ok(VelocityField { u1: self.evaluate(&u1), u2: self.evaluate(&u2), alpha })
    }

    /// Grid maximum over the entries of `∇²ω`; a lower bound for the sup norm.
    pub fn hessian_sup_norm(&self, omega: &SineField) -> f64 {
        let m = omega.as_modal();
        [m.derivative(0, 2), m.derivative(1, 2), m.derivative(0, 1).derivative(1, 1)]
            .iter()
            .map(|d| self.evaluate(d).max_abs())
            .fold(0.0, f64::max)
    }
}

pub fn forward_transform(g: &GridField, n: usize) -> Result<SineField> {
    SpectralGrid::new(n, g.ng())?.forward(g)
}

pub fn inverse_transform(f: &SineField, ng: usize) -> Result<GridField> {
    Ok(SpectralGrid::new(f.n(), ng)?.inverse(f))
}

/// `a_{mn} ↦ a_{mn} / (m² + n²)^{1−α}`.
pub fn fractional_inverse_laplacian(f: &SineField, alpha: f64) -> Result<SineField> {
    check_alpha_spectral(alpha)?;
    let n = f.n();
    let mut out = f.clone();
    let e = 1.0 - alpha;
    for m in 1..=n {
        for k in 1..=n {
            let lam = ((m * m + k * k) as f64).powf(e);
            out.set(m, k, f.get(m, k) / lam);
        }
    }
    Ok(out)
}

pub fn spectral_derivative(f: &SineField, axis: Axis, order: u32) -> Result<ModalField> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    Ok(f.as_modal().derivative(axis.index(), order))
}

/// `(u₁, u₂) = (−∂₂ψ, ∂₁ψ)` with `ψ = (−Δ)^{−1+α}ω`, as series.
pub fn velocity_modes(omega: &SineField, alpha: f64) -> Result<[ModalField; 2]> {
    let psi = fractional_inverse_laplacian(omega, alpha)?.as_modal();
    let mut u1 = psi.derivative(1, 1);
    u1.coeffs.iter_mut().for_each(|c| *c = -*c);
    let u2 = psi.derivative(0, 1);
    Ok([u1, u2])
}

pub fn velocity_from_vorticity(omega: &SineField, alpha: f64, ng: usize) -> Result<VelocityField> {
    SpectralGrid::new(omega.n(), ng)?.velocity(omega, alpha)
}

pub fn evaluate_offgrid(f: &SineField, x: [f64; 2]) -> f64 {
    f.evaluate(x)
}

pub fn hessian_sup_norm(omega: &SineField, ng: usize) -> Result<f64> {
    Ok(SpectralGrid::new(omega.n(), ng)?.hessian_sup_norm(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const N: usize = 8;
    const NG: usize = 16;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(N, NG).unwrap()
    }

    #[test]
    fn forward_single_modes() {
        let g = GridField::from_fn(NG, |x, y| x.sin() * y.sin());
        let f = grid().forward(&g).unwrap();
        assert_relative_eq!(f.get(1, 1), 1.0, epsilon = 1e-14);
        assert!(f.coeffs().iter().skip(1).all(|c| c.abs() < 1e-14));

        let g = GridField::from_fn(NG, |x, y| 3.0 * (2.0 * x).sin() * (5.0 * y).sin());
        let f = grid().forward(&g).unwrap();
        assert_relative_eq!(f.get(2, 5), 3.0, epsilon = 1e-13);
        assert!(f.max_abs_coeff() - 3.0 < 1e-13);

        let g = GridField::from_fn(NG, |x, y| x.sin() * y.sin() + 0.5 * (3.0 * x).sin() * y.sin());
        let f = grid().forward(&g).unwrap();
        assert_relative_eq!(f.get(1, 1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.get(3, 1), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn forward_rejects_nan() {
        let mut g = GridField::zeros(NG);
        g.values_mut()[5] = f64::NAN;
        assert!(matches!(grid().forward(&g), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn grid_must_be_twice_order() {
        assert!(matches!(SpectralGrid::new(8, 15), Err(Error::GridTooCoarse { .. })));
        assert!(SpectralGrid::new(3, 16).is_err());
    }

    #[test]
    fn inverse_point_values() {
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        let g = grid().inverse(&f);
        assert_relative_eq!(g.at(NG / 2, NG / 2), 1.0, epsilon = 1e-14);
        let f = SineField::single_mode(N, 2, 1, 1.0).unwrap();
        assert!(grid().inverse(&f).at(NG / 2, NG / 2).abs() < 1e-14);
        let z = grid().inverse(&SineField::zeros(N).unwrap());
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn boundary_rows_are_zero() {
        let f = SineField::from_coeffs(N, (0..N * N).map(|i| (i as f64).cos()).collect()).unwrap();
        let g = grid().inverse(&f);
        for i in 0..NG {
            assert!(g.at(0, i).abs() < 1e-13 && g.at(i, 0).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_multiplier() {
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        let p = fractional_inverse_laplacian(&f, 0.5).unwrap();
        assert_relative_eq!(p.get(1, 1), 2f64.powf(-0.5), epsilon = 1e-15);
        let f = SineField::single_mode(N, 3, 4, 1.0).unwrap();
        assert_relative_eq!(fractional_inverse_laplacian(&f, 0.0).unwrap().get(3, 4), 1.0 / 25.0);
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        let p = fractional_inverse_laplacian(&f, 1.0 - 1e-12).unwrap();
        assert_relative_eq!(p.get(1, 1), 1.0, epsilon = 1e-10);
        assert!(fractional_inverse_laplacian(&f, 1.0).is_err());
        assert!(fractional_inverse_laplacian(&f, -0.1).is_err());
    }

    #[test]
    fn derivative_examples() {
        let f = SineField::single_mode(N, 2, 1, 1.0).unwrap();
        let d = spectral_derivative(&f, Axis::X1, 1).unwrap();
        assert_eq!(d.parity, [Parity::Cos, Parity::Sin]);
        assert_eq!(d.coeffs[N], 2.0);
        let d2 = spectral_derivative(&f, Axis::X1, 2).unwrap();
        assert_eq!(d2.parity, [Parity::Sin, Parity::Sin]);
        assert_eq!(d2.coeffs[N], -4.0);
        let z = spectral_derivative(&SineField::zeros(N).unwrap(), Axis::X2, 1).unwrap();
        assert!(z.coeffs.iter().all(|&c| c == 0.0));
        assert!(matches!(spectral_derivative(&f, Axis::X2, 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn single_mode_velocity() {
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        for (alpha, fac) in [(0.0, 0.5), (0.5, 2f64.powf(-0.5))] {
            let v = grid().velocity(&f, alpha).unwrap();
            let h = PI / NG as f64;
            for (i, j) in [(3, 5), (7, 2), (0, 9)] {
                let (x, y) = (i as f64 * h, j as f64 * h);
                assert_relative_eq!(v.u1.at(i, j), -fac * x.sin() * y.cos(), epsilon = 1e-14);
                assert_relative_eq!(v.u2.at(i, j), fac * x.cos() * y.sin(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn offgrid_examples() {
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        assert_relative_eq!(f.evaluate([FRAC_PI_4, FRAC_PI_4]), 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.evaluate([FRAC_PI_4 + 2.0 * PI, FRAC_PI_4]), 0.5, epsilon = 1e-14);
        let g = SineField::from_coeffs(N, (0..N * N).map(|i| 1.0 / (1 + i) as f64).collect())
            .unwrap();
        assert_eq!(g.evaluate([0.0, 0.7]), 0.0);
    }

    #[test]
    fn hessian_examples() {
        let f = SineField::single_mode(N, 1, 1, 1.0).unwrap();
        assert_relative_eq!(grid().hessian_sup_norm(&f), 1.0, epsilon = 1e-14);
        let f = SineField::single_mode(N, 2, 1, 1.0).unwrap();
        assert_relative_eq!(grid().hessian_sup_norm(&f), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn velocity_is_divergence_free() {
        let f = SineField::from_coeffs(N, (0..N * N).map(|i| ((i * 7) % 5) as f64 - 2.0).collect())
            .unwrap();
        let [u1, u2] = velocity_modes(&f, 0.3).unwrap();
        let div1 = u1.derivative(0, 1);
        let div2 = u2.derivative(1, 1);
        assert_eq!(div1.parity, div2.parity);
        for (a, b) in div1.coeffs.iter().zip(&div2.coeffs) {
            assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn velocity_parities() {
        let f = SineField::from_coeffs(N, (0..N * N).map(|i| (i as f64 * 0.37).sin()).collect())
            .unwrap();
        let [u1, u2] = velocity_modes(&f, 0.5).unwrap();
        let x = [0.4, 1.1];
        assert_relative_eq!(u1.evaluate([-x[0], x[1]]), -u1.evaluate(x), epsilon = 1e-13);
        assert_relative_eq!(u1.evaluate([x[0], -x[1]]), u1.evaluate(x), epsilon = 1e-13);
        assert_relative_eq!(u2.evaluate([-x[0], x[1]]), u2.evaluate(x), epsilon = 1e-13);
        assert_relative_eq!(u2.evaluate([x[0], -x[1]]), -u2.evaluate(x), epsilon = 1e-13);
    }

    #[test]
    fn tensor_sampling_matches_pointwise() {
        let f = SineField::from_coeffs(N, (0..N * N).map(|i| (i as f64 * 0.91).cos()).collect())
            .unwrap();
        let m = f.as_modal().derivative(0, 1);
        let ys1 = [0.1, 0.7, 2.0];
        let ys2 = [0.3, FRAC_PI_2];
        let t = m.sample_tensor(&ys1, &ys2);
        for (i, &a) in ys1.iter().enumerate() {
            for (j, &b) in ys2.iter().enumerate() {
                assert_relative_eq!(t[i * 2 + j], m.evaluate([a, b]), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sequential_matches_parallel() {
        let f = SineField::from_coeffs(N, (0..N * N).map(|i| (i as f64).sqrt()).collect()).unwrap();
        let a = SpectralGrid::with_execution(N, NG, Execution::Sequential).unwrap().inverse(&f);
        let b = SpectralGrid::with_execution(N, NG, Execution::Parallel).unwrap().inverse(&f);
        assert_eq!(a, b);
    }

    fn band_limited() -> impl Strategy<Value = SineField> {
        prop::collection::vec(-1.0f64..1.0, N * N)
            .prop_map(|c| SineField::from_coeffs(N, c).unwrap())
    }

    proptest! {
        #[test]
        fn roundtrip_is_identity(f in band_limited()) {
            let sg = grid();
            let g = sg.inverse(&f);
            let back = sg.forward(&g).unwrap();
            let g2 = sg.inverse(&back);
            let scale = g.max_abs().max(1e-300);
            for (a, b) in g.values().iter().zip(g2.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn parseval(f in band_limited()) {
            let g = grid().inverse(&f);
            let lhs = g.l2_norm().powi(2);
            let rhs = f.l2_norm_sq();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
        }

        #[test]
        fn odd_parity(f in band_limited(), x1 in -4.0f64..4.0, x2 in -4.0f64..4.0) {
            let a = f.evaluate([-x1, x2]);
            let b = f.evaluate([x1, x2]);
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn fractional_composes(f in band_limited(), alpha in 0.0f64..0.99) {
            let twice = fractional_inverse_laplacian(
                &fractional_inverse_laplacian(&f, alpha).unwrap(), alpha).unwrap();
            for m in 1..=N {
                for k in 1..=N {
                    let want = f.get(m, k) * ((m * m + k * k) as f64).powf(-2.0 * (1.0 - alpha));
                    prop_assert!((twice.get(m, k) - want).abs() <= 1e-14 * (1.0 + want.abs()));
                }
            }
        }
    }
}
