//! Gauss–Legendre rules and a small adaptive 1D integrator.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        (
            self.nodes.iter().map(|t| c + h * t).collect(),
            self.weights.iter().map(|w| h * w).collect(),
        )
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        h * self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(c + h * t)).sum::<f64>()
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Adaptive bisection with a fixed Gauss rule; accepts when the two halves
/// agree with the parent to `tol` (absolute).
pub fn adaptive(rule: &GaussLegendre, a: f64, b: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    fn rec(
        rule: &GaussLegendre,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        f: &dyn Fn(f64) -> f64,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let l = rule.integrate(a, m, f);
        let r = rule.integrate(m, b, f);
        if depth == 0 || ((l + r) - whole).abs() <= tol {
            return l + r;
        }
        rec(rule, a, m, l, 0.5 * tol, depth - 1, f) + rec(rule, m, b, r, 0.5 * tol, depth - 1, f)
    }
    if a == b {
        return 0.0;
    }
    let whole = rule.integrate(a, b, f);
    rec(rule, a, b, whole, tol, 48, f)
}
