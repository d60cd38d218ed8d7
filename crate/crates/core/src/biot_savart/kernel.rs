//! Symmetrized odd–odd Biot–Savart kernels and their far-field asymptotics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x` together with its reflections `x̃ = (−x₁, x₂)`, `x̄ = (x₁, −x₂)`, `−x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedPoint {
    pub x: [f64; 2],
    pub x_tilde: [f64; 2],
    pub x_bar: [f64; 2],
    pub minus_x: [f64; 2],
}

impl ReflectedPoint {
    pub fn new(x: [f64; 2]) -> Self {
        ReflectedPoint {
            x,
            x_tilde: [-x[0], x[1]],
            x_bar: [x[0], -x[1]],
            minus_x: [-x[0], -x[1]],
        }
    }
}

pub fn check_alpha_kernel(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha, "(0, 1)"));
    }
    Ok(())
}

/// Both kernels split into the part singular at `y = x` and the regular rest.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelSplit {
    /// `(x₂−y₂)/|x−y|^{2+2α}` and `−(x₁−y₁)/|x−y|^{2+2α}`.
    pub singular: [f64; 2],
    pub regular: [f64; 2],
}

/// `r^{-(2+2α)}` from `r²`.
#[inline]
fn inv_pow(r2: f64, half_p: f64) -> f64 {
    r2.powf(-half_p)
}

#[inline]
pub(crate) fn kernel_split(x: [f64; 2], y: [f64; 2], alpha: f64) -> KernelSplit {
    let hp = 1.0 + alpha;
    let (xm1, xm2) = (x[0] - y[0], x[1] - y[1]);
    let (xp1, xp2) = (x[0] + y[0], x[1] + y[1]);
    // |x−y|, |x̃−y|, |x̄−y|, |x+y|
    let r_m = xm1 * xm1 + xm2 * xm2;
    let r_t = xp1 * xp1 + xm2 * xm2;
    let r_b = xm1 * xm1 + xp2 * xp2;
    let r_p = xp1 * xp1 + xp2 * xp2;
    let k_m = if r_m > 0.0 { inv_pow(r_m, hp) } else { 0.0 };
    let k_t = inv_pow(r_t, hp);
    let k_b = inv_pow(r_b, hp);
    let k_p = inv_pow(r_p, hp);
    let s1 = xm2 * k_m;
    let r1 = -xm2 * k_t - xp2 * (k_b - k_p);
    let s2 = -xm1 * k_m;
    let r2 = -(-xm1 * k_b - xp1 * (k_t - k_p));
    KernelSplit { singular: [s1, s2], regular: [r1, r2] }
}

#[inline]
pub(crate) fn kernel_pair(x: [f64; 2], y: [f64; 2], alpha: f64) -> [f64; 2] {
    let k = kernel_split(x, y, alpha);
    [k.singular[0] + k.regular[0], k.singular[1] + k.regular[1]]
}

fn check_distinct(x: [f64; 2], y: [f64; 2]) -> Result<()> {
    if x == y {
        return Err(Error::CoincidentPoints(x[0], x[1]));
    }
    Ok(())
}

/// Bracket of the `u₁` integral:
/// `(x₂−y₂)/|x−y|^{2+2α} − (x₂−y₂)/|x̃−y|^{2+2α} − (x₂+y₂)/|x̄−y|^{2+2α} + (x₂+y₂)/|x+y|^{2+2α}`.
pub fn kernel_k1(x: [f64; 2], y: [f64; 2], alpha: f64) -> Result<f64> {
    check_distinct(x, y)?;
    Ok(kernel_pair(x, y, alpha)[0])
}

/// Integrand of `u₂`, including the leading minus sign of its integral.
pub fn kernel_k2(x: [f64; 2], y: [f64; 2], alpha: f64) -> Result<f64> {
    check_distinct(x, y)?;
    Ok(kernel_pair(x, y, alpha)[1])
}

/// `(−1)^j · (−8)(1+α) x_j y₁ y₂ |y|^{−4−2α}` for `j ∈ {1, 2}`.
pub fn asymptotic_k(j: usize, x: [f64; 2], y: [f64; 2], alpha: f64) -> f64 {
    assert!(j == 1 || j == 2, "component index must be 1 or 2");
    let r2 = y[0] * y[0] + y[1] * y[1];
    let base = 8.0 * (1.0 + alpha) * y[0] * y[1] * r2.powf(-(2.0 + alpha));
    if j == 1 {
        -base * x[0]
    } else {
        base * x[1]
    }
}

/// `f_j = K_j / asymptote − 1`.
pub fn relative_kernel_error(j: usize, x: [f64; 2], y: [f64; 2], alpha: f64) -> Result<f64> {
    let a = asymptotic_k(j, x, y, alpha);
    if a == 0.0 {
        return Err(Error::ZeroAsymptote);
    }
    let k = if j == 1 { kernel_k1(x, y, alpha)? } else { kernel_k2(x, y, alpha)? };
    Ok(k / a - 1.0)
}

/// Exclusion shape used when dropping the subtracted residual near `y = x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PvGeometry {
    Disk,
    Square,
}

/// Treatment of the truncated lattice-image tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMode {
    Truncated,
    /// `S_∞ ≈ S_{2R} + (S_{2R} − S_R)/(2^{2α} − 1)` for a tail `O(R^{−2α})`.
    Richardson,
    /// Geometric extrapolation from `S_R, S_{2R}, S_{4R}` with the observed
    /// contraction ratio; falls back to `S_{4R}` when the ratio is not in (0, 1).
    Aitken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    /// Exclusion radius around `x`, in reference cells of the enclosing box
    /// (box side / [`KernelParams::REFERENCE_CELLS`]).
    pub pv_cells: f64,
    pub pv_geometry: PvGeometry,
    /// Image cells summed per direction.
    pub image_radius: usize,
    pub tail: TailMode,
    /// Relative tolerance of the adaptive cubature.
    pub rel_tol: f64,
}

impl KernelParams {
    pub const REFERENCE_CELLS: f64 = 16384.0;
    pub const DEFAULT_PV_CELLS: f64 = 2.0;
    pub const DEFAULT_IMAGE_RADIUS: usize = 8;

    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha_kernel(alpha)?;
        Ok(KernelParams {
            alpha,
            pv_cells: Self::DEFAULT_PV_CELLS,
            pv_geometry: PvGeometry::Disk,
            image_radius: Self::DEFAULT_IMAGE_RADIUS,
            tail: TailMode::Aitken,
            rel_tol: 1e-8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha_kernel(self.alpha)?;
        if self.image_radius < 1 {
            return Err(Error::InvalidParameter("image_radius must be >= 1".into()));
        }
        // the dropped residual must stay well inside the reference box
        if !(self.pv_cells >= 0.0 && self.pv_cells < Self::REFERENCE_CELLS / 8.0) {
            return Err(Error::InvalidParameter(format!("pv_cells = {}", self.pv_cells)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reflections() {
        let r = ReflectedPoint::new([0.3, 0.7]);
        assert_eq!(r.x_tilde, [-0.3, 0.7]);
        assert_eq!(r.x_bar, [0.3, -0.7]);
        assert_eq!(r.minus_x, [-0.3, -0.7]);
    }

    #[test]
    fn axis_cancellation() {
        for y in [[1.0, 1.0], [0.2, 3.0], [2.5, 0.01]] {
            assert_eq!(kernel_k1([0.0, 0.4], y, 0.5).unwrap(), 0.0);
            assert_eq!(kernel_k2([0.4, 0.0], y, 0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(kernel_k1([0.2, 0.2], [0.2, 0.2], 0.5).is_err());
        assert!(kernel_k2([0.2, 0.2], [0.2, 0.2], 0.5).is_err());
    }

    #[test]
    fn swap_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = [rng.gen_range(0.01..3.0), rng.gen_range(0.01..3.0)];
            let y = [rng.gen_range(0.01..3.0), rng.gen_range(0.01..3.0)];
            let alpha = rng.gen_range(0.05..0.95);
            let k2 = kernel_k2(x, y, alpha).unwrap();
            let k1s = kernel_k1([x[1], x[0]], [y[1], y[0]], alpha).unwrap();
            assert_relative_eq!(k2, -k1s, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(asymptotic_k(1, [0.01, 0.01], [1.0, 0.0], 0.5), 0.0);
        assert_relative_eq!(asymptotic_k(1, [0.01, 0.0], [1.0, 1.0], 0.0), -0.02, epsilon = 1e-15);
        let (x, y) = ([0.02, 0.05], [0.7, 1.3]);
        assert_relative_eq!(
            asymptotic_k(2, x, y, 0.3),
            -asymptotic_k(1, [x[1], x[0]], [y[1], y[0]], 0.3),
            epsilon = 1e-15
        );
    }

    #[test]
    fn signs_near_origin() {
        let x = [0.01, 0.01];
        let y = [1.0, 1.0];
        let k1 = kernel_k1(x, y, 0.5).unwrap();
        let k2 = kernel_k2(x, y, 0.5).unwrap();
        assert!(k1 < 0.0 && k2 > 0.0);
        let f = relative_kernel_error(1, x, y, 0.5).unwrap();
        // |y|/|x| = 100
        assert!(f.abs() < 1.0 / 100.0);
    }

    #[test]
    fn relative_error_decays() {
        let x: [f64; 2] = [0.3e-2, 0.7e-2];
        let dir = [0.6, 0.8];
        let mut prev = f64::INFINITY;
        for l in [10.0, 100.0, 1000.0] {
            let s = l * (x[0] * x[0] + x[1] * x[1]).sqrt();
            let y = [s * dir[0], s * dir[1]];
            let f = relative_kernel_error(1, x, y, 0.5).unwrap().abs();
            assert!(f < prev);
            prev = f;
        }
        assert!(relative_kernel_error(1, x, [1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(1.0).is_err());
        let mut p = KernelParams::new(0.5).unwrap();
        p.image_radius = 0;
        assert!(p.validate().is_err());
    }
}
