//! Symmetrized Biot–Savart kernels and region quadrature, an independent
//! check on the spectral velocity.

mod gauss;
mod kernel;
mod quadrature;

pub use gauss::{adaptive, GaussLegendre};
pub use kernel::{
    asymptotic_k, check_alpha_kernel, kernel_k1, kernel_k2, relative_kernel_error, KernelParams,
    PvGeometry, ReflectedPoint, TailMode,
};
pub use quadrature::{
    calibration_constant, fit_calibration, velocity_quadrature, velocity_quadrature_with, OddOddFn,
    QuadratureVelocity, Rect, RegionKind, RegionSpec, VorticitySource,
};
