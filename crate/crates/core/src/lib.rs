//! Simulation and numerical-verification laboratory for the modified surface
//! quasi-geostrophic equations
//!
//! ```text
//! ∂ₜω + (u·∇)ω = 0,   u = ∇⊥(−Δ)^{−1+α} ω,   0 < α < 1,
//! ```
//!
//! on the torus `[−π, π)²` restricted to solutions odd in both coordinates.

pub mod error;
pub mod estimates;
pub mod exec;
pub mod biot_savart;
pub mod initial_data;
pub mod evolution;
pub mod snapshot;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use exec::Execution;
