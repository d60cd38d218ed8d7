//! Odd–odd periodic fields in a double sine basis.
//!
//! A [`SineField`] stores `a_{mn}` for `f(x) = Σ a_{mn} sin(m x₁) sin(n x₂)`,
//! `1 ≤ m, n ≤ N`. Derivatives leave the sine–sine class and are carried as a
//! [`ModalField`] whose per-axis [`Parity`] records sine or cosine factors.
//! Grid values live on `x_i = i·π/N_g`, `0 ≤ i < N_g`, in a [`GridField`].

mod field;
mod ops;
mod transform;

pub(crate) use field::fill_trig;
pub use field::{GridField, ModalField, SineField, VelocityField};
pub use ops::{
    check_alpha_spectral, evaluate_offgrid, forward_transform, fractional_inverse_laplacian,
    hessian_sup_norm, inverse_transform, spectral_derivative, velocity_from_vorticity,
    velocity_modes, Axis, SpectralGrid,
};
pub use transform::{transpose, Parity, TrigTransform};
