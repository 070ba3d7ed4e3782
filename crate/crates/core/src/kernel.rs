//! Standard Gaussian kernel and the scalar factors derived from it.
//!
//! The whole pipeline is written against this one kernel: it is spherically
//! symmetric, integrates to one, has zero first moment and identity second
//! moment, and every factor the limit theory needs (self-convolution Ψ, the
//! ψ integral, ∫K², the Hessian trace weight) has a closed form.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

#[inline]
fn sq_norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum()
}

/// Normalizing constant `(2π)^{-d/2}`.
#[inline]
pub fn norm_const(dim: usize) -> f64 {
    (2.0 * PI).powi(-(dim as i32)).sqrt()
}

/// `K(u) = (2π)^{-d/2} exp(-|u|²/2)`.
#[inline]
pub fn eval(u: &[f64]) -> f64 {
    norm_const(u.len()) * (-0.5 * sq_norm(u)).exp()
}

/// `∇K(u) = -u K(u)`.
pub fn grad(u: &[f64]) -> Vec<f64> {
    let k = eval(u);
    u.iter().map(|&x| -x * k).collect()
}

/// Hessian `K''(u) = (u u* - I) K(u)`.
pub fn hessian(u: &[f64]) -> DMatrix<f64> {
    let d = u.len();
    let k = eval(u);
    DMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (u[i] * u[j] - delta) * k
    })
}

/// Trace of the Hessian, `ΔK(u) = (|u|² - d) K(u)`.
///
/// This is the radial weight of the closed-form Ŵ sum. Differentiating the
/// Gaussian gives the `-d` sign; the quadrature identity
/// `Ŵ(x) = ∫ K(z) ⟨V̂''(x) z, z⟩ dz` pins it down (see the w-term tests).
#[inline]
pub fn laplacian_weight(u_sq_norm: f64, dim: usize) -> f64 {
    u_sq_norm - dim as f64
}

/// Self-convolution `Ψ(y) = ∫ K(z) K(z + y) dz = (4π)^{-d/2} e^{-|y|²/4}`.
pub fn self_convolution(y: &[f64]) -> f64 {
    (4.0 * PI).powi(-(y.len() as i32)).sqrt() * (-0.25 * sq_norm(y)).exp()
}

/// `∫ K²(u) du = Ψ(0) = (4π)^{-d/2}`.
#[inline]
pub fn sq_integral(dim: usize) -> f64 {
    (4.0 * PI).powi(-(dim as i32)).sqrt()
}

/// `ψ(v) = ∫_ℝ Ψ(vτ) dτ = 2√π (4π)^{-d/2} / |v|`.
///
/// Spherically symmetric, so constant on the unit sphere; diverges at v = 0.
pub fn psi_factor(v: &[f64]) -> Result<f64> {
    let norm = sq_norm(v).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroSpeed);
    }
    if !norm.is_finite() {
        return Err(Error::NonFinite("psi_factor argument"));
    }
    Ok(2.0 * PI.sqrt() * (4.0 * PI).powi(-(v.len() as i32)).sqrt() / norm)
}
