//! Pointwise kernel estimators of the vector field and its derivatives.
//!
//! Observations are `V_i = v(X_i) + ξ_i` at design points `X_i` drawn
//! uniformly from a box `G`. The design density is known (`1/|G|`), so the
//! Nadaraya-Watson sums carry the factor `|G|` instead of a kernel density
//! denominator:
//!
//! ```text
//! V̂(x)  = |G| (n h^d)^{-1}     Σ K((x - X_i)/h) V_i
//! V̂'(x) = |G| (n h^{d+1})^{-1} Σ V_i (∇K((x - X_i)/h))*
//! Ŵ(x)  = |G| (n h̃^{d+2})^{-1} Σ (|u_i|² - d) K(u_i) V_i,  u_i = (x - X_i)/h̃
//! ```
//!
//! On a unit-measure domain these reduce to the plain sums. All sums run
//! over every observation: no truncation, no spatial index. Everything here
//! is a pure function of its inputs and safe to call from many threads.

use crate::error::{Error, Result};
use crate::kernel;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Axis-aligned box `G ⊂ ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidConfig(
                "domain corners must have equal, positive dimension".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "domain axis [{lo}, {hi}] is not a proper interval"
                )));
            }
        }
        Ok(DomainBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }

    /// Box grown by `margin` on every side.
    pub fn inflate(&self, margin: f64) -> DomainBox {
        DomainBox {
            lower: self.lower.iter().map(|lo| lo - margin).collect(),
            upper: self.upper.iter().map(|hi| hi + margin).collect(),
        }
    }
}

/// The sample `{(X_i, V_i)}` with its domain box. Coordinates are stored
/// flat (row-major, `n × d`) so the kernel sums stay allocation-free.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    dim: usize,
    points: Vec<f64>,
    values: Vec<f64>,
    domain: DomainBox,
}

impl ObservationSet {
    pub fn new(domain: DomainBox, points: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = domain.dim();
        if points.is_empty() {
            return Err(Error::EmptyObservations);
        }
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: values.len(),
            });
        }
        let mut flat_p = Vec::with_capacity(points.len() * dim);
        let mut flat_v = Vec::with_capacity(points.len() * dim);
        for (i, (p, v)) in points.iter().zip(&values).enumerate() {
            if p.len() != dim || v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len().max(v.len()),
                });
            }
            if !domain.contains(p) {
                return Err(Error::PointOutsideDomain { index: i });
            }
            flat_p.extend_from_slice(p);
            flat_v.extend_from_slice(v);
        }
        Ok(ObservationSet {
            dim,
            points: flat_p,
            values: flat_v,
            domain,
        })
    }

    /// Construct from pre-flattened row-major buffers (used by the samplers).
    pub fn from_flat(domain: DomainBox, points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if points.is_empty() {
            return Err(Error::EmptyObservations);
        }
        if points.len() % dim != 0 || points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: values.len(),
            });
        }
        for i in 0..points.len() / dim {
            if !domain.contains(&points[i * dim..(i + 1) * dim]) {
                return Err(Error::PointOutsideDomain { index: i });
            }
        }
        Ok(ObservationSet {
            dim,
            points,
            values,
            domain,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

/// Bandwidths for the field estimators. `h` drives V̂ and V̂', `h_tilde`
/// drives the second-derivative sum Ŵ, and `beta` is the calibration
/// constant in `h = (β/n)^{1/(d+3)}` (β = 0 drops the bias term downstream).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub h: f64,
    pub h_tilde: f64,
    pub beta: f64,
}

impl EstimatorConfig {
    pub fn new(h: f64, h_tilde: f64, beta: f64) -> Result<Self> {
        let cfg = EstimatorConfig { h, h_tilde, beta };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bandwidth from the calibration `h = (β/n)^{1/(d+3)}`.
    pub fn from_beta(beta: f64, n: usize, dim: usize) -> Result<Self> {
        if beta <= 0.0 || n == 0 {
            return Err(Error::InvalidConfig("beta and n must be positive".into()));
        }
        let h = (beta / n as f64).powf(1.0 / (dim as f64 + 3.0));
        EstimatorConfig::new(h, h, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("h must be > 0, got {}", self.h)));
        }
        if !(self.h_tilde > 0.0 && self.h_tilde.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "h_tilde must be > 0, got {}",
                self.h_tilde
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Field value, Jacobian and (optionally) the Ŵ term at one point.
#[derive(Debug, Clone)]
pub struct FieldEstimate {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub w_term: Option<DVector<f64>>,
}

#[inline]
fn scaled_diff_sq(x: &[f64], p: &[f64], h: f64, u: &mut [f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..x.len() {
        let uj = (x[j] - p[j]) / h;
        u[j] = uj;
        s += uj * uj;
    }
    s
}

/// `V̂(x)`: kernel-weighted average of the observed vectors.
pub fn nw_estimate(obs: &ObservationSet, cfg: &EstimatorConfig, x: &[f64]) -> DVector<f64> {
    let d = obs.dim();
    let h = cfg.h;
    let norm = kernel::norm_const(d);
    let mut acc = vec![0.0; d];
    let mut u = vec![0.0; d];
    for i in 0..obs.len() {
        let sq = scaled_diff_sq(x, obs.point(i), h, &mut u);
        let w = norm * (-0.5 * sq).exp();
        let v = obs.value(i);
        for j in 0..d {
            acc[j] += w * v[j];
        }
    }
    let scale = obs.domain().volume() / (obs.len() as f64 * h.powi(d as i32));
    DVector::from_iterator(d, acc.into_iter().map(|a| a * scale))
}

/// `V̂'(x)`: the exact spatial Jacobian of [`nw_estimate`] at `x`.
pub fn nw_jacobian(obs: &ObservationSet, cfg: &EstimatorConfig, x: &[f64]) -> DMatrix<f64> {
    let d = obs.dim();
    let h = cfg.h;
    let norm = kernel::norm_const(d);
    let mut acc = DMatrix::zeros(d, d);
    let mut u = vec![0.0; d];
    for i in 0..obs.len() {
        let sq = scaled_diff_sq(x, obs.point(i), h, &mut u);
        let w = norm * (-0.5 * sq).exp();
        let v = obs.value(i);
        // ∂_j K(u) / K(u) = -u_j, so row l, col j accumulates -v_l u_j w.
        for l in 0..d {
            let vw = v[l] * w;
            for j in 0..d {
                acc[(l, j)] -= vw * u[j];
            }
        }
    }
    let scale = obs.domain().volume() / (obs.len() as f64 * h.powi(d as i32 + 1));
    acc * scale
}

/// `Ŵ(x) = ∫ K(z) ⟨V̂''(x) z, z⟩ dz`, evaluated as the closed-form sum with
/// the second-derivative bandwidth `h̃`.
pub fn nw_w_term(obs: &ObservationSet, cfg: &EstimatorConfig, x: &[f64]) -> DVector<f64> {
    let d = obs.dim();
    let h = cfg.h_tilde;
    let norm = kernel::norm_const(d);
    let mut acc = vec![0.0; d];
    let mut u = vec![0.0; d];
    for i in 0..obs.len() {
        let sq = scaled_diff_sq(x, obs.point(i), h, &mut u);
        let w = kernel::laplacian_weight(sq, d) * norm * (-0.5 * sq).exp();
        let v = obs.value(i);
        for j in 0..d {
            acc[j] += w * v[j];
        }
    }
    let scale = obs.domain().volume() / (obs.len() as f64 * h.powi(d as i32 + 2));
    DVector::from_iterator(d, acc.into_iter().map(|a| a * scale))
}

/// Value, Jacobian and optionally Ŵ in one call.
pub fn estimate_at(
    obs: &ObservationSet,
    cfg: &EstimatorConfig,
    x: &[f64],
    with_w: bool,
) -> FieldEstimate {
    FieldEstimate {
        value: nw_estimate(obs, cfg, x),
        jacobian: nw_jacobian(obs, cfg, x),
        w_term: with_w.then(|| nw_w_term(obs, cfg, x)),
    }
}

/// Global noise covariance estimate
/// `Σ̂ = n^{-1} Σ_j (V_j - V̂(X_j))(V_j - V̂(X_j))*`.
///
/// Symmetric PSD by construction (a scaled sum of outer squares).
pub fn noise_cov_estimate(obs: &ObservationSet, cfg: &EstimatorConfig) -> Result<DMatrix<f64>> {
    let d = obs.dim();
    let n = obs.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "noise covariance needs at least 2 observations".into(),
        ));
    }
    let mut acc = DMatrix::zeros(d, d);
    let mut resid = vec![0.0; d];
    for j in 0..n {
        let fitted = nw_estimate(obs, cfg, obs.point(j));
        let v = obs.value(j);
        for l in 0..d {
            resid[l] = v[l] - fitted[l];
        }
        for a in 0..d {
            for b in 0..d {
                acc[(a, b)] += resid[a] * resid[b];
            }
        }
    }
    Ok(acc / n as f64)
}
