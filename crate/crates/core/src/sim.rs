//! Synthetic vector fields, seeded observation sampling and Monte Carlo
//! studies that exercise the limit laws at desk scale.
//!
//! Reproducibility contract: a study is a pure function of `(scenario,
//! config)`. Replication `r` draws its observations from RNG substream
//! `(seed, 1 + r)` and seeds its limit-law sampler from substream
//! `(seed, 2^63 + r)`, so parallel and serial runs agree exactly and no
//! replication shares a stream with another.

use crate::error::{Error, Result};
use crate::field::{DomainBox, ObservationSet};
use crate::inference::{
    self, ci_distance_normal, critical_value, ks_test, min_sq_distance, sample_chi2type_law,
    KsResult, LimitLawConfig, Target,
};
use crate::rng::SplitMix64;
use crate::tracker::{track_curve, track_reference, AnalyticField, TrackConfig};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Substream index for one-shot (non-replicated) sampling.
const ONE_SHOT_STREAM: u64 = 0;
/// Replication r samples observations from substream `1 + r`.
const OBS_STREAM_BASE: u64 = 1;
/// Replication r seeds its limit-law sampler from substream `2^63 + r`.
const TEST_STREAM_FLAG: u64 = 1 << 63;

/// The synthetic fields the studies know how to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Unit-speed counterclockwise rotation, `v = (-y, x)/|x|`; integral
    /// curves are circles around the origin.
    Circular,
    /// Constant field with the given direction vector.
    Constant(Vec<f64>),
    /// Two unit diagonal branches overlapping for `x₁ ≥ 0` (each sample
    /// flips a fair coin between them) and a single horizontal branch for
    /// `x₁ < 0`. Minimal crossing scenario for the branching statistic.
    Crossing,
}

/// A sampling design: field, box, sample count, noise level and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub field: FieldKind,
    pub domain: DomainBox,
    pub n: usize,
    pub noise_scale: f64,
    pub seed: u64,
}

/// The circular field at one point. Singular at the origin.
pub fn circular_field(x: &[f64]) -> Result<DVector<f64>> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == 0.0 {
        return Err(Error::InvalidConfig(
            "circular field is singular at the origin".into(),
        ));
    }
    Ok(DVector::from_vec(vec![-x[1] / r, x[0] / r]))
}

/// Jacobian of the circular field.
pub fn circular_field_jacobian(x: &[f64]) -> DMatrix<f64> {
    let (a, b) = (x[0], x[1]);
    let r3 = (a * a + b * b).powf(1.5);
    DMatrix::from_row_slice(2, 2, &[a * b / r3, -a * a / r3, b * b / r3, -a * b / r3])
}

/// Component Hessians of the circular field: `[H₁, H₂]` with
/// `H_l[(j,k)] = ∂²v_l/∂x_j∂x_k`.
pub fn circular_field_hessians(x: &[f64]) -> Vec<DMatrix<f64>> {
    let (a, b) = (x[0], x[1]);
    let r2 = a * a + b * b;
    let r3 = r2.powf(1.5);
    let r5 = r2.powf(2.5);
    let h1 = DMatrix::from_row_slice(
        2,
        2,
        &[
            b / r3 - 3.0 * a * a * b / r5,
            a / r3 - 3.0 * a * b * b / r5,
            a / r3 - 3.0 * a * b * b / r5,
            3.0 * a * a * b / r5,
        ],
    );
    let h2 = DMatrix::from_row_slice(
        2,
        2,
        &[
            -3.0 * a * b * b / r5,
            2.0 * b / r3 - 3.0 * b * b * b / r5,
            2.0 * b / r3 - 3.0 * b * b * b / r5,
            -a / r3 + 3.0 * a * b * b / r5,
        ],
    );
    vec![h1, h2]
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("scenario needs n >= 1".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidConfig("noise_scale must be >= 0".into()));
        }
        if let FieldKind::Constant(v) = &self.field {
            if v.len() != self.domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.domain.dim(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// True field value at a point; for [`FieldKind::Crossing`] the branch
    /// coin comes from the sampler, not from here.
    fn truth(&self, x: &[f64], rng: &mut SplitMix64) -> Result<Vec<f64>> {
        match &self.field {
            FieldKind::Circular => Ok(circular_field(x)?.iter().copied().collect()),
            FieldKind::Constant(v) => Ok(v.clone()),
            FieldKind::Crossing => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                if x[0] < 0.0 {
                    // Burn the coin anyway so noise draws stay aligned
                    // across the two half-planes.
                    let _ = rng.next_bool();
                    Ok(vec![1.0, 0.0])
                } else if rng.next_bool() {
                    Ok(vec![s, s])
                } else {
                    Ok(vec![s, -s])
                }
            }
        }
    }

    /// The analytic counterpart (field plus its derivatives and the true
    /// noise covariance) when one exists; the crossing mixture has none.
    pub fn analytic_field(&self) -> Option<AnalyticField> {
        let sigma = DMatrix::identity(self.domain.dim(), self.domain.dim())
            * (self.noise_scale * self.noise_scale);
        match &self.field {
            FieldKind::Circular => Some(AnalyticField {
                dim: 2,
                v: Arc::new(|x: &[f64]| {
                    circular_field(x)
                        .unwrap_or_else(|_| DVector::from_vec(vec![f64::NAN, f64::NAN]))
                }),
                v_prime: Arc::new(circular_field_jacobian),
                v_second: Arc::new(circular_field_hessians),
                sigma,
                domain: self.domain.clone(),
            }),
            FieldKind::Constant(v) => {
                let d = self.domain.dim();
                let vv = DVector::from_vec(v.clone());
                Some(AnalyticField {
                    dim: d,
                    v: Arc::new(move |_| vv.clone()),
                    v_prime: Arc::new(move |_| DMatrix::zeros(d, d)),
                    v_second: Arc::new(move |_| vec![DMatrix::zeros(d, d); d]),
                    sigma,
                    domain: self.domain.clone(),
                })
            }
            FieldKind::Crossing => None,
        }
    }
}

fn sample_with_stream(sc: &SyntheticScenario, stream: u64) -> Result<ObservationSet> {
    sc.validate()?;
    let d = sc.domain.dim();
    let mut rng = SplitMix64::substream(sc.seed, stream);
    let mut points = Vec::with_capacity(sc.n * d);
    let mut values = Vec::with_capacity(sc.n * d);
    let mut x = vec![0.0; d];
    for _ in 0..sc.n {
        for j in 0..d {
            x[j] = rng.uniform_in(sc.domain.lower[j], sc.domain.upper[j]);
        }
        let v = sc.truth(&x, &mut rng)?;
        points.extend_from_slice(&x);
        for vj in v {
            values.push(vj + sc.noise_scale * rng.standard_normal());
        }
    }
    ObservationSet::from_flat(sc.domain.clone(), points, values)
}

/// Draws `n` observations: positions uniform in the box,
/// `V_i = v(X_i) + noise_scale · ξ_i` with standard Gaussian ξ. Fully
/// determined by the scenario seed.
pub fn sample_observations(sc: &SyntheticScenario) -> Result<ObservationSet> {
    sample_with_stream(sc, ONE_SHOT_STREAM)
}

/// Observations for Monte Carlo replication `rep` (independent substream).
pub fn sample_observations_rep(sc: &SyntheticScenario, rep: u64) -> Result<ObservationSet> {
    sample_with_stream(sc, OBS_STREAM_BASE + rep)
}

/// Sampler seed for replication `rep`, disjoint from observation streams.
pub fn replication_law_seed(sc_seed: u64, rep: u64) -> u64 {
    SplitMix64::substream(sc_seed, TEST_STREAM_FLAG | rep).next_u64()
}

/// Binned counts over `[lo, hi]`, equal-width bins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(values: &[f64], bins: usize) -> Option<Histogram> {
        if values.is_empty() || bins == 0 {
            return None;
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return None;
        }
        let width = if hi > lo { hi - lo } else { 1.0 };
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = (((v - lo) / width) * bins as f64) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Some(Histogram { lo, hi, counts })
    }
}

/// Empirical and theoretical power at one target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetPower {
    pub target: Vec<f64>,
    pub d_true: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

/// Aggregated Monte Carlo output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub replications: usize,
    /// Per-replication statistics, in replication order.
    pub statistics: Vec<f64>,
    pub ks: Option<KsResult>,
    pub power: Option<Vec<TargetPower>>,
    pub histogram: Option<Histogram>,
}

/// Distribution study of the minimal squared distance.
///
/// Per replication: fresh observations, tracking, minimal distance, then
/// either the standardized statistic `√(nh^{d-1}) (D̂² - D²) / σ̂` (the
/// bias term is dropped, matching how the normal approximation is used) or
/// the raw `nh^{d-1} D̂²` when `standardize` is false (the χ²-type case).
/// Standardized statistics are KS-tested against the standard normal.
pub fn mc_distance_study(
    sc: &SyntheticScenario,
    track_cfg: &TrackConfig,
    target: &Target,
    d2_true: f64,
    replications: usize,
    standardize: bool,
) -> Result<StudyResult> {
    if replications < 100 {
        return Err(Error::InvalidConfig(
            "distance study needs at least 100 replications".into(),
        ));
    }
    let n = sc.n;
    let h = track_cfg.bandwidth.h;
    let statistics: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let obs = sample_observations_rep(sc, rep as u64)?;
            let traj = track_curve(&obs, track_cfg)?;
            if standardize {
                let ci = ci_distance_normal(&traj, target, d2_true, 0.05, n, h, 0.0)?;
                ci.z.ok_or(Error::Unsupported(
                    "degenerate variance in a study replication",
                ))
            } else {
                let d = traj.dim();
                let (d2, _) = min_sq_distance(&traj, target)?;
                Ok(n as f64 * h.powi(d as i32 - 1) * d2)
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let ks = if standardize {
        let mut sorted = statistics.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Some(ks_test(&sorted)?)
    } else {
        None
    };
    let histogram = Histogram::build(&statistics, 40);
    Ok(StudyResult {
        replications,
        statistics,
        ks,
        power: None,
        histogram,
    })
}

/// Empirical power of the point-reach test over a list of targets, paired
/// with the theoretical curve evaluated on the reference (oracle) run.
///
/// Within a replication, targets sharing an argmin state reuse one sampled
/// limit law. The on-curve target (D = 0) gets `alpha` as its theoretical
/// power, the boundary value of the alternative-regime formula.
pub fn mc_power_study(
    sc: &SyntheticScenario,
    track_cfg: &TrackConfig,
    targets: &[DVector<f64>],
    alpha: f64,
    replications: usize,
    law: &LimitLawConfig,
) -> Result<StudyResult> {
    if replications < 100 {
        return Err(Error::InvalidConfig(
            "power study needs at least 100 replications".into(),
        ));
    }
    if targets.is_empty() {
        return Err(Error::InvalidConfig("power study needs targets".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let n = sc.n;
    let h = track_cfg.bandwidth.h;

    // Oracle side: reference run for D, Λ_α and the plug-in power inputs.
    let field = sc.analytic_field().ok_or(Error::Unsupported(
        "power study needs a field with an analytic reference",
    ))?;
    let reference = track_reference(&field, track_cfg)?;
    let dim = reference.dim();
    let mut theoretical = Vec::with_capacity(targets.len());
    let mut d_true = Vec::with_capacity(targets.len());
    {
        let mut cache: std::collections::HashMap<usize, Vec<f64>> = Default::default();
        for a in targets {
            let (d2, k_hat) = min_sq_distance(&reference, &Target::Point(a.clone()))?;
            let s = &reference.states[k_hat];
            let samples = match cache.entry(k_hat) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => e.insert(sample_chi2type_law(
                    &s.m_hat,
                    &s.c_hat,
                    &s.v_hat,
                    &LimitLawConfig {
                        seed: law.seed,
                        ..*law
                    },
                )?),
            };
            let lambda_alpha = critical_value(samples, alpha);
            let d = d2.sqrt();
            d_true.push(d);
            // Distances below the reference grid resolution are the null
            // case; the alternative-regime formula degenerates there and
            // alpha is the boundary value.
            let null_tol = 2.0 * track_cfg.delta;
            if d > null_tol {
                let diff = &s.x_hat - a;
                let normal = if diff.norm() > 0.0 {
                    &diff / diff.norm()
                } else {
                    DVector::zeros(dim)
                };
                theoretical.push(inference::power_theoretical(
                    d,
                    lambda_alpha,
                    n,
                    h,
                    dim,
                    law.beta,
                    &s.m_hat,
                    &s.c_hat,
                    &normal,
                )?);
            } else {
                theoretical.push(alpha);
            }
        }
    }

    // Empirical side.
    let rejects: Vec<Vec<bool>> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<bool>> {
            let obs = sample_observations_rep(sc, rep as u64)?;
            let traj = track_curve(&obs, track_cfg)?;
            let cfg = LimitLawConfig {
                seed: replication_law_seed(sc.seed, rep as u64),
                ..*law
            };
            let mut cache: std::collections::HashMap<usize, Vec<f64>> = Default::default();
            let mut out = Vec::with_capacity(targets.len());
            for a in targets {
                let (d2, k_hat) = min_sq_distance(&traj, &Target::Point(a.clone()))?;
                let s = &traj.states[k_hat];
                let samples = match cache.entry(k_hat) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => e.insert(
                        sample_chi2type_law(&s.m_hat, &s.c_hat, &s.v_hat, &cfg)?,
                    ),
                };
                let lambda_hat = n as f64 * h.powi(dim as i32 - 1) * d2;
                out.push(lambda_hat >= critical_value(samples, alpha));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let power: Vec<TargetPower> = targets
        .iter()
        .enumerate()
        .map(|(i, a)| TargetPower {
            target: a.iter().copied().collect(),
            d_true: d_true[i],
            empirical: rejects.iter().filter(|r| r[i]).count() as f64 / replications as f64,
            theoretical: theoretical[i],
        })
        .collect();

    Ok(StudyResult {
        replications,
        statistics: Vec::new(),
        ks: None,
        power: Some(power),
        histogram: None,
    })
}
