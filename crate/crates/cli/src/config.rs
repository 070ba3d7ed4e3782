//! Scenario files: one JSON document drives every subcommand.
//!
//! ```json
//! {
//!   "field": "circular",
//!   "domain": { "lower": [-1.6, -1.6], "upper": [1.6, 1.6] },
//!   "n": 322,
//!   "noise_scale": 0.5,
//!   "seed": 7,
//!   "track": { "x0": [1.0, 0.0], "T": 3.1416, "delta": 0.02,
//!              "h": 0.85, "h_tilde": 1.2, "beta": 142.86 },
//!   "target": { "point": [0.0, 2.0] },
//!   "alpha": 0.05,
//!   "replications": 2000
//! }
//! ```
//!
//! Only the keys a subcommand needs have to be present; `data` may point at
//! an observation CSV to reuse instead of sampling from the seed.

use anyhow::{bail, Context};
use fieldtrack_core::field::{DomainBox, EstimatorConfig};
use fieldtrack_core::inference::Target;
use fieldtrack_core::sim::{FieldKind, SyntheticScenario};
use fieldtrack_core::tracker::TrackConfig;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub field: FieldKind,
    pub domain: BoxSpec,
    pub n: usize,
    pub noise_scale: f64,
    pub seed: u64,
    /// Optional observation CSV to consume instead of sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<TrackSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Distance studies: standardized statistic (true) or raw nh^{d-1} D̂².
    #[serde(default = "default_true")]
    pub standardize: bool,
    /// Null value of D² for standardized studies and confidence intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2_null: Option<f64>,
    /// Power-curve target list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Vec<f64>>>,
    /// p-value map grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Emit a confidence ellipse every this many states in SVG output.
    #[serde(default = "default_ellipse_every")]
    pub ellipse_every: usize,
}

fn default_alpha() -> f64 {
    0.05
}
fn default_draws() -> usize {
    200_000
}
fn default_true() -> bool {
    true
}
fn default_ellipse_every() -> usize {
    25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackSpec {
    pub x0: Vec<f64>,
    #[serde(rename = "T")]
    pub t_horizon: f64,
    pub delta: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_tilde: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_speed_floor")]
    pub speed_floor: f64,
}

fn default_speed_floor() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Point(Vec<f64>),
    Sphere { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub steps: Vec<usize>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> anyhow::Result<ScenarioFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let sc: ScenarioFile = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(sc)
    }

    pub fn domain(&self) -> anyhow::Result<DomainBox> {
        Ok(DomainBox::new(
            self.domain.lower.clone(),
            self.domain.upper.clone(),
        )?)
    }

    pub fn scenario(&self, seed_override: Option<u64>) -> anyhow::Result<SyntheticScenario> {
        Ok(SyntheticScenario {
            field: self.field.clone(),
            domain: self.domain()?,
            n: self.n,
            noise_scale: self.noise_scale,
            seed: seed_override.unwrap_or(self.seed),
        })
    }

    pub fn track_config(&self) -> anyhow::Result<TrackConfig> {
        let spec = match &self.track {
            Some(t) => t,
            None => bail!("this command needs a `track` section in the config"),
        };
        let bandwidth =
            EstimatorConfig::new(spec.h, spec.h_tilde.unwrap_or(spec.h), spec.beta)?;
        Ok(TrackConfig {
            x0: DVector::from_vec(spec.x0.clone()),
            t_horizon: spec.t_horizon,
            delta: spec.delta,
            speed_floor: spec.speed_floor,
            sample_size_n: self.n,
            bandwidth,
        })
    }

    pub fn target(&self) -> anyhow::Result<Target> {
        match &self.target {
            Some(TargetSpec::Point(a)) => Ok(Target::point(a.clone())),
            Some(TargetSpec::Sphere { center, radius }) => {
                Ok(Target::sphere(center.clone(), *radius)?)
            }
            None => bail!("this command needs a `target` in the config"),
        }
    }

    /// Grid points in row-major order plus the step counts.
    pub fn grid_points(&self) -> anyhow::Result<(Vec<DVector<f64>>, Vec<usize>)> {
        let g = match &self.grid {
            Some(g) => g,
            None => bail!("this command needs a `grid` in the config"),
        };
        let d = g.lower.len();
        if g.upper.len() != d || g.steps.len() != d || d == 0 {
            bail!("grid lower/upper/steps must share one dimension");
        }
        if g.steps.iter().any(|&s| s < 2) {
            bail!("grid needs at least 2 steps per axis");
        }
        let mut points = Vec::new();
        let total: usize = g.steps.iter().product();
        for flat in 0..total {
            let mut idx = flat;
            let mut coords = vec![0.0; d];
            for axis in (0..d).rev() {
                let i = idx % g.steps[axis];
                idx /= g.steps[axis];
                coords[axis] = g.lower[axis]
                    + (g.upper[axis] - g.lower[axis]) * i as f64 / (g.steps[axis] - 1) as f64;
            }
            points.push(DVector::from_vec(coords));
        }
        Ok((points, g.steps.clone()))
    }
}
