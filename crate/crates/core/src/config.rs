//! Scenario files: TOML with fixed sections. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//!
//! [chart]
//! n = 2
//! resolution = 64
//! period = 1.0
//! active_axes = [0, 2]
//!
//! [metric]
//! kind = "random"
//! amplitude = 0.12
//!
//! [flow]
//! t0 = 5.0
//! t_end = 5.0
//! mode = "unnormalized"
//!
//! [monitors]
//! schwarz = true
//! ```

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elliptic::Normalization;
use crate::flow::{ConvergenceControl, FlowMode, StepControl};
use crate::geometry::{ChartRef, GeometryError, MetricField, ScalarField, TorusChart};
use crate::model::{random_potential, ModelError, RandomRecipeOptions, TorusMetricRecipe};
use crate::surface::SurfaceClassData;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn one() -> f64 {
    1.0
}

/// Grid: `resolution` points per active axis, all periods equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub n: usize,
    pub resolution: usize,
    #[serde(default = "one")]
    pub period: f64,
    /// Defaults to the real part of every coordinate, `[0, 2, ..]`.
    #[serde(default)]
    pub active_axes: Option<Vec<usize>>,
}

impl ChartSpec {
    /// `torus1`, `torus2`, `torus3`: real parts of each coordinate active.
    pub fn preset(name: &str, resolution: usize) -> Result<Self, ConfigError> {
        let n = match name {
            "torus1" => 1,
            "torus2" => 2,
            "torus3" => 3,
            _ => return Err(ConfigError::Invalid(format!("unknown chart preset `{name}` (torus1, torus2, torus3)"))),
        };
        Ok(ChartSpec { n, resolution, period: 1.0, active_axes: None })
    }

    pub fn axes(&self) -> Vec<usize> {
        self.active_axes.clone().unwrap_or_else(|| (0..self.n).map(|k| 2 * k).collect())
    }

    pub fn build(&self) -> Result<ChartRef, ConfigError> {
        Ok(TorusChart::uniform(self.n, self.resolution, self.period, self.axes())?)
    }
}

/// Initial metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat {},
    Recipe {
        #[serde(flatten)]
        recipe: TorusMetricRecipe,
    },
    /// Seeded random recipe; `seed` falls back to the scenario seed.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        kahler: bool,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_wave")]
        max_wave: i32,
    },
    /// `exp(amplitude sin(2 pi <wave, x> / L)) * identity`.
    Conformal { amplitude: f64, wave: Vec<i32> },
}

fn default_amplitude() -> f64 {
    0.12
}

fn default_modes() -> usize {
    4
}

fn default_wave() -> i32 {
    2
}

impl MetricSpec {
    pub fn build(&self, chart: &ChartRef, scenario_seed: u64) -> Result<MetricField, ConfigError> {
        let n = chart.complex_dim();
        match self {
            MetricSpec::Flat {} => Ok(TorusMetricRecipe::flat(n).build(chart)?),
            MetricSpec::Recipe { recipe } => Ok(recipe.build(chart)?),
            MetricSpec::Random { seed, kahler, amplitude, modes, max_wave } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(scenario_seed));
                let opts = RandomRecipeOptions { kahler: *kahler, amplitude: *amplitude, modes: *modes, max_wave: *max_wave };
                Ok(TorusMetricRecipe::random(chart, &mut rng, opts).build(chart)?)
            }
            MetricSpec::Conformal { amplitude, wave } => {
                if wave.len() != 2 * n {
                    return Err(ConfigError::Invalid(format!("conformal wave needs {} entries", 2 * n)));
                }
                let u = ScalarField::from_fn(chart.clone(), |x| {
                    let ang: f64 = wave
                        .iter()
                        .zip(x.iter().zip(chart.periods()))
                        .map(|(&w, (&xa, &l))| 2.0 * PI * w as f64 * xa / l)
                        .sum();
                    (amplitude * ang.sin()).exp()
                })?;
                Ok(MetricField::identity(chart.clone()).scale_by(&u)?)
            }
        }
    }
}

/// Real function on the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {},
    Constant { value: f64 },
    /// Band-limited random sum of cosines with Hessian size about `amplitude`.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_modes")]
        modes: usize,
        amplitude: f64,
        #[serde(default = "default_wave")]
        max_wave: i32,
    },
}

impl PotentialSpec {
    pub fn build(&self, chart: &ChartRef, scenario_seed: u64) -> ScalarField {
        match self {
            PotentialSpec::Zero {} => ScalarField::zeros(chart.clone()),
            PotentialSpec::Constant { value } => ScalarField::constant(chart.clone(), *value),
            PotentialSpec::Random { seed, modes, amplitude, max_wave } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(scenario_seed));
                random_potential(chart, &mut rng, *modes, *amplitude, *max_wave)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSpec {
    #[default]
    Volume,
    Acknowledged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_mode")]
    pub mode: FlowMode,
    /// Normalized runs only.
    #[serde(default)]
    pub reference: ReferenceSpec,
    /// `f_T0`; derived from `Ric(omega0)` when absent.
    #[serde(default)]
    pub f: Option<PotentialSpec>,
    #[serde(default)]
    pub step: StepControl,
    #[serde(default)]
    pub convergence: ConvergenceControl,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn default_mode() -> FlowMode {
    FlowMode::Unnormalized
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSpec {
    pub schwarz: bool,
    pub checkpoint_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticSpec {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub normalization: Normalization,
    /// Right-hand side `F`; exclusive with `manufactured`.
    #[serde(default)]
    pub f: Option<PotentialSpec>,
    /// Exact solution `phi*` from which `F` is manufactured.
    #[serde(default)]
    pub manufactured: Option<PotentialSpec>,
    #[serde(default = "default_a_grid")]
    pub a_grid: Vec<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_method() -> String {
    "newton-continuation".into()
}

fn default_a_grid() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { csv: default_csv() }
    }
}

fn default_csv() -> String {
    "trajectory.csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub flow: Option<FlowSpec>,
    #[serde(default)]
    pub monitors: MonitorSpec,
    #[serde(default)]
    pub elliptic: Option<EllipticSpec>,
    #[serde(default)]
    pub surface: Option<SurfaceClassData>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn chart(&self) -> Result<ChartRef, ConfigError> {
        self.chart
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [chart] section".into()))?
            .build()
    }

    /// Initial metric on the scenario chart (flat if `[metric]` is absent).
    pub fn metric(&self, chart: &ChartRef) -> Result<MetricField, ConfigError> {
        self.metric.as_ref().unwrap_or(&MetricSpec::Flat {}).build(chart, self.seed)
    }
}
