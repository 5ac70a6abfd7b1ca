use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Model, RandomFieldParams, XYParams};
use crate::numerics::Numerics;
use crate::splitspec::SplitOperatorSpec;
use crate::timedomain::RFSimConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Coefficients,
    FieldSweep,
    Scaling,
    DisorderSweep,
    RfCheck,
}

fn one() -> f64 {
    1.0
}

/// Model family and fixed couplings. The swept field (`h` or `H`) comes from
/// the field grid when one is given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Xy {
        #[serde(rename = "J", default = "one")]
        j: f64,
        #[serde(default)]
        alpha: f64,
        #[serde(default)]
        h: f64,
    },
    RandomField {
        #[serde(rename = "J", default = "one")]
        j: f64,
        #[serde(rename = "H", default)]
        disorder: f64,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Xy { .. } => "xy",
            ModelSpec::RandomField { .. } => "random_field",
        }
    }

    pub fn coupling(&self) -> f64 {
        match *self {
            ModelSpec::Xy { j, .. } | ModelSpec::RandomField { j, .. } => j,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ModelSpec::Xy { alpha, .. } => Some(alpha),
            ModelSpec::RandomField { .. } => None,
        }
    }

    pub fn default_field(&self) -> f64 {
        match *self {
            ModelSpec::Xy { h, .. } => h,
            ModelSpec::RandomField { disorder, .. } => disorder,
        }
    }

    /// Concrete model at chain length `len` and field `field`.
    pub fn at(&self, len: usize, field: f64, seed: u64, realization: u64) -> Model {
        match *self {
            ModelSpec::Xy { j, alpha, .. } => Model::Xy(XYParams { len, j, alpha, h: field }),
            ModelSpec::RandomField { j, .. } => {
                Model::RandomField(RandomFieldParams { len, j, disorder: field, seed, realization })
            }
        }
    }
}

/// Either an explicit list or `start..=stop` in steps of `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(Error::Config(format!("bad grid {start}..={stop} step {step}")));
                }
                // Points are start + k·step, rounded to 12 decimals so that
                // e.g. 0.1 + 10·0.05 prints as 0.6.
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
            }
        };
        if pts.is_empty() || pts.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid must be non-empty and finite".into()));
        }
        Ok(pts)
    }
}

/// Which eigenstate(s) of each Hamiltonian to analyze.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StateLabel {
    Ground,
    /// States closest to the middle of the spectrum.
    Mid,
    /// Eigenstate by index in ascending energy order.
    Index(usize),
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateLabel::Ground => f.write_str("gs"),
            StateLabel::Mid => f.write_str("mid"),
            StateLabel::Index(k) => write!(f, "e{k}"),
        }
    }
}

impl std::str::FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gs" => Ok(StateLabel::Ground),
            "mid" => Ok(StateLabel::Mid),
            _ => s
                .strip_prefix('e')
                .and_then(|k| k.parse().ok())
                .map(StateLabel::Index)
                .ok_or_else(|| Error::Config(format!("unknown state label {s:?}; use gs, mid or e<index>"))),
        }
    }
}

impl TryFrom<String> for StateLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateLabel> for String {
    fn from(l: StateLabel) -> Self {
        l.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_realizations: u64,
    /// States per realization nearest the window center; all window states
    /// when absent.
    pub n_states_per_realization: Option<usize>,
    pub energy_window: [f64; 2],
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_realizations: 20, n_states_per_realization: None, energy_window: [0.45, 0.55] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// A series is called constant when neither fit grows faster than this
    /// many nats per e-fold of L. The default is half the smallest critical
    /// prefactor c/6 at c = 1/2.
    pub area_law_slope: f64,
    /// Number of eigenstates nearest the spectrum center averaged for `mid`.
    pub mid_states: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { area_law_slope: 1.0 / 24.0, mid_states: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfCheckConfig {
    pub drive: RFSimConfig,
    /// Drive frequencies; defaults to the split peaks ± `margin` at `step`.
    pub freqs: Option<Grid>,
    pub step: f64,
    pub margin: f64,
}

impl Default for RfCheckConfig {
    fn default() -> Self {
        Self { drive: RFSimConfig::default(), freqs: None, step: 0.005, margin: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: ModelSpec,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Values of `h` (XY) or `H` (random field); the model's own value when absent.
    #[serde(default)]
    pub fields: Option<Grid>,
    #[serde(default = "default_states")]
    pub states: Vec<StateLabel>,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub split: SplitOperatorSpec,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub rf: RfCheckConfig,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Adds a wall-time column, which makes reruns differ.
    #[serde(default)]
    pub timings: bool,
}

fn default_sizes() -> Vec<usize> {
    vec![5, 7, 9, 11]
}

fn default_states() -> Vec<StateLabel> {
    vec![StateLabel::Ground]
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, model: ModelSpec) -> Self {
        Self {
            scenario,
            model,
            sizes: default_sizes(),
            fields: None,
            states: default_states(),
            ensemble: EnsembleConfig::default(),
            numerics: Numerics::default(),
            split: SplitOperatorSpec::default(),
            scaling: ScalingConfig::default(),
            rf: RfCheckConfig::default(),
            seed: 0,
            threads: None,
            output: None,
            timings: false,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn field_points(&self) -> Result<Vec<f64>> {
        match &self.fields {
            Some(g) => g.points(),
            None => Ok(vec![self.model.default_field()]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must be non-empty".into()));
        }
        if let Some(&l) = self.sizes.iter().find(|&&l| l < 3) {
            return Err(Error::Config(format!("chain length {l} is too short for an A|M|B split")));
        }
        if self.states.is_empty() {
            return Err(Error::Config("states must be non-empty".into()));
        }
        self.field_points()?;
        self.split.validate()?;
        if self.ensemble.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be at least 1".into()));
        }
        let [lo, hi] = self.ensemble.energy_window;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!("energy window [{lo}, {hi}] must lie in [0, 1]")));
        }
        if self.scaling.mid_states == 0 {
            return Err(Error::Config("mid_states must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        match (self.scenario, &self.model) {
            (Scenario::FieldSweep, ModelSpec::RandomField { .. }) => {
                Err(Error::Config("field_sweep needs the xy model".into()))
            }
            (Scenario::DisorderSweep, ModelSpec::Xy { .. }) => {
                Err(Error::Config("disorder_sweep needs the random_field model".into()))
            }
            (Scenario::Scaling, _) if self.sizes.len() < 4 => {
                Err(Error::Config("scaling fits need at least 4 sizes".into()))
            }
            (Scenario::RfCheck, _) if self.sizes.iter().any(|&l| l > 6) => {
                Err(Error::Config("rf_check is limited to L <= 6".into()))
            }
            _ => Ok(()),
        }
    }
}
