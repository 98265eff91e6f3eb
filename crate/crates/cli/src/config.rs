//! Experiment configuration, read from TOML.

use std::path::Path;

use quantbound::models::Prior;
use quantbound::quantize::default_grid_half_range;
use quantbound::risk::LossKind;
use quantbound::{
    Estimator, GaussianLocation, GridQuantizer, LaplaceLocation, LossOrder, ParameterSpace, ParametricModel,
    QuantizedMleEstimator, RaisedCosine, SignInversionEstimator, SignQuantizer,
};
use serde::Deserialize;

/// Rejected configuration; maps to exit status 3.
#[derive(Debug, thiserror::Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Laplace,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    /// σ for Gaussian, `b` for Laplace.
    pub scale: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub dim: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    #[default]
    RaisedCosine,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    #[serde(default)]
    pub family: PriorFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    Sign,
    Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSection {
    pub kind: QuantizerKind,
    /// Grid half-range `L`; defaults to `B + 3·scale`.
    pub half_range: Option<f64>,
    /// Sign threshold.
    #[serde(default)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    SignInversion,
    QuantizedMle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossName {
    Lp,
    Wasserstein,
}

impl From<LossName> for LossKind {
    fn from(l: LossName) -> Self {
        match l {
            LossName::Lp => LossKind::Lp,
            LossName::Wasserstein => LossKind::Wasserstein,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub kinds: Vec<LossName>,
    pub orders: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n: Vec<usize>,
    pub k: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub trials: usize,
    pub master_seed: u64,
    /// Explicit grid; the default grid is used when absent.
    pub theta_grid: Option<Vec<Vec<f64>>>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczSection {
    pub r: f64,
    pub grid_resolution: usize,
    pub directions: usize,
}

impl Default for OrliczSection {
    fn default() -> Self {
        Self { r: 2.0, grid_resolution: 21, directions: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Records,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub space: SpaceSection,
    #[serde(default)]
    pub prior: PriorSection,
    pub quantizer: QuantizerSection,
    /// Defaults to the estimator matching the quantizer.
    pub estimator: Option<EstimatorKind>,
    pub loss: LossSection,
    pub sweep: SweepSection,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub orlicz: OrliczSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sweep.n.is_empty() || self.sweep.k.is_empty() {
            return Err(bad("sweep lists n and k must be nonempty"));
        }
        if self.sweep.n.contains(&0) {
            return Err(bad("n must be at least 1"));
        }
        if self.loss.kinds.is_empty() || self.loss.orders.is_empty() {
            return Err(bad("loss kinds and orders must be nonempty"));
        }
        for &p in &self.loss.orders {
            LossOrder::new(p).map_err(|e| bad(e.to_string()))?;
        }
        if self.simulation.trials == 0 {
            return Err(bad("trials must be at least 1"));
        }
        if self.simulation.jobs == Some(0) {
            return Err(bad("jobs must be at least 1"));
        }
        if self.orlicz.r.is_nan() || self.orlicz.r < 1.0 || self.orlicz.grid_resolution == 0 {
            return Err(bad("orlicz.r must be >= 1 and grid_resolution >= 1"));
        }
        let space = self.parameter_space()?;
        self.model()?;
        for &k in &self.sweep.k {
            self.estimator(k)?;
        }
        if let Some(grid) = &self.simulation.theta_grid {
            if grid.is_empty() {
                return Err(bad("theta_grid must be nonempty"));
            }
            for t in grid {
                space.check(t).map_err(|e| bad(format!("theta_grid point {t:?}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn parameter_space(&self) -> Result<ParameterSpace, ConfigError> {
        ParameterSpace::new(self.space.dim, self.space.half_width).map_err(|e| bad(e.to_string()))
    }

    pub fn model(&self) -> Result<Box<dyn ParametricModel>, ConfigError> {
        let space = self.parameter_space()?;
        let s = self.model.scale;
        let m: Box<dyn ParametricModel> = match self.model.family {
            Family::Gaussian => Box::new(GaussianLocation::new(s, space).map_err(|e| bad(e.to_string()))?),
            Family::Laplace => Box::new(LaplaceLocation::new(s, space).map_err(|e| bad(e.to_string()))?),
        };
        Ok(m)
    }

    pub fn prior(&self) -> Result<Box<dyn Prior>, ConfigError> {
        let space = self.parameter_space()?;
        Ok(match self.prior.family {
            PriorFamily::RaisedCosine => Box::new(RaisedCosine::new(space)),
        })
    }

    pub fn estimator_kind(&self) -> EstimatorKind {
        self.estimator.unwrap_or(match self.quantizer.kind {
            QuantizerKind::Sign => EstimatorKind::SignInversion,
            QuantizerKind::Grid => EstimatorKind::QuantizedMle,
        })
    }

    /// The estimator (and the quantizer it owns) for `k` bits.
    pub fn estimator(&self, k: u32) -> Result<Box<dyn Estimator>, ConfigError> {
        let d = self.space.dim;
        let e = |err: quantbound::Error| bad(err.to_string());
        match (self.quantizer.kind, self.estimator_kind()) {
            (QuantizerKind::Sign, EstimatorKind::SignInversion) => Ok(Box::new(SignInversionEstimator::new(
                SignQuantizer::with_threshold(k, d, self.quantizer.threshold).map_err(e)?,
            ))),
            (QuantizerKind::Grid, EstimatorKind::QuantizedMle) => {
                let l = self
                    .quantizer
                    .half_range
                    .unwrap_or_else(|| default_grid_half_range(self.space.half_width, self.model.scale));
                Ok(Box::new(QuantizedMleEstimator::new(GridQuantizer::new(k, d, l).map_err(e)?)))
            }
            (q, est) => Err(bad(format!("estimator {est:?} cannot decode a {q:?} quantizer"))),
        }
    }

    pub fn orders(&self) -> Vec<LossOrder> {
        self.loss.orders.iter().map(|&p| LossOrder::new(p).expect("validated")).collect()
    }

    pub fn losses(&self) -> Vec<LossKind> {
        self.loss.kinds.iter().map(|&l| l.into()).collect()
    }
}
