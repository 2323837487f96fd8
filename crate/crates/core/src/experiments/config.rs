//! TOML run configuration: constants, region rule, grids and output paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clr::BoundConstants;
use crate::error::{invalid, Result};
use crate::geometry::{profile_c1, RegionSpec, DEFAULT_DELTA, DEFAULT_KAPPA};
use crate::operators::PotentialRule;

/// How the region scale `M` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// `M = (c1 + c2 + lambda)^(2/3)`.
    Lambda,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub kappa: f64,
    pub delta: f64,
    pub m_rule: MRule,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_KAPPA,
            delta: DEFAULT_DELTA,
            m_rule: MRule::Lambda,
        }
    }
}

impl GeometryConfig {
    pub fn region_spec(&self, lambda: f64) -> Result<RegionSpec> {
        match self.m_rule {
            MRule::Lambda => RegionSpec::for_lambda(lambda, profile_c1(self.kappa)?, self.kappa, self.delta),
            MRule::Fixed(m) => RegionSpec::new(m, self.kappa, self.delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Box half-widths `L`.
    pub boxes: Vec<f64>,
    pub ts: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub h: f64,
    /// Potential rule for the supersymmetric counts.
    pub potential: PotentialRule,
    /// Potential rule for the bosonic counts.
    pub bosonic_potential: PotentialRule,
    /// Fiber grid spacing bound.
    pub fiber_h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 3.0],
            lambdas: vec![1.0],
            boxes: vec![10.0, 20.0],
            ts: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            epsilons: (0..8).rev().map(|k| 2f64.powi(-k)).collect(),
            h: 0.1,
            potential: PotentialRule::ValleyAdapted,
            bosonic_potential: PotentialRule::Nodal,
            fiber_h: crate::fiber::H_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// JSON-lines results file, relative to `dir` unless absolute.
    pub results: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            results: PathBuf::from("results.jsonl"),
        }
    }
}

impl OutputConfig {
    pub fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.dir.join(name)
    }

    pub fn results_path(&self) -> PathBuf {
        self.path(&self.results)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub constants: BoundConstants,
    pub geometry: GeometryConfig,
    pub grids: GridConfig,
    pub output: OutputConfig,
    /// Worker threads for sweeps; 0 means all cores.
    pub workers: usize,
}

impl Config {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        RegionSpec::new(1.0, self.geometry.kappa, self.geometry.delta)?;
        if let MRule::Fixed(m) = self.geometry.m_rule {
            if !(m > 0.0) {
                return Err(invalid("m_rule", "fixed M must be positive"));
            }
        }
        if !(self.grids.h > 0.0 && self.grids.fiber_h > 0.0) {
            return Err(invalid("h", "grid spacings must be positive"));
        }
        Ok(())
    }
}
