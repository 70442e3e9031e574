//! Run configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pnex::fields::{DataDescription, DataSpec};
use pnex::solvers::{GraphSolveOptions, JangConfig};
use pnex::spectrum::EigenOptions;
use pnex::surfaces::{Orientation, Surface};
use pnex::{Conventions, InitialDataSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Spherical,
    Graph,
    Jang,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecCheckParams {
    /// The check passes when the minimum margin is at least `−tolerance`.
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalParams {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Radial interval; defaults to the shell chart's interval.
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
}

fn default_nodes() -> usize {
    pnex::spherical::DEFAULT_NODES
}

impl Default for SphericalParams {
    fn default() -> Self {
        Self { nodes: default_nodes(), r_min: None, r_max: None }
    }
}

/// Heights of the inner and outer boundary of a barrier shell.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierShell {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindPneParams {
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub orientation: Orientation,
    /// Starting surface for the graph solver.
    #[serde(default)]
    pub initial: Option<Surface>,
    /// Constant starting height (radius on shells) when `initial` is absent.
    #[serde(default)]
    pub initial_height: Option<f64>,
    #[serde(default)]
    pub graph: GraphSolveOptions,
    #[serde(default)]
    pub spherical: SphericalParams,
    #[serde(default)]
    pub jang: JangConfig,
    /// Polish a Jang blow-up locus with the graph solver.
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default)]
    pub barrier: Option<BarrierShell>,
}

fn yes() -> bool {
    true
}

impl Default for FindPneParams {
    fn default() -> Self {
        Self {
            method: None,
            orientation: Orientation::Positive,
            initial: None,
            initial_height: None,
            graph: GraphSolveOptions::default(),
            spherical: SphericalParams::default(),
            jang: JangConfig::default(),
            refine: true,
            barrier: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityParams {
    /// Stability tolerance on `λ₁`; defaults to ten times the eigen residual.
    pub tolerance: Option<f64>,
    pub eigen: EigenOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Data-set preset or custom tables, with a `chart` entry.
    pub data: serde_json::Value,
    /// Overrides the seed of perturbation presets.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub conventions: Conventions,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub dec_check: DecCheckParams,
    #[serde(default)]
    pub find_pne: FindPneParams,
    #[serde(default)]
    pub stability: StabilityParams,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        self.description()?.chart.build()?;
        self.find_pne.jang.validate()?;
        if let Some(b) = self.find_pne.barrier {
            if !(b.inner < b.outer) {
                bail!("barrier shell needs inner < outer");
            }
        }
        if !(self.dec_check.tolerance >= 0.0) {
            bail!("dec_check.tolerance must be nonnegative");
        }
        Ok(())
    }

    pub fn description(&self) -> Result<DataDescription> {
        let mut d = DataDescription::from_value(&self.data).context("invalid data description")?;
        if let (Some(s), DataSpec::PolynomialPerturbation { seed, .. }) = (self.seed, &mut d.spec) {
            *seed = s;
        }
        Ok(d)
    }

    pub fn build(&self) -> Result<InitialDataSet> {
        Ok(self.description()?.build(self.conventions)?)
    }
}
