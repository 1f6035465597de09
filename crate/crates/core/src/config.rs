//! TOML run configuration shared by every CLI subcommand.
//!
//! ```toml
//! [problem]
//! n = 1
//! s = 0.45
//! p = 2.5
//!
//! [grid]
//! m = 2048
//! l = 60.0
//!
//! [system_grid]
//! m = 65536
//! l = 3000.0
//!
//! [system]
//! mu1 = 1.0
//! mu2 = 2.0
//! beta = 0.2
//! a1 = 1.0
//! a2 = 1.2
//!
//! [rayleigh]
//! seed = 7
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupled::{ContinuationOpts, RayleighOpts};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::FieldFormat;
use crate::params::{ProblemParams, SystemParams};
use crate::scalar::SolverOpts;

/// Environment variable overriding the output directory of the configuration
/// (the `--out` flag still wins).
pub const OUT_DIR_ENV: &str = "FRACNLS_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemParams,
    pub grid: GridSection,
    #[serde(default)]
    pub system: Option<SystemSection>,
    /// Grid of the coupled solvers; `[grid]` when absent. `[grid]` always
    /// carries the scalar ground state.
    #[serde(default)]
    pub system_grid: Option<GridSection>,
    #[serde(default)]
    pub solver: SolverOpts,
    #[serde(default)]
    pub rayleigh: RayleighOpts,
    #[serde(default)]
    pub continuation: ContinuationOpts,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// `M` samples per axis on a box of side `L`; the dimension comes from `[problem]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
    pub l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `(a, mu)` lattice tabulated by the `constants` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub a: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { a: vec![0.7, 1.0, 1.3], mu: vec![0.5, 1.0, 2.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub beta_min: f64,
    pub beta_max: f64,
    pub samples: usize,
    /// Solve the system at every sample instead of only classifying it.
    pub solve: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { beta_min: 0.0, beta_max: 4.0, samples: 41, solve: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Defaults to half the admissible gap.
    pub epsilon: Option<f64>,
    pub resolution: usize,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self { epsilon: None, resolution: 41 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: FieldFormat,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a file. A missing or unreadable file is an I/O error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.grid()?;
        self.system_grid()?;
        if let Some(sys) = &self.system {
            self.system_params_from(sys)?;
        }
        if self.sweep.samples < 2 || !(self.sweep.beta_max > self.sweep.beta_min) {
            return Err(Error::Config("sweep needs samples >= 2 and beta_max > beta_min".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.problem.n, self.grid.m, self.grid.l)
    }

    pub fn system_grid(&self) -> Result<Grid> {
        let g = self.system_grid.unwrap_or(self.grid);
        Grid::new(self.problem.n, g.m, g.l)
    }

    fn system_params_from(&self, s: &SystemSection) -> Result<SystemParams> {
        SystemParams::new(self.problem, s.mu1, s.mu2, s.beta, s.a1, s.a2)
    }

    /// The `[system]` table as parameters.
    pub fn system_params(&self) -> Result<SystemParams> {
        let s = self.system.as_ref().ok_or_else(|| Error::Config("missing [system] table".into()))?;
        self.system_params_from(s)
    }

    /// `flag`, then the environment override, then `[output] dir`, then `out`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
