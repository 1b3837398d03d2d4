//! Run configuration: a versioned JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use ruin_core::bounds::ClosedForm;
use ruin_core::fredholm::MAX_NODES;
use ruin_core::models::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Case-study configurations shipped with the binary.
pub const EMBEDDED: [(&str, &str); 4] = [
    ("fig1", include_str!("../configs/fig1.json")),
    ("fig2", include_str!("../configs/fig2.json")),
    ("fig3", include_str!("../configs/fig3.json")),
    ("adversarial", include_str!("../configs/adversarial.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub model: ModelSpec,
    /// Target precision `ε` of `sup_z |ψ − ψ̃|`.
    pub epsilon: f64,
    /// Share of `ε` given to the tail bound when choosing the barrier.
    #[serde(default = "default_split")]
    pub split: f64,
    #[serde(default)]
    pub bound: BoundMethod,
    /// Fixed barrier `y`; otherwise chosen from `split · ε`.
    #[serde(default)]
    pub barrier: Option<f64>,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub fredholm: FredholmSettings,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub curve: CurveSettings,
    #[serde(default)]
    pub validation: ValidationSettings,
}

fn default_split() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundMethod {
    /// Lundberg when the adjustment coefficient exists, else the moment bound
    /// with exponent `gamma`.
    Auto {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Lundberg,
    Korshunov {
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default)]
        s1: Option<f64>,
    },
    ClosedForm { form: ClosedForm },
}

fn default_gamma() -> f64 {
    2.0
}

impl Default for BoundMethod {
    fn default() -> Self {
        BoundMethod::Auto {
            gamma: default_gamma(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Fredholm,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FredholmSettings {
    /// Initial node count; doubled until the tolerances are met.
    pub nodes: usize,
    /// Bound on the residual and on successive-refinement differences.
    pub tolerance: f64,
    /// Refinement stops with an error beyond this many nodes.
    pub max_nodes: usize,
}

impl Default for FredholmSettings {
    fn default() -> Self {
        Self {
            nodes: 64,
            tolerance: 1e-5,
            max_nodes: MAX_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSettings {
    pub cells: usize,
    pub iteration_tolerance: f64,
    /// Estimate the discretisation error from a grid with twice the cells.
    pub richardson: bool,
    /// Interest nodes; the atoms of the interest noise when absent.
    pub interest: Option<Vec<f64>>,
    /// Interest truncation level (the largest node when absent).
    pub j: Option<f64>,
    /// Exponent of the interest-truncation term.
    pub beta: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            cells: 400,
            iteration_tolerance: 1e-6,
            richardson: true,
            interest: None,
            j: None,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSettings {
    /// Curves cover `[0, z_max]`; the barrier when absent.
    pub z_max: Option<f64>,
    pub points: usize,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self {
            z_max: None,
            points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSettings {
    pub points: Vec<f64>,
    pub interest: Vec<f64>,
    pub trials: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self {
            points: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            interest: vec![0.0],
            trials: 2000,
            horizon: 2000,
            seed: 1,
        }
    }
}

/// Command-line values that replace configuration entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub split: Option<f64>,
    pub solver: Option<SolverKind>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: PathBuf::from(path),
            source: e,
        })?;
        Self::from_json(&text)
    }

    /// One of the configurations in [`EMBEDDED`].
    pub fn embedded(name: &str) -> CliResult<Self> {
        let text = EMBEDDED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let known: Vec<&str> = EMBEDDED.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!("unknown figure `{name}`; known: {}", known.join(", ")))
            })?;
        Self::from_json(text)
    }

    pub fn apply(mut self, o: &Overrides) -> CliResult<Self> {
        if let Some(v) = o.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = o.split {
            self.split = v;
        }
        if let Some(v) = o.solver {
            self.solver = v;
        }
        if let Some(v) = o.trials {
            self.validation.trials = v;
        }
        if let Some(v) = o.horizon {
            self.validation.horizon = v;
        }
        if let Some(v) = o.seed {
            self.validation.seed = v;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} not in (0, 1)", self.epsilon));
        }
        if !(self.split > 0.0 && self.split <= 1.0) {
            return bad(format!("split = {} not in (0, 1]", self.split));
        }
        if let Some(y) = self.barrier {
            if !(y > 0.0 && y.is_finite()) {
                return bad(format!("barrier = {y} must be positive"));
            }
        }
        if self.validation.trials == 0 || self.validation.horizon == 0 {
            return bad("validation trials and horizon must be positive".into());
        }
        if self.curve.points < 2 {
            return bad("curve needs at least two points".into());
        }
        if self.grid.cells == 0 || !(self.grid.iteration_tolerance > 0.0) {
            return bad("grid needs cells >= 1 and a positive iteration tolerance".into());
        }
        if !(self.fredholm.tolerance > 0.0)
            || self.fredholm.nodes == 0
            || self.fredholm.max_nodes < self.fredholm.nodes
        {
            return bad("fredholm needs 1 <= nodes <= max_nodes and a positive tolerance".into());
        }
        Ok(())
    }
}
