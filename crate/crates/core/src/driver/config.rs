use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::DissipationMin;
use crate::error::{Error, Result};
use crate::mesh::{Grid, Profile};
use crate::model::{ExternalPotentialSpec, ModelSpec};
use crate::nonlocal::{ConvolutionPath, QuadratureRule};
use crate::reconstruct::LimiterParams;
use crate::timestep::{Integrator, StepControl};

use super::scenarios;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// `[min, max]` per axis.
    pub bounds: Vec<[f64; 2]>,
    pub cells: Vec<usize>,
}

impl GridSpec {
    pub fn uniform(dim: usize, half_width: f64, cells: usize) -> Self {
        GridSpec {
            bounds: vec![[-half_width, half_width]; dim],
            cells: vec![cells; dim],
        }
    }

    pub fn build(&self) -> Result<Grid> {
        let b: Vec<(f64, f64)> = self.bounds.iter().map(|b| (b[0], b[1])).collect();
        Grid::build(&b, &self.cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub model: ModelSpec,
    #[serde(default = "default_rule")]
    pub rule: QuadratureRule,
    #[serde(default)]
    pub convolution: ConvolutionPath,
    #[serde(default)]
    pub limiter: LimiterParams,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub control: StepControl,
    pub t_end: f64,
    /// Snapshot cadence in model time; `None` writes only the final state.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub initial: Profile,
    /// Rescale the projected initial data to this total mass.
    #[serde(default)]
    pub normalize_mass: Option<f64>,
    #[serde(default)]
    pub dissipation: DissipationMin,
    /// Also write the kernel weight table as CSV.
    #[serde(default)]
    pub dump_weights: bool,
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Midpoint
}

impl SimConfig {
    pub fn validate(&self) -> Result<Grid> {
        if self.grid.bounds.len() != self.grid.cells.len() {
            return Err(Error::config(
                "grid",
                "bounds and cells must have the same length",
            ));
        }
        let grid = self.grid.build()?;
        self.model.validate(grid.dim())?;
        self.limiter.validate()?;
        self.control.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be positive and finite"));
        }
        if let Some(m) = self.normalize_mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::config("normalize_mass", "must be positive"));
            }
        }
        if let Some(s) = self.snapshot_interval {
            if !(s > 0.0) {
                return Err(Error::config("snapshot_interval", "must be positive"));
            }
        }
        if let Some(k) = &self.model.kernel {
            if k.singular_at_origin()
                && matches!(self.rule, QuadratureRule::Midpoint | QuadratureRule::Trapezoid)
            {
                return Err(Error::config(
                    "rule",
                    "singular kernels need exact_integral (1D) or gauss_tensor4",
                ));
            }
            if self.rule == QuadratureRule::ExactIntegral && grid.dim() == 2 {
                return Err(Error::config("rule", "exact_integral is 1D only"));
            }
        }
        if let ExternalPotentialSpec::LogConfinement { .. } = self.model.external {
            if self.grid.cells.iter().any(|n| n % 2 != 0) {
                return Err(Error::config(
                    "grid.cells",
                    "log confinement needs even cell counts so no center sits at the origin",
                ));
            }
        }
        Ok(grid)
    }
}

/// A named preset plus parameter overrides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioRequest {
    pub name: String,
    pub overrides: BTreeMap<String, Value>,
}

impl ScenarioRequest {
    pub fn new(name: impl Into<String>) -> Self {
        ScenarioRequest {
            name: name.into(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.overrides.insert(key.to_string(), value.into());
        self
    }

    pub fn resolve(&self) -> Result<SimConfig> {
        let cfg = scenarios::build(&self.name, &self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `key=value`; the value is read as JSON, falling back to a string.
pub fn parse_assignment(text: &str) -> Result<(String, Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "expected key=value"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::config(text, "empty key"));
    }
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

/// Reads either `{"scenario": name, ...overrides}` or a full configuration.
pub fn load_config_str(text: &str) -> Result<SimConfig> {
    let value: Value = serde_json::from_str(text)?;
    let cfg = match value {
        Value::Object(mut map) if map.contains_key("scenario") => {
            let name = match map.remove("scenario") {
                Some(Value::String(s)) => s,
                _ => return Err(Error::config("scenario", "must be a string")),
            };
            ScenarioRequest {
                name,
                overrides: map.into_iter().collect(),
            }
            .resolve()?
        }
        other => {
            let cfg: SimConfig = serde_json::from_value(other)?;
            cfg.validate()?;
            cfg
        }
    };
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text)
}
