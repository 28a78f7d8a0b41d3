//! TOML run configuration: flat typed sections, strict unknown-key rejection,
//! validation with key paths, and exact serialize/parse round-trip. The
//! config file is the reproducibility record; CLI flags only override
//! individual keys on the parsed TOML tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::InitialDataSpec;
use crate::grid::GridSpec;
use crate::model::PhysParams;
use crate::ns::ViscosityLaw;
use crate::relaxed::{StepControl, Variant};

/// Output sinks: where files go and how densely runs are sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// Samples per unit time; at least 2 samples must land in [0, t_end].
    pub cadence: f64,
    /// Times at which full state snapshots are written.
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".into(),
            cadence: 10.0,
            snapshot_times: Vec::new(),
        }
    }
}

/// Parameter lists consumed by the sweep/probe subcommands. Unused sections
/// are harmless; everything is echoed into the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Relaxation times for `sweep-tau` and `probe-layer` (strictly
    /// descending, at least 3).
    pub taus: Vec<f64>,
    /// Elastic moduli for `sweep-neo` (strictly increasing).
    pub gs: Vec<f64>,
    /// Limit viscosity `mu_bar = G tau` held fixed across the G sweep.
    pub mu_bar: f64,
    /// Amplitude ladder for `probe-threshold` (strictly increasing).
    pub ladder: Vec<f64>,
    /// Constitutive variant for `run` and `converge`.
    pub variant: Variant,
    /// Viscosity law for `run-ns`; defaults to constant `phys.mu`.
    pub law: Option<ViscosityLaw>,
    /// dt cap for Navier-Stokes reference runs inside sweeps.
    pub ns_dt_max: Option<f64>,
    /// Fixed dt on the coarsest grid for `converge --solver ns`
    /// (scaled by 1/4 per refinement).
    pub ns_dt0: Option<f64>,
    /// Worker threads for sweep parameter points.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            taus: vec![1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3],
            gs: vec![5.0, 10.0, 20.0, 40.0, 80.0],
            mu_bar: 1.0,
            ladder: vec![1e-3, 1e-2, 1e-1, 0.5, 1.0, 2.0, 4.0, 8.0],
            variant: Variant::Standard,
            law: None,
            ns_dt_max: None,
            ns_dt0: None,
            workers: 1,
        }
    }
}

/// Full run configuration; every field has a default so a config file only
/// needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub phys: PhysParams,
    pub grid: GridSpec,
    pub control: StepControl,
    pub initial: InitialDataSpec,
    pub output: OutputConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    /// Validates every section; returns non-fatal warnings (currently only
    /// the small-relaxation regime check).
    pub fn validate(&self) -> Result<Vec<String>> {
        self.phys.validate()?;
        self.grid.validate()?;
        self.control.validate()?;
        self.initial.validate()?;
        self.experiment.variant.validate(&self.phys)?;
        if let Some(law) = &self.experiment.law {
            law.validate()?;
        }
        if !(self.output.cadence > 0.0) {
            return Err(Error::Validation(format!(
                "output.cadence must be positive, got {}",
                self.output.cadence
            )));
        }
        if self.output.cadence * self.control.t_end < 2.0 {
            return Err(Error::Validation(format!(
                "output.cadence: need at least 2 samples in [0, t_end], got cadence {} over t_end {}",
                self.output.cadence, self.control.t_end
            )));
        }
        for &t in &self.output.snapshot_times {
            if !(0.0..=self.control.t_end).contains(&t) {
                return Err(Error::Validation(format!(
                    "output.snapshot_times entry {t} outside [0, {}]",
                    self.control.t_end
                )));
            }
        }
        if self.experiment.workers == 0 {
            return Err(Error::Validation(
                "experiment.workers must be at least 1".into(),
            ));
        }
        let mut warnings = Vec::new();
        if !self.phys.in_limit_regime() {
            warnings.push(format!(
                "accepted with regime warning: tau = {} >= min(1, mu^2) = {}; \
                 small-relaxation guarantees do not apply",
                self.phys.tau,
                1.0f64.min(self.phys.mu * self.phys.mu)
            ));
        }
        Ok(warnings)
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config {
        key: String::new(),
        message: e.to_string(),
    }
}

/// Parses and validates a TOML config. Unknown keys and type mismatches are
/// hard errors; validation messages carry the section.key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(config_error)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serializes a config back to TOML; `parse_config(serialize_config(c))`
/// reproduces `c` exactly (floats round-trip by value).
pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(config_error)
}

fn insert_path(
    node: &mut toml::Value,
    parts: &[&str],
    val: toml::Value,
    full_path: &str,
) -> Result<()> {
    let table = node.as_table_mut().ok_or_else(|| Error::Config {
        key: full_path.to_string(),
        message: "override path crosses a non-table value".into(),
    })?;
    match parts {
        [] => Err(Error::Config {
            key: full_path.to_string(),
            message: "empty override path".into(),
        }),
        [last] => {
            table.insert(last.to_string(), val);
            Ok(())
        }
        [head, rest @ ..] => {
            let child = table
                .entry(head.to_string())
                .or_insert(toml::Value::Table(Default::default()));
            insert_path(child, rest, val, full_path)
        }
    }
}

/// Applies one `section.key=value` override onto raw config text, before
/// deserialization, so strict validation still sees the final tree.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    let mut tree: toml::Value = text.parse().map_err(config_error)?;
    for spec in overrides {
        let (path, raw) = spec.split_once('=').ok_or_else(|| Error::Config {
            key: spec.clone(),
            message: "override must look like section.key=value".into(),
        })?;
        let path = path.trim();
        let raw = raw.trim();
        let parsed: toml::Value = match format!("x = {raw}").parse::<toml::Value>() {
            Ok(toml::Value::Table(t)) => t.get("x").cloned().unwrap(),
            _ => toml::Value::String(raw.to_string()),
        };
        let parts: Vec<&str> = path.split('.').collect();
        insert_path(&mut tree, &parts, parsed, path)?;
    }
    toml::to_string_pretty(&tree).map_err(config_error)
}
