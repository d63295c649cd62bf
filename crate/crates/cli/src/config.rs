//! Scenario files: strict JSON objects describing one run or one sweep.
//!
//! Times in the file (`evolve.t_max`, `evolve.dt`, `evolve.validity_horizon`)
//! are expressed in `time_unit`; everything else uses units of Δ.

use std::path::{Path, PathBuf};

use dsb_core::{BathParams, BlochVector, DsbError, EvolveConfig, QubitParams, TimeUnit};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    S,
    OmegaDrive,
    Beta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::S => "s",
            SweepParameter::OmegaDrive => "omega_drive",
            SweepParameter::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub qubit: QubitParams,
    pub bath: BathParams,
    pub evolve: EvolveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub output_path: PathBuf,
    #[serde(default)]
    pub time_unit: TimeUnit,
    /// Pure initial state for `purity` runs; |+⟩ when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_bloch: Option<BlochVector>,
}

fn section(prefix: &str, err: DsbError) -> CliError {
    match err {
        DsbError::InvalidParameter { field, reason } => CliError::new(format!("{prefix}.{field}"), reason),
        other => CliError::new(prefix, other.to_string()),
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(CliError::from_serde)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(CliError::from_serde)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario configs are always serialisable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.qubit.validate().map_err(|e| section("qubit", e))?;
        self.bath.validate().map_err(|e| section("bath", e))?;
        self.evolve.validate().map_err(|e| section("evolve", e))?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::new("sweep.values", "must not be empty"));
            }
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::new("sweep.values", "must be finite"));
            }
            if sweep.values.windows(2).any(|w| w[1] < w[0]) {
                return Err(CliError::new("sweep.values", "must be sorted ascending"));
            }
            for &v in &sweep.values {
                self.with_parameter(sweep.parameter, v)?;
            }
        }
        if let Some(v) = self.initial_bloch {
            if !((v.norm() - 1.0).abs() <= 1e-9) {
                return Err(CliError::new("initial_bloch", "must be a unit vector (pure state)"));
            }
        }
        if self.output_path.as_os_str().is_empty() {
            return Err(CliError::new("output_path", "must not be empty"));
        }
        Ok(())
    }

    /// Physical parameters with one sweep parameter overridden.
    pub fn with_parameter(&self, p: SweepParameter, v: f64) -> Result<(QubitParams, BathParams), CliError> {
        let (mut q, mut b) = (self.qubit, self.bath);
        match p {
            SweepParameter::S => q.s = v,
            SweepParameter::OmegaDrive => q.omega_drive = v,
            SweepParameter::Beta => b.beta = v,
        }
        let invalid = |e: DsbError| match e {
            DsbError::InvalidParameter { reason, .. } => {
                CliError::new("sweep.values", format!("{} = {v}: {reason}", p.name()))
            }
            other => CliError::new("sweep.values", other.to_string()),
        };
        q.validate().map_err(invalid)?;
        b.validate().map_err(invalid)?;
        Ok((q, b))
    }

    /// The evolution settings with all times converted to units of 1/Δ.
    pub fn evolve_internal(&self) -> EvolveConfig {
        let to = |t: f64| self.time_unit.to_internal(t, self.qubit.delta);
        EvolveConfig {
            t_max: to(self.evolve.t_max),
            dt: to(self.evolve.dt),
            validity_horizon: self.evolve.validity_horizon.map(to),
            ..self.evolve
        }
    }

    pub fn time_out(&self, t: f64) -> f64 {
        self.time_unit.from_internal(t, self.qubit.delta)
    }
}

/// Recursively overlays `patch` on `base`; objects merge key by key, every
/// other value replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new("config", e.to_string()))
}
