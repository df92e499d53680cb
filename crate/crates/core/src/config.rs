//! JSON run configuration; unknown keys are rejected at every level.

use crate::grid::{FrequencyGrid, TimeGrid};
use crate::model::{BathSpec, SourceProfile, SystemSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub bath: Option<BathSpec>,
    #[serde(default)]
    pub source: Option<SourceProfile>,
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_frequency_grid")]
    pub frequency: FrequencyGrid,
    /// defaults to 1e-6 * omega0
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_frequency_grid() -> FrequencyGrid {
    FrequencyGrid { omega_max: 200.0, n_samples: 1 << 18 }
}

fn default_hbar() -> f64 {
    1.0
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self { frequency: default_frequency_grid(), epsilon: None, hbar: default_hbar() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        SystemSpec::new(self.system.mass, self.system.omega0).map_err(|e| e.to_string())?;
        match &self.bath {
            Some(BathSpec::Discrete(b)) => {
                crate::model::DiscreteBath::new(b.modes.clone()).map_err(|e| e.to_string())?;
            }
            Some(BathSpec::Ohmic(b)) => {
                crate::model::OhmicBath::new(b.g, b.omega_d).map_err(|e| e.to_string())?;
            }
            None => {}
        }
        if let Some(g) = &self.grid {
            TimeGrid::new(g.t_start, g.t_end, g.n_samples).map_err(|e| e.to_string())?;
        }
        FrequencyGrid::new(self.numerics.frequency.omega_max, self.numerics.frequency.n_samples)
            .map_err(|e| e.to_string())?;
        if let Some(eps) = self.numerics.epsilon {
            if !(eps > 0.0) {
                return Err(format!("numerics.epsilon must be positive (got {eps})"));
            }
        }
        if !(self.numerics.hbar > 0.0) {
            return Err(format!("numerics.hbar must be positive (got {})", self.numerics.hbar));
        }
        if let Some(src) = &self.source {
            src.validate(self.grid.as_ref()).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.numerics.epsilon.unwrap_or(1e-6 * self.system.omega0)
    }
}

/// Apply `path.to.field=value` overrides onto the raw JSON before parsing.
pub fn apply_overrides(
    mut value: serde_json::Value,
    overrides: &[(String, String)],
) -> Result<serde_json::Value, String> {
    for (path, raw) in overrides {
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.clone()));
        let segments: Vec<&str> = path.split('.').collect();
        let (last, parents) = segments.split_last().expect("non-empty override path");
        let mut node = &mut value;
        for seg in parents {
            let map = node
                .as_object_mut()
                .ok_or_else(|| format!("override path '{path}' crosses a non-object"))?;
            node = map
                .entry((*seg).to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
        let map = node
            .as_object_mut()
            .ok_or_else(|| format!("override path '{path}' crosses a non-object"))?;
        map.insert((*last).to_string(), parsed);
    }
    Ok(value)
}
