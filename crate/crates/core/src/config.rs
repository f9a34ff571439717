//! TOML run configuration.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{MomentumGrid, Profile, QuadratureScheme};
use crate::oracle::{ModePair, ModeSet};
use crate::phase::{Axis, ClaimConfig};
use crate::scaling::DEFAULT_OCTAVES;
use crate::solver::{ModelBasis, ModelParams};
use crate::thermal::DispersionKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("missing `{0}` block required by this command")]
    MissingBlock(&'static str),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tc: Option<TcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<ClaimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub dispersion: DispersionConfig,
    #[serde(default = "default_profile")]
    pub form_factor: ProfileConfig,
    #[serde(default = "default_profile")]
    pub weight: ProfileConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DispersionConfig {
    Flat { omega0: f64 },
    Quadratic { offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Gaussian { center: f64, width: f64 },
    Flat,
}

fn default_profile() -> ProfileConfig {
    ProfileConfig::Gaussian {
        center: 1.0,
        width: 0.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub count: usize,
    pub scheme: SchemeName,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 10.0,
            count: 2048,
            scheme: SchemeName::UniformMidpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    UniformMidpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcConfig {
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub delta_m: f64,
    pub pairs: Vec<PairConfig>,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

fn default_oracle_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub omega: f64,
    pub delta_b_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default = "default_octaves")]
    pub octaves: usize,
}

fn default_octaves() -> usize {
    DEFAULT_OCTAVES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Toml,
}

impl RunConfig {
    /// Parses a config file. A result record is accepted too, in which case
    /// its embedded config is used.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let cfg: RunConfig = if table.contains_key("version") && table.contains_key("config") {
            let inner = table["config"].clone();
            inner
                .try_into()
                .map_err(|e: toml::de::Error| ConfigError::Parse(format!("in `config`: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        for (key, v) in [
            ("model.lambda_m", m.lambda_m),
            ("model.lambda_b", m.lambda_b),
            ("model.mu", m.mu),
        ] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }
        if m.mu <= 0.0 {
            return Err(invalid("model.mu", "must be positive"));
        }
        match (m.temperature, m.beta) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "model.temperature",
                    "give exactly one of `temperature` and `beta`",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "model.temperature",
                    "one of `temperature` or `beta` is required",
                ))
            }
            (Some(t), None) if !(t.is_finite() && t > 0.0) => {
                return Err(invalid(
                    "model.temperature",
                    "must be positive and finite (use `beta = 0` for infinite temperature)",
                ))
            }
            (None, Some(b)) if !(b.is_finite() && b >= 0.0) => {
                return Err(invalid("model.beta", "must be finite and non-negative"))
            }
            _ => {}
        }
        self.basis()?;
        if let Some(tc) = &self.tc {
            if !(tc.t_min > 0.0 && tc.t_max > tc.t_min && tc.t_max.is_finite()) {
                return Err(invalid("tc.t_min", "need 0 < t_min < t_max"));
            }
        }
        if let Some(o) = &self.oracle {
            if !(o.tolerance.is_finite() && o.tolerance > 0.0) {
                return Err(invalid("oracle.tolerance", "must be positive"));
            }
            self.mode_set()?;
        }
        if let Some(s) = &self.scaling {
            if s.octaves < 5 {
                return Err(invalid("scaling.octaves", "need at least 5 octaves"));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        match (self.model.temperature, self.model.beta) {
            (Some(t), _) => 1.0 / t,
            (None, Some(b)) => b,
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn basis(&self) -> Result<ModelBasis, ConfigError> {
        let g = &self.grid;
        let scheme = match g.scheme {
            SchemeName::UniformMidpoint => QuadratureScheme::UniformMidpoint,
            SchemeName::GaussLegendre => QuadratureScheme::GaussLegendre,
        };
        let grid = MomentumGrid::new(g.half_width, g.count, scheme).map_err(|e| {
            let key = match e {
                crate::error::GridError::BadCount(_) => "grid.count",
                _ => "grid.half_width",
            };
            invalid(key, e.to_string())
        })?;
        let dispersion = match self.model.dispersion {
            DispersionConfig::Flat { omega0 } if omega0.is_finite() => DispersionKind::Flat { omega0 },
            DispersionConfig::Quadratic { offset } if offset.is_finite() => {
                DispersionKind::Quadratic { offset }
            }
            _ => return Err(invalid("model.dispersion", "parameters must be finite")),
        };
        let profile = |p: ProfileConfig| match p {
            ProfileConfig::Gaussian { center, width } => Profile::Gaussian { center, width },
            ProfileConfig::Flat => Profile::Flat,
        };
        let v = profile(self.model.form_factor);
        let u = profile(self.model.weight);
        crate::grid::FormFactorV::new(&grid, v).map_err(|e| invalid("model.form_factor", e.to_string()))?;
        crate::grid::WeightU::new(&grid, u).map_err(|e| invalid("model.weight", e.to_string()))?;
        ModelBasis::new(grid, dispersion, v, u).map_err(|e| invalid("model", e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let m = &self.model;
        ModelParams::new(m.lambda_m, m.lambda_b, m.mu, self.beta(), Arc::new(self.basis()?))
            .map_err(|e| invalid("model", e.to_string()))
    }

    pub fn mode_set(&self) -> Result<ModeSet, ConfigError> {
        let o = self.oracle.as_ref().ok_or(ConfigError::MissingBlock("oracle"))?;
        let pairs = o
            .pairs
            .iter()
            .map(|p| ModePair {
                omega: p.omega,
                delta_b_v: p.delta_b_v,
            })
            .collect();
        ModeSet::new(o.delta_m, pairs).map_err(|e| invalid("oracle.pairs", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
lambda_m = -0.5
lambda_b = -0.6
mu = 1.0
temperature = 0.1
[model.dispersion]
kind = "flat"
omega0 = 1.0
"#;

    #[test]
    fn minimal_config_fills_numerical_defaults() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.beta(), 10.0);
        assert_eq!(cfg.model.form_factor, default_profile());
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("lambda_m", "lamda_m");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("lamda_m"), "{err}");
    }

    #[test]
    fn unknown_nested_key_is_named() {
        let text = format!("{MINIMAL}\n[grid]\nhalf_width = 5.0\ncount = 64\nscheme = \"uniform-midpoint\"\nspacing = 1\n");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("spacing"), "{err}");
    }

    #[test]
    fn physics_parameters_have_no_defaults() {
        let text = MINIMAL.replace("mu = 1.0\n", "");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("mu"), "{err}");
        let text = MINIMAL.replace("temperature = 0.1\n", "");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("model.temperature"), "{err}");
    }

    #[test]
    fn temperature_rules() {
        let both = MINIMAL.replace("temperature = 0.1", "temperature = 0.1\nbeta = 2.0");
        assert!(RunConfig::from_toml_str(&both).is_err());
        let zero = MINIMAL.replace("temperature = 0.1", "temperature = 0.0");
        let err = RunConfig::from_toml_str(&zero).unwrap_err().to_string();
        assert!(err.contains("model.temperature"), "{err}");
        let inf = MINIMAL.replace("temperature = 0.1", "beta = 0");
        assert_eq!(RunConfig::from_toml_str(&inf).unwrap().beta(), 0.0);
    }

    #[test]
    fn bad_grid_names_key() {
        let text = format!("{MINIMAL}\n[grid]\nhalf_width = 5.0\ncount = 7\nscheme = \"gauss-legendre\"\n");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("grid.count"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
