//! Experiment configuration files (TOML).
//!
//! ```toml
//! schema_version = 1
//! id = "smooth-orders"
//! field = "sin_cos_poly"
//! orders = [0, 1, 2, 3, 4]
//! alpha = 1.0
//! anchor = [0.3, 0.2, -0.4]     # [t, x_1, ..., x_d]
//! directions = 8
//! seed = 42
//!
//! [group]
//! preset = "prototype"          # or: b = [[0, 0], [1, 0]] and layers = [1, 1]
//!
//! [rho_grid]
//! max = 0.1                     # or: values = [0.1, 0.05, ...]
//! min = 0.001
//! count = 12
//! ```
//!
//! Optional sections: `[output]`, `[connect]`, `[holder]`, `[compare]`,
//! `[taylor]`.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GroupError;
use crate::fit::log_grid;
use crate::group::{GroupSpec, Point};
use crate::presets;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config at `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("invalid group: {0}")]
    Group(#[from] GroupError),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub preset: Option<String>,
    pub b: Option<Vec<Vec<f64>>>,
    pub layers: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSection {
    pub values: Option<Vec<f64>>,
    pub max: Option<f64>,
    pub min: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConnectSection {
    pub level: Option<usize>,
    pub increment: Option<Vec<f64>>,
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HolderSection {
    pub fields: Option<Vec<String>>,
    pub alpha: Option<f64>,
    pub samples: Option<usize>,
    pub vector_fields: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub pairs: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TaylorSection {
    pub order: Option<u32>,
    pub point: Option<Vec<f64>>,
}

/// The file as written.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: u32,
    pub id: Option<String>,
    #[serde(default)]
    pub group: GroupSection,
    pub field: Option<String>,
    pub orders: Option<Vec<u32>>,
    pub alpha: Option<f64>,
    pub anchor: Option<Vec<f64>>,
    pub rho_grid: Option<RhoSection>,
    pub directions: Option<usize>,
    pub equal_time: Option<bool>,
    pub slope_tolerance: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub connect: ConnectSection,
    #[serde(default)]
    pub holder: HolderSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub taylor: TaylorSection,
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub id: String,
    pub group: GroupSpec,
    pub field: String,
    pub orders: Vec<u32>,
    pub alpha: f64,
    pub anchor: Point,
    /// Strictly decreasing, positive.
    pub rho_grid: Vec<f64>,
    pub directions: usize,
    pub equal_time: bool,
    pub slope_tolerance: f64,
    pub seed: u64,
    pub output_path: Option<String>,
    pub format: OutputFormat,
    pub connect_level: usize,
    pub connect_increment: DVector<f64>,
    pub connect_start: Point,
    pub holder_fields: Vec<String>,
    pub holder_alpha: f64,
    pub holder_samples: usize,
    pub holder_vector_fields: Vec<String>,
    pub compare_pairs: usize,
    pub taylor_order: u32,
    pub taylor_point: Point,
}

fn point_from(key: &str, coords: Option<&Vec<f64>>, d: usize) -> Result<Point, ConfigError> {
    match coords {
        None => Ok(Point::origin(d)),
        Some(c) if c.len() == d + 1 => Ok(Point::from_slice(c)),
        Some(c) => Err(invalid(
            key,
            format!("expected {} coordinates [t, x_1..x_{d}], got {}", d + 1, c.len()),
        )),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(self) -> Result<ExperimentConfig, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let group = match (&self.group.preset, &self.group.b, &self.group.layers) {
            (Some(name), None, None) => presets::by_name(name)
                .ok_or_else(|| invalid("group.preset", format!("unknown preset `{name}`")))?,
            (None, Some(b), Some(layers)) => GroupSpec::from_rows(b, layers.clone())?,
            (None, None, None) => GroupSpec::prototype(),
            _ => {
                return Err(invalid(
                    "group",
                    "give either `preset` or both `b` and `layers`",
                ))
            }
        };
        let d = group.d();

        let alpha = self.alpha.unwrap_or(1.0);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("alpha", "must lie in (0, 1]"));
        }

        let rho_grid = match &self.rho_grid {
            None => log_grid(0.1, 0.001, 12),
            Some(RhoSection {
                values: Some(v), ..
            }) => v.clone(),
            Some(RhoSection {
                values: None,
                max,
                min,
                count,
            }) => {
                let (max, min, count) = (max.unwrap_or(0.1), min.unwrap_or(0.001), count.unwrap_or(12));
                if !(max > min && min > 0.0 && count >= 2) {
                    return Err(invalid("rho_grid", "need max > min > 0 and count >= 2"));
                }
                log_grid(max, min, count)
            }
        };
        if rho_grid.is_empty()
            || rho_grid.iter().any(|&r| r.is_nan() || r <= 0.0)
            || rho_grid.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(invalid("rho_grid", "radii must be positive and strictly decreasing"));
        }

        let field = self.field.clone().unwrap_or_else(|| "sin_cos_poly".to_string());
        let connect_increment = match &self.connect.increment {
            None => DVector::zeros(d),
            Some(v) if v.len() == d => DVector::from_vec(v.clone()),
            Some(v) => {
                return Err(invalid(
                    "connect.increment",
                    format!("expected {d} entries, got {}", v.len()),
                ))
            }
        };
        let connect_level = self.connect.level.unwrap_or(0);
        if connect_level > group.r() {
            return Err(invalid("connect.level", format!("must be at most r = {}", group.r())));
        }

        let holder_alpha = self.holder.alpha.unwrap_or(alpha);
        let holder_vector_fields = self.holder.vector_fields.clone().unwrap_or_else(|| {
            std::iter::once("Y".to_string())
                .chain((1..=group.layers()[0]).map(|i| format!("X{i}")))
                .collect()
        });

        Ok(ExperimentConfig {
            id: self.id.clone().unwrap_or_else(|| "experiment".to_string()),
            anchor: point_from("anchor", self.anchor.as_ref(), d)?,
            connect_start: point_from("connect.start", self.connect.start.as_ref(), d)?,
            taylor_point: point_from("taylor.point", self.taylor.point.as_ref(), d)?,
            orders: self.orders.clone().unwrap_or_else(|| vec![0, 1, 2]),
            alpha,
            rho_grid,
            directions: self.directions.unwrap_or(8),
            equal_time: self.equal_time.unwrap_or(false),
            slope_tolerance: self.slope_tolerance.unwrap_or(0.15),
            seed: self.seed.unwrap_or(0),
            output_path: self.output.path.clone(),
            format: self.output.format.unwrap_or_default(),
            connect_level,
            connect_increment,
            holder_fields: self.holder.fields.clone().unwrap_or_else(|| vec![field.clone()]),
            holder_alpha,
            holder_samples: self.holder.samples.unwrap_or(200),
            holder_vector_fields,
            compare_pairs: self.compare.pairs.unwrap_or(1000),
            taylor_order: self.taylor.order.unwrap_or(2),
            field,
            group,
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.validate()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Defaults on the prototype group.
    pub fn prototype_defaults() -> Self {
        Self::from_toml("schema_version = 1").expect("defaults are valid")
    }
}
