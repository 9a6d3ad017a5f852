//! Run configuration: a TOML file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use distfit_core::inference::FitControls;
use distfit_core::likelihood::{LocusNormalization, LoglikOptions};
use distfit_core::model::{DistanceErrorParams, ErrorFamily, SpreadScaling};
use distfit_core::optim::NelderMeadOptions;
use distfit_core::simulation::{FourierField, Placement};
use distfit_core::{Interpolation, LoglikVariant, QuadratureScheme, SurrogateSpec};
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    pub intensity: Option<IntensityConfig>,
    pub distance_error: Option<ErrorConfig>,
    #[serde(default)]
    pub quadrature: QuadratureScheme,
    #[serde(default)]
    pub optimizer: NelderMeadOptions,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub predict: PredictConfig,
    #[serde(default)]
    pub abundance: AbundanceConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub observations: Option<PathBuf>,
    pub transects: Option<PathBuf>,
    pub region: Option<PathBuf>,
    #[serde(default)]
    pub rasters: Vec<PathBuf>,
    #[serde(default)]
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Exact,
    #[default]
    Locus,
    DistanceError,
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub variant: VariantKind,
    pub surrogate: Option<SurrogateSpec>,
    #[serde(default = "yes")]
    pub clip_loci: bool,
    #[serde(default)]
    pub normalization: LocusNormalization,
    #[serde(default)]
    pub sequential: bool,
}

fn yes() -> bool {
    true
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: VariantKind::default(),
            surrogate: None,
            clip_loci: true,
            normalization: LocusNormalization::default(),
            sequential: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Truncation distance.
    pub w: f64,
    /// Starting value, or the fixed value when `fix_sigma` is set.
    pub sigma: Option<f64>,
    #[serde(default)]
    pub fix_sigma: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            w: 0.06,
            sigma: None,
            fix_sigma: false,
        }
    }
}

/// Optional starting values for the intensity coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityConfig {
    pub beta0: f64,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorConfig {
    pub family: ErrorFamily,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub fix_theta: bool,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub scaling: SpreadScaling,
}

fn default_theta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    /// Number of draws; 0 disables bootstrap intervals.
    pub b: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { b: 1000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    /// Previously written fit JSON; refit when absent.
    pub fit: Option<PathBuf>,
    /// Output grid; defaults to the covariate grid.
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nrows: usize,
    pub ncols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbundanceConfig {
    pub fit: Option<PathBuf>,
    /// Sub-region to integrate over; defaults to the study region.
    pub region: Option<PathBuf>,
    pub region_q: usize,
}

impl Default for AbundanceConfig {
    fn default() -> Self {
        Self {
            fit: None,
            region: None,
            region_q: 160_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub placement: Placement,
    pub n_transects: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub sigma: f64,
    pub replicates: usize,
    pub buffer_radius: f64,
    pub field: FourierField,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            placement: Placement::Convenience,
            n_transects: 16,
            beta0: 9.0,
            beta1: 1.0,
            sigma: 0.025,
            replicates: 250,
            buffer_radius: 0.06,
            field: FourierField::default(),
        }
    }
}

impl Config {
    /// Reads `path`, applies `key=value` overrides and validates the result.
    /// Relative data paths are resolved against the config file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let mut cfg = Self::parse(path, overrides)?;
        cfg.finalize(path)?;
        Ok(cfg)
    }

    /// Reads the file and applies overrides, leaving relative paths as
    /// written so the result does not depend on the working directory.
    pub fn parse(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: Value = text
            .parse::<toml::Table>()
            .map(Value::Table)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        value
            .try_into()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves relative paths against the directory of `path` and validates.
    pub fn finalize(&mut self, path: &Path) -> Result<(), CliError> {
        self.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        self.validate()
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let d = &mut self.data;
        for p in [&mut d.observations, &mut d.transects, &mut d.region]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        d.rasters.iter_mut().for_each(fix);
        for p in [&mut self.predict.fit, &mut self.abundance.fit, &mut self.abundance.region]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.detection.w > 0.0) {
            return bad(format!("detection.w must be positive, got {}", self.detection.w));
        }
        if let Some(s) = self.detection.sigma {
            if !(s > 0.0) {
                return bad(format!("detection.sigma must be positive, got {s}"));
            }
        }
        if self.detection.fix_sigma && self.detection.sigma.is_none() {
            return bad("detection.fix_sigma needs detection.sigma".into());
        }
        self.quadrature
            .validate()
            .map_err(|e| CliError::Config(format!("quadrature: {e}")))?;
        match self.model.variant {
            VariantKind::Surrogate if self.model.surrogate.is_none() => {
                return bad("model.variant = \"surrogate\" needs a [model.surrogate] table".into())
            }
            VariantKind::DistanceError => match &self.distance_error {
                None => return bad("model.variant = \"distance_error\" needs [distance_error]".into()),
                Some(e) if e.family == ErrorFamily::None => {
                    return bad("distance_error.family must be truncated_normal or laplace".into())
                }
                Some(e) => {
                    self.error_params(e)?;
                }
            },
            _ => {}
        }
        if self.bootstrap.b != 0 && self.bootstrap.b < 100 {
            return bad(format!("bootstrap.b must be 0 or at least 100, got {}", self.bootstrap.b));
        }
        let referenced = [&self.data.observations, &self.data.transects, &self.data.region]
            .into_iter()
            .flatten()
            .chain(&self.data.rasters)
            .chain([&self.predict.fit, &self.abundance.fit, &self.abundance.region].into_iter().flatten());
        for p in referenced {
            if !p.exists() {
                return bad(format!("referenced file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    fn error_params(&self, e: &ErrorConfig) -> Result<DistanceErrorParams, CliError> {
        DistanceErrorParams::new(e.family, e.theta, e.lower, e.upper)
            .map(|p| p.with_scaling(e.scaling))
            .map_err(|err| CliError::Config(format!("distance_error: {err}")))
    }

    pub fn variant(&self) -> LoglikVariant {
        match self.model.variant {
            VariantKind::Exact => LoglikVariant::Exact,
            VariantKind::Locus => LoglikVariant::Locus,
            VariantKind::DistanceError => LoglikVariant::DistanceError,
            VariantKind::Surrogate => LoglikVariant::Surrogate {
                spec: self.model.surrogate.expect("validated"),
            },
        }
    }

    pub fn fit_controls(&self) -> Result<FitControls, CliError> {
        let mut c = FitControls::new(self.detection.w);
        c.optimizer = self.optimizer;
        c.quadrature = self.quadrature;
        c.options = LoglikOptions {
            clip_loci: self.model.clip_loci,
            normalization: self.model.normalization,
            execution: self.execution(),
        };
        if self.detection.fix_sigma {
            c.fixed.push(("sigma".into(), self.detection.sigma.expect("validated")));
        }
        if self.model.variant == VariantKind::DistanceError {
            let e = self.distance_error.as_ref().expect("validated");
            c.error = Some(self.error_params(e)?);
            if e.fix_theta {
                c.fixed.push(("theta".into(), e.theta));
            }
        }
        Ok(c)
    }

    pub fn execution(&self) -> distfit_core::Execution {
        if self.model.sequential {
            distfit_core::Execution::Sequential
        } else {
            distfit_core::Execution::default()
        }
    }

    pub fn require<'a>(&self, p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        p.as_deref()
            .ok_or_else(|| CliError::Config(format!("this command needs {key} in the config")))
    }
}

/// Sets a dotted key, creating intermediate tables. The value is read as a
/// TOML literal when it parses as one and as a bare string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{assignment}'")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("--set has an empty key in '{assignment}'")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: '{part}' is not a table")))?;
        cur = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    let table = cur
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("--set {key}: parent is not a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
