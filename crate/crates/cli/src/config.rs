//! Scenario configuration: a versioned TOML schema describing one run.

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use qme_core::models::{self, BathSpec, Model};
use qme_core::numkit::{c, ComplexMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub basis: Basis,
    pub model: ModelConfig,
    #[serde(rename = "initialState", default)]
    pub initial_state: InitialState,
    #[serde(rename = "timeGrid")]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Master,
    Trajectory,
    Ensemble,
    Timescales,
    Bloch,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    Eigen,
    Decoherence,
    Pm,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub temperature: f64,
    #[serde(rename = "couplingA")]
    pub coupling_a: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLevel,
    VModel,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub kind: InitialStateKind,
    /// Explicit density matrix as rows of [re, im] entry pairs
    /// (`kind = "matrix"` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            kind: InitialStateKind::Ground,
            matrix: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateKind {
    Ground,
    Matrix,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    #[serde(default)]
    pub workers: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            count: 1,
            base_seed: 0,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if !self.time_grid.t_max.is_finite() || self.time_grid.t_max <= 0.0 {
            return Err(CliError::Config(format!(
                "timeGrid.t_max must be positive (got {})",
                self.time_grid.t_max
            )));
        }
        if self.time_grid.points < 2 {
            return Err(CliError::Config(format!(
                "timeGrid.points must be at least 2 (got {})",
                self.time_grid.points
            )));
        }
        if matches!(self.mode, Mode::Ensemble) && self.ensemble.count < 1 {
            return Err(CliError::Config("ensemble.count must be at least 1".into()));
        }
        match (self.model.kind, self.basis) {
            (ModelKind::TwoLevel, Basis::Pm) => {
                return Err(CliError::Config(
                    "basis: pm applies to the v_model only".into(),
                ))
            }
            (ModelKind::VModel, Basis::Decoherence) => {
                return Err(CliError::Config(
                    "basis: the v_model has no decoherence basis (two collapse operators \
                     cannot be simultaneously diagonalized)"
                        .into(),
                ))
            }
            _ => {}
        }
        if matches!(self.mode, Mode::Bloch)
            && !(self.model.kind == ModelKind::TwoLevel && self.basis == Basis::Decoherence)
        {
            return Err(CliError::Config(
                "mode: bloch requires model.kind = two_level and basis = decoherence".into(),
            ));
        }
        if self.model.kind == ModelKind::VModel && self.model.nu.is_none() {
            return Err(CliError::Config(
                "model.nu is required for the v_model".into(),
            ));
        }
        if self.initial_state.kind == InitialStateKind::Matrix
            && self.initial_state.matrix.is_none()
        {
            return Err(CliError::Config(
                "initialState.matrix is required when initialState.kind = matrix".into(),
            ));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        let bath = BathSpec::ohmic(self.model.coupling_a, self.model.temperature)
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        match self.model.kind {
            ModelKind::TwoLevel => models::build_two_level(self.model.delta, bath)
                .map_err(|e| CliError::Config(format!("model: {e}"))),
            ModelKind::VModel => {
                let nu = self.model.nu.expect("validated");
                models::build_v_model(nu, self.model.delta, bath)
                    .map_err(|e| CliError::Config(format!("model: {e}")))
            }
        }
    }

    /// Initial state in the model's energy eigenbasis.
    pub fn build_initial_state(&self, model: &Model) -> Result<ComplexMatrix, CliError> {
        match self.initial_state.kind {
            InitialStateKind::Ground => Ok(model.ground_state()),
            InitialStateKind::Matrix => {
                let rows = self.initial_state.matrix.as_ref().expect("validated");
                let d = model.dimension;
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::Config(format!(
                        "initialState.matrix must be {d}x{d} for this model"
                    )));
                }
                Ok(ComplexMatrix::from_fn(d, d, |i, j| {
                    c(rows[i][j][0], rows[i][j][1])
                }))
            }
        }
    }

    /// Observation grid from the `timeGrid` section. Log spacing starts at 0
    /// and covers six decades below `t_max`.
    pub fn build_grid(&self) -> Vec<f64> {
        let n = self.time_grid.points;
        let t_max = self.time_grid.t_max;
        match self.time_grid.spacing {
            Spacing::Linear => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
            Spacing::Log => {
                let mut grid = vec![0.0];
                let lo = (t_max / 1e6).ln();
                let hi = t_max.ln();
                for k in 0..(n - 1) {
                    grid.push((lo + (hi - lo) * k as f64 / (n - 2) as f64).exp());
                }
                grid
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
mode = "master"

[model]
kind = "two_level"
delta = 0.001
temperature = 1.0
couplingA = 0.02

[timeGrid]
t_max = 100.0
points = 11

[output]
directory = "out"
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(config.basis, Basis::Eigen);
        assert_eq!(config.initial_state.kind, InitialStateKind::Ground);
        assert_eq!(config.ensemble.count, 1);
        let grid = config.build_grid();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[10], 100.0);
    }

    #[test]
    fn missing_model_section_is_a_config_error() {
        let broken = MINIMAL.replace("[model]", "[not_model]");
        let err = ScenarioConfig::from_toml(&broken).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("model"), "message: {err}");
    }

    #[test]
    fn pm_basis_on_two_level_is_rejected() {
        let broken = MINIMAL.replace("mode = \"master\"", "mode = \"master\"\nbasis = \"pm\"");
        let err = ScenarioConfig::from_toml(&broken).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("pm"));
    }

    #[test]
    fn log_grid_spans_six_decades() {
        let cfg = MINIMAL.replace("points = 11", "points = 11\nspacing = \"log\"");
        let config = ScenarioConfig::from_toml(&cfg).unwrap();
        let grid = config.build_grid();
        assert_eq!(grid[0], 0.0);
        assert!((grid[1] - 1e-4).abs() < 1e-12);
        assert!((grid[10] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn round_trips_through_toml() {
        let config = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let text = toml::to_string(&config).unwrap();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back.time_grid.points, config.time_grid.points);
    }
}
