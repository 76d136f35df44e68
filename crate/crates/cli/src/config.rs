//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use har_core::alasso::{BudgetGrid, Criterion, SelectionOptions};
use har_core::data::{ModelSpec, TimeSeriesPanel, TransformKind};
use har_core::ncqr::QuantileGrid;
use har_core::risk_metrics::RiskOptions;
use har_core::spillover::SpilloverOptions;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDirective {
    pub column: String,
    pub kind: TransformKind,
}

/// A model without its horizon; one is instantiated per configured horizon.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntry {
    pub name: String,
    pub target: String,
    pub regressors: Vec<String>,
    #[serde(default)]
    pub unpenalized: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Explicit budgets; overrides the generated grid.
    pub values: Option<Vec<f64>>,
    pub grid_points: usize,
    pub refine_points: usize,
    pub criterion: Criterion,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let d = SelectionOptions::default();
        Self {
            values: None,
            grid_points: d.grid_points,
            refine_points: d.refine_points,
            criterion: d.criterion,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub length: usize,
    pub file_name: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 120,
            file_name: "synthetic_panel.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SpilloverConfig {
    #[serde(flatten)]
    pub var: SpilloverOptions,
    pub sri_column: String,
    /// Model whose ES and EL enter the VAR; defaults to the first spec.
    pub model: Option<String>,
}

impl Default for SpilloverConfig {
    fn default() -> Self {
        Self {
            var: SpilloverOptions::default(),
            sri_column: "sri".into(),
            model: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transforms: Vec<TransformDirective>,
    #[serde(default)]
    pub specs: Vec<SpecEntry>,
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default = "default_initial_size")]
    pub initial_size: usize,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub risk: RiskOptions,
    #[serde(default)]
    pub spillover: SpilloverConfig,
    #[serde(default)]
    pub synth: SynthConfig,
}

fn default_date_column() -> String {
    "date".into()
}

fn default_horizons() -> Vec<usize> {
    vec![1]
}

fn default_initial_size() -> usize {
    50
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes")
    }
}

impl RunConfig {
    /// Parses `path`; relative data and output paths are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data = cfg.data.map(|p| base.join(p));
        cfg.out_dir = cfg.out_dir.map(|p| base.join(p));
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<QuantileGrid, CliError> {
        match &self.taus {
            Some(t) => QuantileGrid::new(t.clone()).map_err(|e| CliError::Validation(format!("taus: {e}"))),
            None => Ok(QuantileGrid::deciles()),
        }
    }

    pub fn selection(&self) -> Result<SelectionOptions, CliError> {
        let budgets = match &self.budget.values {
            Some(v) => Some(BudgetGrid::new(v.clone()).map_err(|e| CliError::Validation(format!("budget.values: {e}")))?),
            None => None,
        };
        if self.budget.grid_points == 0 {
            return Err(CliError::Validation("budget.grid_points: must be positive".into()));
        }
        Ok(SelectionOptions {
            budgets,
            grid_points: self.budget.grid_points,
            refine_points: self.budget.refine_points,
            criterion: self.budget.criterion,
        })
    }

    /// Checks everything that can be checked before estimation, reporting
    /// the offending field.
    pub fn validate(&self, panel: &TimeSeriesPanel) -> Result<(), CliError> {
        self.grid()?;
        self.selection()?;
        if self.specs.is_empty() {
            return Err(CliError::Validation("specs: at least one model is required".into()));
        }
        if self.horizons.is_empty() {
            return Err(CliError::Validation("horizons: at least one horizon is required".into()));
        }
        if let Some(i) = self.horizons.iter().position(|h| *h == 0) {
            return Err(CliError::Validation(format!("horizons[{i}]: must be positive")));
        }
        if self.initial_size == 0 {
            return Err(CliError::Validation("initial_size: must be positive".into()));
        }
        for (i, s) in self.specs.iter().enumerate() {
            if self.specs[..i].iter().any(|o| o.name == s.name) {
                return Err(CliError::Validation(format!("specs[{i}].name: `{}` used twice", s.name)));
            }
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(CliError::Validation(format!(
                    "specs[{i}].name: `{}` must be non-empty ASCII letters, digits, `_` or `-`",
                    s.name
                )));
            }
            self.model_spec(s, self.horizons[0])
                .validate(panel)
                .map_err(|e| CliError::Validation(format!("specs[{i}] ({}): {e}", s.name)))?;
        }
        self.risk.validate().map_err(|e| CliError::Validation(format!("risk: {e}")))?;
        let sp = &self.spillover;
        if sp.var.horizon == 0 {
            return Err(CliError::Validation("spillover.horizon: must be positive".into()));
        }
        if let Some(m) = &sp.model {
            if !self.specs.iter().any(|s| &s.name == m) {
                return Err(CliError::Validation(format!("spillover.model: no spec named `{m}`")));
            }
        }
        Ok(())
    }

    pub fn model_spec(&self, entry: &SpecEntry, horizon: usize) -> ModelSpec {
        ModelSpec {
            name: entry.name.clone(),
            target: entry.target.clone(),
            regressors: entry.regressors.clone(),
            unpenalized: entry.unpenalized.clone(),
            horizon,
        }
    }

    /// Every (spec, horizon) pair in configuration order.
    pub fn runs(&self) -> Vec<ModelSpec> {
        self.specs
            .iter()
            .flat_map(|s| self.horizons.iter().map(move |h| self.model_spec(s, *h)))
            .collect()
    }

    pub fn spillover_spec(&self) -> &SpecEntry {
        match &self.spillover.model {
            Some(m) => self.specs.iter().find(|s| &s.name == m).expect("validated"),
            None => &self.specs[0],
        }
    }
}
