//! Subcommand bodies. Each one builds a report value; rendering to text or
//! records happens in [`crate::report`] from that same value.

use std::path::Path;

use serde::Serialize;
use winplan_core::{
    delong_analysis, global_winp, logit_ci, required_sample_size, run_grid_with_progress,
    winp_correlations, DesignResult, DesignSpec, Error, Scenario, ScenarioResult,
};

use crate::config::{GridRow, PlanConfig, SimConfig, Sweep};
use crate::data::Dataset;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct PlanRow {
    pub design: DesignSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<DesignResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub base: DesignSpec,
    pub sweep: Sweep,
    pub rows: Vec<PlanRow>,
}

impl PlanReport {
    /// First failing row as an error, if any.
    pub fn failure(&self) -> Option<CliError> {
        self.rows
            .iter()
            .find_map(|r| r.error.as_ref())
            .map(|e| CliError::Validation(e.clone()))
    }
}

/// Sizes the configured design, or every design in its sweep. Command-line
/// sweeps (`field=v1,v2`) replace the config's values for that field.
pub fn plan(config: &PlanConfig, sweeps: &[String]) -> Result<PlanReport, CliError> {
    let base = config.design()?;
    let mut sweep = config.sweep.clone();
    for s in sweeps {
        sweep.set_from_arg(s)?;
    }
    let rows = sweep
        .expand(&base)
        .into_iter()
        .map(|design| match required_sample_size(&design) {
            Ok(r) => PlanRow {
                design,
                result: Some(r),
                error: None,
            },
            Err(e) => PlanRow {
                design,
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(PlanReport { base, sweep, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateConfig {
    pub data: String,
    pub arm_column: String,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub config: EstimateConfig,
    pub endpoints: Vec<String>,
    pub n_treated: usize,
    pub n_control: usize,
    pub per_endpoint: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// `None` when some endpoint has zero estimated variance.
    pub correlations: Option<Vec<Vec<f64>>>,
    pub global_estimate: f64,
    pub global_variance: f64,
    pub ci_level: f64,
    /// `None` when the global estimate is exactly 0 or 1.
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
}

pub fn estimate(
    dataset: &Dataset,
    data_path: &Path,
    arm_column: &str,
    level: f64,
) -> Result<EstimateReport, CliError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Validation(format!(
            "level = {level} must lie strictly between 0 and 1"
        )));
    }
    let est = delong_analysis(&dataset.data);
    let global = global_winp(&est);
    let correlations = winp_correlations(&est.covariance).ok();
    let ci = match logit_ci(global.estimate, global.variance, level) {
        Ok(ci) => Some(ci),
        Err(Error::DegenerateEstimate(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(EstimateReport {
        config: EstimateConfig {
            data: data_path.display().to_string(),
            arm_column: arm_column.to_string(),
            level,
        },
        endpoints: dataset.endpoint_names.clone(),
        n_treated: dataset.data.n_treated(),
        n_control: dataset.data.n_control(),
        per_endpoint: est.per_endpoint,
        covariance: est.covariance,
        correlations,
        global_estimate: global.estimate,
        global_variance: global.variance,
        ci_level: level,
        ci_lower: ci.map(|c| c.0),
        ci_upper: ci.map(|c| c.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ScenarioResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub master_seed: u64,
    pub replicates: u64,
    pub ci_level: f64,
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn failure(&self) -> Option<CliError> {
        self.rows
            .iter()
            .find_map(|r| r.error.as_ref().map(|e| (r.index, e)))
            .map(|(i, e)| CliError::Validation(format!("scenario {i}: {e}")))
    }
}

/// Resolves overrides and runs the grid; `progress` is called once per
/// finished scenario with its index and the grid size.
pub fn simulate<F>(
    mut config: SimConfig,
    replicates: Option<u64>,
    seed: Option<u64>,
    mut progress: F,
) -> Result<SimReport, CliError>
where
    F: FnMut(usize, usize, &Result<ScenarioResult, Error>),
{
    if let Some(r) = replicates {
        config.replicates = r;
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    let grid: Vec<GridRow> = config.scenarios()?;
    let scenarios: Vec<Scenario> = grid.iter().map(|g| g.scenario.clone()).collect();
    let total = scenarios.len();
    let results = run_grid_with_progress(&scenarios, |i, r| progress(i, total, r));
    let rows = grid
        .into_iter()
        .zip(results)
        .map(|(g, r)| {
            let (result, error) = match r {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SimRow {
                index: g.index,
                label: g.label,
                scenario: g.scenario,
                result,
                error,
            }
        })
        .collect();
    Ok(SimReport {
        master_seed: config.master_seed,
        replicates: config.replicates,
        ci_level: config.ci_level,
        rows,
    })
}
