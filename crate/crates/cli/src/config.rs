//! TOML configuration for the `plan` and `simulate` subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};
use winplan_core::simulation::DEFAULT_REPLICATES;
use winplan_core::{derive_scenario_seed, Correlation, DesignSpec, EndpointAssumption, Scenario};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn default_ci_level() -> f64 {
    0.95
}

/// Endpoints come either as `[[endpoints]]` tables or as a `winps` list
/// sharing one `sd_ratio`.
fn resolve_endpoints(
    endpoints: &[EndpointAssumption],
    winps: &[f64],
    sd_ratio: Option<f64>,
) -> Result<Vec<EndpointAssumption>, CliError> {
    match (endpoints.is_empty(), winps.is_empty()) {
        (false, false) => Err(CliError::Validation(
            "give either `endpoints` or `winps`, not both".into(),
        )),
        (true, true) => Err(CliError::Validation(
            "no endpoints: set `winps` or `[[endpoints]]`".into(),
        )),
        (false, true) => {
            if sd_ratio.is_some() {
                return Err(CliError::Validation(
                    "`sd_ratio` at top level only applies to `winps`".into(),
                ));
            }
            Ok(endpoints.to_vec())
        }
        (true, false) => {
            let b = sd_ratio.unwrap_or(1.0);
            Ok(winps
                .iter()
                .map(|&w| EndpointAssumption::new(w, b))
                .collect())
        }
    }
}

/// Values to sweep for `plan`. Rows are generated with `alloc_ratio`
/// outermost and `correlation` innermost.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub alloc_ratio: Option<Vec<f64>>,
    pub sd_ratio: Option<Vec<f64>>,
    pub lower_bound: Option<Vec<f64>>,
    pub assurance: Option<Vec<f64>>,
    pub correlation: Option<Vec<f64>>,
}

impl Sweep {
    pub const FIELDS: [&'static str; 5] = [
        "alloc_ratio",
        "sd_ratio",
        "lower_bound",
        "assurance",
        "correlation",
    ];

    /// Applies a command-line override of the form `field=v1,v2,...`.
    pub fn set_from_arg(&mut self, arg: &str) -> Result<(), CliError> {
        let (field, values) = arg.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("sweep `{arg}` must look like field=v1,v2"))
        })?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    CliError::Validation(format!(
                        "sweep field `{field}` has non-numeric value `{v}`"
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let slot = match field.trim() {
            "alloc_ratio" => &mut self.alloc_ratio,
            "sd_ratio" => &mut self.sd_ratio,
            "lower_bound" => &mut self.lower_bound,
            "assurance" => &mut self.assurance,
            "correlation" => &mut self.correlation,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown sweep field `{other}`; expected one of {}",
                    Self::FIELDS.join(", ")
                )))
            }
        };
        *slot = Some(values);
        Ok(())
    }

    /// Cartesian product of the sweep applied to `base`.
    pub fn expand(&self, base: &DesignSpec) -> Vec<DesignSpec> {
        let mut designs = vec![base.clone()];
        let axis = |designs: Vec<DesignSpec>,
                    values: &Option<Vec<f64>>,
                    apply: &dyn Fn(&mut DesignSpec, f64)|
         -> Vec<DesignSpec> {
            match values {
                None => designs,
                Some(vs) => designs
                    .into_iter()
                    .flat_map(|d| {
                        vs.iter().map(move |&v| {
                            let mut d = d.clone();
                            apply(&mut d, v);
                            d
                        })
                    })
                    .collect(),
            }
        };
        designs = axis(designs, &self.alloc_ratio, &|d, v| d.alloc_ratio = v);
        designs = axis(designs, &self.sd_ratio, &|d, v| {
            d.endpoints.iter_mut().for_each(|e| e.sd_ratio = v)
        });
        designs = axis(designs, &self.lower_bound, &|d, v| d.lower_bound = v);
        designs = axis(designs, &self.assurance, &|d, v| d.assurance = v);
        designs = axis(designs, &self.correlation, &|d, v| {
            d.correlation = Correlation::Exchangeable(v)
        });
        designs
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default)]
    pub endpoints: Vec<EndpointAssumption>,
    #[serde(default)]
    pub winps: Vec<f64>,
    pub sd_ratio: Option<f64>,
    pub correlation: Correlation,
    pub lower_bound: f64,
    pub assurance: f64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[serde(default = "one")]
    pub alloc_ratio: f64,
    #[serde(default)]
    pub sweep: Sweep,
}

impl PlanConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn design(&self) -> Result<DesignSpec, CliError> {
        Ok(DesignSpec {
            endpoints: resolve_endpoints(&self.endpoints, &self.winps, self.sd_ratio)?,
            correlation: self.correlation.clone(),
            lower_bound: self.lower_bound,
            assurance: self.assurance,
            ci_level: self.ci_level,
            alloc_ratio: self.alloc_ratio,
        })
    }
}

/// A scalar or a list, for grid axes in `[[scenario]]` blocks.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Axis {
    One(f64),
    Many(Vec<f64>),
}

impl Axis {
    fn values(&self) -> Vec<f64> {
        match self {
            Axis::One(v) => vec![*v],
            Axis::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioBlock {
    label: Option<String>,
    winps: Vec<f64>,
    data_correlation: Axis,
    lower_bound: Axis,
    #[serde(default = "one_axis")]
    sd_ratio: Axis,
    #[serde(default = "one_axis")]
    alloc_ratio: Axis,
    assurance: Axis,
}

fn one_axis() -> Axis {
    Axis::One(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[serde(rename = "scenario", default)]
    blocks: Vec<ScenarioBlock>,
}

fn default_replicates() -> u64 {
    DEFAULT_REPLICATES
}

/// One expanded grid row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub index: usize,
    pub label: Option<String>,
    pub scenario: Scenario,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Expands every block in file order. Within a block the axes nest as
    /// data_correlation, lower_bound, sd_ratio, alloc_ratio, assurance
    /// (outermost first). Seeds come from the master seed and the row index.
    pub fn scenarios(&self) -> Result<Vec<GridRow>, CliError> {
        if self.replicates == 0 {
            return Err(CliError::Validation(
                "replicates = 0: at least 1 is required".into(),
            ));
        }
        let mut rows = Vec::new();
        for block in &self.blocks {
            if block.winps.is_empty() {
                return Err(CliError::Validation("scenario `winps` is empty".into()));
            }
            for rho in block.data_correlation.values() {
                for lb in block.lower_bound.values() {
                    for b in block.sd_ratio.values() {
                        for r in block.alloc_ratio.values() {
                            for a in block.assurance.values() {
                                let index = rows.len();
                                let design = DesignSpec {
                                    endpoints: block
                                        .winps
                                        .iter()
                                        .map(|&w| EndpointAssumption::new(w, b))
                                        .collect(),
                                    correlation: Correlation::Exchangeable(rho),
                                    lower_bound: lb,
                                    assurance: a,
                                    ci_level: self.ci_level,
                                    alloc_ratio: r,
                                };
                                rows.push(GridRow {
                                    index,
                                    label: block.label.clone(),
                                    scenario: Scenario {
                                        design,
                                        data_correlation: rho,
                                        replicates: self.replicates,
                                        seed: derive_scenario_seed(self.master_seed, index as u64),
                                    },
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(rows)
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}
