//! Planning and estimation for the global win probability of a
//! multi-endpoint two-arm trial.
//!
//! - [`special`]: standard normal functions and the logit pair.
//! - [`estimation`]: endpoint WinPs, DeLong covariances, global WinP and its
//!   logit interval.
//! - [`planning`]: closed-form total sample size with assurance.
//! - [`simulation`]: Monte Carlo coverage and assurance of planned designs.

pub mod error;
pub mod estimation;
pub mod planning;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use estimation::{
    analyze, delong_analysis, global_winp, logit_ci, winp_correlations, winp_point, DeLongEstimate,
    GlobalWinP, TrialData, WinPAnalysis,
};
pub use planning::{
    f_endpoint, f_global, mean_diff_from_winp, required_sample_size, winp_from_normal_means,
    Correlation, DesignResult, DesignSpec, EndpointAssumption,
};
pub use simulation::{
    derive_scenario_seed, generate_trial, run_grid, run_grid_with_progress, run_scenario, Scenario,
    ScenarioResult, TrialGenerator,
};
pub use special::{expit, logit, normal_cdf, normal_pdf, normal_quantile};
