//! Monte Carlo check of the planning formula.
//!
//! Each scenario is sized with [`required_sample_size`], then replicated:
//! correlated normal outcomes are drawn for both arms, analysed with the
//! DeLong method and summarised by how often the logit interval covers the
//! true global WinP (coverage) and how often its lower limit reaches the
//! planned bound (assurance).
//!
//! Every replicate draws from its own ChaCha8 stream keyed by the scenario
//! seed, with the replicate index as the stream number, so results do not
//! depend on how rayon schedules the work.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimation::{analyze, TrialData};
use crate::planning::{
    mean_diff_from_winp, required_sample_size, Correlation, DesignSpec, EndpointAssumption,
};
use crate::special::quantile;

pub const DEFAULT_REPLICATES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Planning inputs. The correlation used for sizing is replaced by
    /// `data_correlation`.
    pub design: DesignSpec,
    /// Exchangeable correlation between endpoint outcomes.
    pub data_correlation: f64,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub n_treated: u64,
    pub n_control: u64,
    pub n_total_used: u64,
    pub true_global_winp: f64,
    pub replicates: u64,
    /// Percentage of intervals containing the true global WinP.
    pub empirical_coverage: f64,
    /// Percentage of lower limits at or above the planned bound.
    pub empirical_assurance: f64,
    /// Replicates whose global estimate was exactly 0 or 1; excluded from
    /// both percentages.
    pub degenerate_count: u64,
    pub mean_ci_lower: f64,
}

/// Lower-triangular factor of the exchangeable correlation matrix.
pub fn exchangeable_cholesky(endpoints: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    let err = Error::NotPositiveDefinite { rho, endpoints };
    if !(rho > -1.0 && rho < 1.0) {
        return Err(err);
    }
    let mut l = vec![vec![0.0; endpoints]; endpoints];
    for i in 0..endpoints {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { rho };
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let d = target - s;
                if d <= 0.0 {
                    return Err(err);
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (target - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Draws two-arm trials with normal outcomes.
///
/// Control outcomes are `N(0, 1)` on every endpoint; treated outcomes on
/// endpoint `k` have sd `1 / B_k` and the mean shift that makes the endpoint
/// WinP equal the planned one. Both arms share the exchangeable correlation
/// on the standardized scale.
#[derive(Debug, Clone)]
pub struct TrialGenerator {
    n_treated: usize,
    n_control: usize,
    means: Vec<f64>,
    sds: Vec<f64>,
    factor: Vec<Vec<f64>>,
}

impl TrialGenerator {
    pub fn new(
        n_treated: usize,
        n_control: usize,
        endpoints: &[EndpointAssumption],
        data_correlation: f64,
    ) -> Result<Self> {
        if endpoints.is_empty() {
            return Err(Error::InvalidInput(
                "at least one endpoint is required".into(),
            ));
        }
        if n_treated < 2 || n_control < 2 {
            return Err(Error::InvalidInput(format!(
                "arm sizes {n_treated} and {n_control} must both be at least 2"
            )));
        }
        let factor = exchangeable_cholesky(endpoints.len(), data_correlation)?;
        let mut means = Vec::with_capacity(endpoints.len());
        let mut sds = Vec::with_capacity(endpoints.len());
        for e in endpoints {
            if !(e.sd_ratio > 0.0 && e.sd_ratio.is_finite()) {
                return Err(domain("sd_ratio", e.sd_ratio, "must be positive"));
            }
            let sd = 1.0 / e.sd_ratio;
            means.push(mean_diff_from_winp(e.winp, sd, 1.0)?);
            sds.push(sd);
        }
        Ok(Self {
            n_treated,
            n_control,
            means,
            sds,
            factor,
        })
    }

    pub fn treated_means(&self) -> &[f64] {
        &self.means
    }

    pub fn treated_sds(&self) -> &[f64] {
        &self.sds
    }

    pub fn generate<R: RngCore>(&self, rng: &mut R) -> TrialData {
        let k = self.means.len();
        let mut treated = vec![Vec::with_capacity(self.n_treated); k];
        let mut control = vec![Vec::with_capacity(self.n_control); k];
        let mut iid = vec![0.0; k];
        let mut z = vec![0.0; k];
        for _ in 0..self.n_treated {
            self.correlated(rng, &mut iid, &mut z);
            for (e, col) in treated.iter_mut().enumerate() {
                col.push(self.means[e] + self.sds[e] * z[e]);
            }
        }
        for _ in 0..self.n_control {
            self.correlated(rng, &mut iid, &mut z);
            for (e, col) in control.iter_mut().enumerate() {
                col.push(z[e]);
            }
        }
        TrialData::from_columns(treated, control).expect("generator emits valid trial data")
    }

    fn correlated<R: RngCore>(&self, rng: &mut R, iid: &mut [f64], out: &mut [f64]) {
        for v in iid.iter_mut() {
            *v = standard_normal(rng);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|j| self.factor[i][j] * iid[j]).sum();
        }
    }
}

/// Inverse-CDF normal deviate from a uniform on the open unit interval.
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE;
    quantile(u)
}

/// One trial at the given sizes; see [`TrialGenerator`].
pub fn generate_trial<R: RngCore>(
    n_treated: usize,
    n_control: usize,
    endpoints: &[EndpointAssumption],
    data_correlation: f64,
    rng: &mut R,
) -> Result<TrialData> {
    Ok(TrialGenerator::new(n_treated, n_control, endpoints, data_correlation)?.generate(rng))
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the scenario at `index` of a grid run under `master_seed`.
pub fn derive_scenario_seed(master_seed: u64, index: u64) -> u64 {
    mix(mix(master_seed) ^ index)
}

/// Random stream for one replicate of a scenario.
pub fn replicate_rng(scenario_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
    rng.set_stream(replicate);
    rng
}

enum Outcome {
    Interval { lower: f64, upper: f64 },
    Degenerate,
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioResult> {
    if scenario.replicates == 0 {
        return Err(domain("replicates", 0.0, "must be at least 1"));
    }
    let design = DesignSpec {
        correlation: Correlation::Exchangeable(scenario.data_correlation),
        ..scenario.design.clone()
    };
    let k = design.endpoints.len();
    // Positive definiteness is checked before sizing so the error names it.
    exchangeable_cholesky(k, scenario.data_correlation)?;
    let plan = required_sample_size(&design)?;
    let generator = TrialGenerator::new(
        plan.n_treated as usize,
        plan.n_control as usize,
        &design.endpoints,
        scenario.data_correlation,
    )?;
    let truth = design.global_winp();
    let level = design.ci_level;

    let outcomes = (0..scenario.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(scenario.seed, rep);
            let data = generator.generate(&mut rng);
            match analyze(&data, level) {
                Ok(a) => Ok(Outcome::Interval {
                    lower: a.ci_lower,
                    upper: a.ci_upper,
                }),
                Err(Error::DegenerateEstimate(_)) => Ok(Outcome::Degenerate),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut covered = 0u64;
    let mut assured = 0u64;
    let mut degenerate = 0u64;
    let mut lower_sum = 0.0;
    for o in &outcomes {
        match *o {
            Outcome::Interval { lower, upper } => {
                covered += u64::from(lower <= truth && truth <= upper);
                assured += u64::from(lower >= design.lower_bound);
                lower_sum += lower;
            }
            Outcome::Degenerate => degenerate += 1,
        }
    }
    let valid = scenario.replicates - degenerate;
    if valid == 0 {
        return Err(Error::InvalidInput(
            "every replicate produced a degenerate estimate".into(),
        ));
    }
    let pct = |count: u64| 100.0 * count as f64 / valid as f64;
    Ok(ScenarioResult {
        n_treated: plan.n_treated,
        n_control: plan.n_control,
        n_total_used: plan.n_total,
        true_global_winp: truth,
        replicates: scenario.replicates,
        empirical_coverage: pct(covered),
        empirical_assurance: pct(assured),
        degenerate_count: degenerate,
        mean_ci_lower: lower_sum / valid as f64,
    })
}

/// Runs every scenario in order; a failing scenario yields an `Err` row and
/// the grid carries on.
pub fn run_grid(scenarios: &[Scenario]) -> Vec<Result<ScenarioResult>> {
    run_grid_with_progress(scenarios, |_, _| {})
}

/// As [`run_grid`], calling `progress(index, result)` after each scenario.
pub fn run_grid_with_progress<F>(
    scenarios: &[Scenario],
    mut progress: F,
) -> Vec<Result<ScenarioResult>>
where
    F: FnMut(usize, &Result<ScenarioResult>),
{
    scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = run_scenario(s);
            progress(i, &r);
            r
        })
        .collect()
}
