//! Win probability estimation from subject-level two-arm data.
//!
//! Endpoint WinPs are Mann-Whitney proportions with ties scored one half.
//! Their joint covariance comes from DeLong structural components: for a
//! treated subject, the mean win score against every control subject; for a
//! control subject, the mean loss score against every treated subject.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{expit, logit, quantile};

/// Outcomes for a two-arm trial, stored endpoint by endpoint. Higher values
/// are better on every endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    treated: Vec<Vec<f64>>,
    control: Vec<Vec<f64>>,
}

impl TrialData {
    /// Builds trial data from per-endpoint columns: `treated[k][i]` is the
    /// outcome of treated subject `i` on endpoint `k`.
    pub fn from_columns(treated: Vec<Vec<f64>>, control: Vec<Vec<f64>>) -> Result<Self> {
        if treated.is_empty() {
            return Err(Error::InvalidInput(
                "at least one endpoint is required".into(),
            ));
        }
        if treated.len() != control.len() {
            return Err(Error::InvalidInput(format!(
                "treated arm has {} endpoints but control arm has {}",
                treated.len(),
                control.len()
            )));
        }
        check_arm("treated", &treated)?;
        check_arm("control", &control)?;
        Ok(Self { treated, control })
    }

    /// Builds trial data from subject rows: `treated[i][k]`.
    pub fn from_rows(treated: &[Vec<f64>], control: &[Vec<f64>]) -> Result<Self> {
        let endpoints = treated.first().map_or(0, Vec::len);
        let transpose = |arm: &str, rows: &[Vec<f64>]| -> Result<Vec<Vec<f64>>> {
            let mut cols = vec![Vec::with_capacity(rows.len()); endpoints];
            for (i, row) in rows.iter().enumerate() {
                if row.len() != endpoints {
                    return Err(Error::InvalidInput(format!(
                        "{arm} subject {i} has {} outcomes, expected {endpoints}",
                        row.len()
                    )));
                }
                for (col, &v) in cols.iter_mut().zip(row) {
                    col.push(v);
                }
            }
            Ok(cols)
        };
        Self::from_columns(
            transpose("treated", treated)?,
            transpose("control", control)?,
        )
    }

    pub fn endpoints(&self) -> usize {
        self.treated.len()
    }

    pub fn n_treated(&self) -> usize {
        self.treated[0].len()
    }

    pub fn n_control(&self) -> usize {
        self.control[0].len()
    }

    pub fn treated(&self, endpoint: usize) -> &[f64] {
        &self.treated[endpoint]
    }

    pub fn control(&self, endpoint: usize) -> &[f64] {
        &self.control[endpoint]
    }

    /// The same data with the arm labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            treated: self.control.clone(),
            control: self.treated.clone(),
        }
    }
}

fn check_arm(arm: &str, cols: &[Vec<f64>]) -> Result<()> {
    let size = cols[0].len();
    if size < 2 {
        return Err(Error::InvalidInput(format!(
            "{arm} arm has {size} subjects; at least 2 are required"
        )));
    }
    for (k, col) in cols.iter().enumerate() {
        if col.len() != size {
            return Err(Error::InvalidInput(format!(
                "{arm} endpoint {k} has {} subjects, expected {size}",
                col.len()
            )));
        }
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{arm} endpoint {k} subject {i} is not finite ({})",
                col[i]
            )));
        }
    }
    Ok(())
}

#[inline]
fn win_score(treated: f64, control: f64) -> f64 {
    if treated > control {
        1.0
    } else if treated == control {
        0.5
    } else {
        0.0
    }
}

/// Proportion of (treated, control) pairs the treated subject wins, with
/// ties counted as half a win.
pub fn winp_point(treated: &[f64], control: &[f64]) -> Result<f64> {
    if treated.is_empty() || control.is_empty() {
        return Err(Error::InvalidInput(
            "both arms need at least one subject".into(),
        ));
    }
    if let Some(&v) = treated.iter().chain(control).find(|v| !v.is_finite()) {
        return Err(domain("outcome", v, "must be finite"));
    }
    let total: f64 = treated
        .iter()
        .map(|&t| control.iter().map(|&c| win_score(t, c)).sum::<f64>())
        .sum();
    Ok(total / (treated.len() as f64 * control.len() as f64))
}

/// Endpoint WinP estimates with their DeLong covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeLongEstimate {
    pub per_endpoint: Vec<f64>,
    /// Variances on the diagonal, between-endpoint covariances off it.
    pub covariance: Vec<Vec<f64>>,
}

/// Per-endpoint structural components.
struct Components {
    winp: f64,
    treated: Vec<f64>,
    control: Vec<f64>,
}

fn components(treated: &[f64], control: &[f64]) -> Components {
    let (m, n) = (treated.len(), control.len());
    let mut treated_wins = vec![0.0; m];
    let mut control_losses = vec![0.0; n];
    for (i, &t) in treated.iter().enumerate() {
        let mut row = 0.0;
        for (j, &c) in control.iter().enumerate() {
            let s = win_score(t, c);
            row += s;
            control_losses[j] += s;
        }
        treated_wins[i] = row;
    }
    // Half-integer sums are exact, so this matches `winp_point` bit for bit.
    let total: f64 = treated_wins.iter().sum();
    let winp = total / (m as f64 * n as f64);
    treated_wins.iter_mut().for_each(|v| *v /= n as f64);
    control_losses.iter_mut().for_each(|v| *v /= m as f64);
    Components {
        winp,
        treated: treated_wins,
        control: control_losses,
    }
}

fn sample_cov(a: &[f64], mean_a: f64, b: &[f64], mean_b: f64) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - mean_a) * (y - mean_b))
        .sum();
    s / (a.len() - 1) as f64
}

/// DeLong point and covariance estimates for every endpoint.
///
/// `cov(k, l) = S10(k, l) / m + S01(k, l) / n`, where `S10` and `S01` are the
/// sample covariances (divisors `m - 1` and `n - 1`) of the treated-side and
/// control-side structural components.
pub fn delong_analysis(data: &TrialData) -> DeLongEstimate {
    let k = data.endpoints();
    let m = data.n_treated() as f64;
    let n = data.n_control() as f64;
    let comps: Vec<Components> = (0..k)
        .map(|e| components(data.treated(e), data.control(e)))
        .collect();

    let mut covariance = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let (ca, cb) = (&comps[a], &comps[b]);
            let s10 = sample_cov(&ca.treated, ca.winp, &cb.treated, cb.winp);
            let s01 = sample_cov(&ca.control, ca.winp, &cb.control, cb.winp);
            let v = s10 / m + s01 / n;
            covariance[a][b] = v;
            covariance[b][a] = v;
        }
    }
    DeLongEstimate {
        per_endpoint: comps.iter().map(|c| c.winp).collect(),
        covariance,
    }
}

/// Global WinP (mean of endpoint WinPs) and its variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalWinP {
    pub estimate: f64,
    pub variance: f64,
}

pub fn global_winp(est: &DeLongEstimate) -> GlobalWinP {
    let k = est.per_endpoint.len() as f64;
    let estimate = est.per_endpoint.iter().sum::<f64>() / k;
    let total: f64 = est.covariance.iter().flatten().sum();
    GlobalWinP {
        estimate,
        variance: total / (k * k),
    }
}

/// Two-sided confidence interval built on the logit scale and mapped back.
pub fn logit_ci(estimate: f64, variance: f64, level: f64) -> Result<(f64, f64)> {
    if estimate == 0.0 || estimate == 1.0 {
        return Err(Error::DegenerateEstimate(estimate));
    }
    if !(estimate > 0.0 && estimate < 1.0) {
        return Err(domain("estimate", estimate, "must lie in (0, 1)"));
    }
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(domain(
            "variance",
            variance,
            "must be finite and nonnegative",
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("level", level, "must lie strictly between 0 and 1"));
    }
    let z = quantile(1.0 - (1.0 - level) / 2.0);
    let centre = logit(estimate)?;
    let half = z * variance.sqrt() / (estimate * (1.0 - estimate));
    Ok((expit(centre - half), expit(centre + half)))
}

/// Correlations between endpoint WinP estimates.
pub fn winp_correlations(covariance: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(index) = covariance
        .iter()
        .enumerate()
        .position(|(i, row)| !(row[i] > 0.0))
    {
        return Err(Error::DegenerateVariance { index });
    }
    Ok(covariance
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| {
                    if i == j {
                        1.0
                    } else {
                        c / (covariance[i][i] * covariance[j][j]).sqrt()
                    }
                })
                .collect()
        })
        .collect())
}

/// Full analysis of one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinPAnalysis {
    pub per_endpoint: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub global_estimate: f64,
    pub global_variance: f64,
    pub ci_level: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// Runs the DeLong analysis, aggregates to the global WinP and attaches the
/// logit interval at `level`. Fails with [`Error::DegenerateEstimate`] when
/// the global estimate is exactly 0 or 1.
pub fn analyze(data: &TrialData, level: f64) -> Result<WinPAnalysis> {
    let est = delong_analysis(data);
    let global = global_winp(&est);
    let (ci_lower, ci_upper) = logit_ci(global.estimate, global.variance, level)?;
    Ok(WinPAnalysis {
        per_endpoint: est.per_endpoint,
        covariance: est.covariance,
        global_estimate: global.estimate,
        global_variance: global.variance,
        ci_level: level,
        ci_lower,
        ci_upper,
    })
}
