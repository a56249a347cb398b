//! Closed-form sample size for estimating the global WinP with assurance.
//!
//! The total size is
//!
//! ```text
//! n = {(z_β + z_{α/2}) / (logit θ − logit θ₀)}² · f(θ) / {θ²(1 − θ)²} · π/3
//! ```
//!
//! where `f(θ)` aggregates the per-endpoint normal-theory variance factors
//! `f⁽ᵏ⁾` through the between-WinP correlations, and `π/3` accounts for the
//! efficiency lost by analysing nonparametrically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{cdf, logit, pdf, quantile};

fn one() -> f64 {
    1.0
}

fn default_ci_level() -> f64 {
    0.95
}

/// Planned effect on one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointAssumption {
    /// Planned endpoint WinP.
    pub winp: f64,
    /// Control-arm SD divided by treated-arm SD.
    #[serde(default = "one")]
    pub sd_ratio: f64,
}

impl EndpointAssumption {
    pub fn new(winp: f64, sd_ratio: f64) -> Self {
        Self { winp, sd_ratio }
    }

    fn validate(&self) -> Result<()> {
        if !(self.winp > 0.0 && self.winp < 1.0) {
            return Err(domain(
                "winp",
                self.winp,
                "must lie strictly between 0 and 1",
            ));
        }
        if !(self.sd_ratio > 0.0 && self.sd_ratio.is_finite()) {
            return Err(domain("sd_ratio", self.sd_ratio, "must be positive"));
        }
        Ok(())
    }
}

/// Between-endpoint correlations: one exchangeable value or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Correlation {
    Exchangeable(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Correlation {
    /// Resolves to a validated `k × k` matrix.
    pub fn matrix(&self, k: usize) -> Result<Vec<Vec<f64>>> {
        let m = match self {
            Correlation::Exchangeable(rho) => {
                if !(-1.0..=1.0).contains(rho) {
                    return Err(domain("correlation", *rho, "must lie in [-1, 1]"));
                }
                (0..k)
                    .map(|i| (0..k).map(|j| if i == j { 1.0 } else { *rho }).collect())
                    .collect()
            }
            Correlation::Matrix(m) => m.clone(),
        };
        if m.len() != k || m.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidInput(format!(
                "correlation matrix must be {k} x {k}"
            )));
        }
        for i in 0..k {
            if m[i][i] != 1.0 {
                return Err(domain("correlation diagonal", m[i][i], "must equal 1"));
            }
            for j in 0..k {
                if !(-1.0..=1.0).contains(&m[i][j]) {
                    return Err(domain("correlation", m[i][j], "must lie in [-1, 1]"));
                }
                if m[i][j] != m[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "correlation matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }
}

/// Everything needed to size a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub endpoints: Vec<EndpointAssumption>,
    pub correlation: Correlation,
    /// Smallest acceptable lower confidence limit, θ₀.
    pub lower_bound: f64,
    /// Probability that the lower limit reaches `lower_bound`.
    pub assurance: f64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Control size divided by treated size.
    #[serde(default = "one")]
    pub alloc_ratio: f64,
}

impl DesignSpec {
    /// Planned global WinP: the mean of the endpoint WinPs.
    pub fn global_winp(&self) -> f64 {
        self.endpoints.iter().map(|e| e.winp).sum::<f64>() / self.endpoints.len() as f64
    }

    /// Checks every field; reports the first offending one.
    pub fn validate(&self) -> Result<()> {
        if self.endpoints.is_empty() {
            return Err(Error::InvalidInput(
                "at least one endpoint is required".into(),
            ));
        }
        for e in &self.endpoints {
            e.validate()?;
        }
        self.correlation.matrix(self.endpoints.len())?;
        for (name, v) in [
            ("lower_bound", self.lower_bound),
            ("assurance", self.assurance),
            ("ci_level", self.ci_level),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(domain(name, v, "must lie strictly between 0 and 1"));
            }
        }
        if !(self.alloc_ratio > 0.0 && self.alloc_ratio.is_finite()) {
            return Err(domain("alloc_ratio", self.alloc_ratio, "must be positive"));
        }
        let theta = self.global_winp();
        if theta <= self.lower_bound {
            return Err(Error::Infeasible {
                theta,
                lower_bound: self.lower_bound,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    /// Unrounded total size.
    pub raw_n: f64,
    pub n_treated: u64,
    pub n_control: u64,
    pub n_total: u64,
    /// Aggregated variance factor f(θ).
    pub f_value: f64,
    pub global_winp: f64,
}

/// Normal-theory variance factor for one endpoint at allocation ratio `r`.
pub fn f_endpoint(assumption: &EndpointAssumption, alloc_ratio: f64) -> Result<f64> {
    assumption.validate()?;
    if !(alloc_ratio > 0.0 && alloc_ratio.is_finite()) {
        return Err(domain("alloc_ratio", alloc_ratio, "must be positive"));
    }
    let r = alloc_ratio;
    let z = quantile(assumption.winp);
    let b2 = assumption.sd_ratio * assumption.sd_ratio;
    let density = pdf(z);
    let bracket = z * z / ((1.0 + b2) * (1.0 + b2)) * (r + 1.0 + (r + 1.0) * b2 * b2 / r)
        + 2.0 * (r + 1.0) / (1.0 + b2)
        + 2.0 * (r + 1.0) * b2 / (r * (1.0 + b2));
    Ok(0.5 * density * density * bracket)
}

/// `f(θ) = sᵀ R s / K²` with `s_k = √f⁽ᵏ⁾`.
pub fn f_global(spec: &DesignSpec) -> Result<f64> {
    let k = spec.endpoints.len();
    if k == 0 {
        return Err(Error::InvalidInput(
            "at least one endpoint is required".into(),
        ));
    }
    let rho = spec.correlation.matrix(k)?;
    let roots = spec
        .endpoints
        .iter()
        .map(|e| f_endpoint(e, spec.alloc_ratio).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for i in 0..k {
        total += roots[i] * roots[i];
        for j in (i + 1)..k {
            total += 2.0 * rho[i][j] * roots[i] * roots[j];
        }
    }
    Ok(total / (k * k) as f64)
}

/// Total and per-arm sample sizes so that the lower confidence limit of the
/// global WinP reaches `lower_bound` with probability `assurance`.
///
/// Arms are rounded up separately from the continuous total:
/// `ceil(n / (r + 1))` treated and `ceil(r n / (r + 1))` control.
pub fn required_sample_size(spec: &DesignSpec) -> Result<DesignResult> {
    spec.validate()?;
    let theta = spec.global_winp();
    let f_value = f_global(spec)?;
    let z_assurance = quantile(spec.assurance);
    let z_level = quantile(1.0 - (1.0 - spec.ci_level) / 2.0);
    let gap = logit(theta)? - logit(spec.lower_bound)?;
    let scale = (z_assurance + z_level) / gap;
    let raw_n =
        scale * scale * f_value / (theta * theta * (1.0 - theta) * (1.0 - theta)) * PI / 3.0;

    let r = spec.alloc_ratio;
    let n_treated = (raw_n / (r + 1.0)).ceil() as u64;
    let n_control = (r * raw_n / (r + 1.0)).ceil() as u64;
    Ok(DesignResult {
        raw_n,
        n_treated,
        n_control,
        n_total: n_treated + n_control,
        f_value,
        global_winp: theta,
    })
}

fn check_sd(name: &'static str, sd: f64) -> Result<()> {
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(domain(name, sd, "must be positive"));
    }
    Ok(())
}

/// WinP of `N(μ₁, σ₁²)` over `N(μ₀, σ₀²)`: `Φ(Δ / √(σ₁² + σ₀²))`.
pub fn winp_from_normal_means(mean_diff: f64, sd_treated: f64, sd_control: f64) -> Result<f64> {
    check_sd("sd_treated", sd_treated)?;
    check_sd("sd_control", sd_control)?;
    if !mean_diff.is_finite() {
        return Err(domain("mean_diff", mean_diff, "must be finite"));
    }
    Ok(cdf(mean_diff / sd_treated.hypot(sd_control)))
}

/// Inverse of [`winp_from_normal_means`]: the mean shift giving `winp`.
pub fn mean_diff_from_winp(winp: f64, sd_treated: f64, sd_control: f64) -> Result<f64> {
    check_sd("sd_treated", sd_treated)?;
    check_sd("sd_control", sd_control)?;
    if !(winp > 0.0 && winp < 1.0) {
        return Err(domain("winp", winp, "must lie strictly between 0 and 1"));
    }
    Ok(quantile(winp) * sd_treated.hypot(sd_control))
}
