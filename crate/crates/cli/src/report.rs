//! Text tables and JSON-lines records.
//!
//! Tables show probabilities to 4 decimals and percentages to 2; records
//! carry full precision.

use std::fmt::Write;

use serde::Serialize;
use winplan_core::{Correlation, DesignSpec};

use crate::commands::{EstimateReport, PlanReport, SimReport};
use crate::Format;

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report values serialize")
}

fn records<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&json(r));
        out.push('\n');
    }
    out
}

/// Right-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn prob(v: f64) -> String {
    format!("{v:.4}")
}

fn pct(v: f64) -> String {
    format!("{v:.2}")
}

fn common_sd_ratio(d: &DesignSpec) -> String {
    let first = d.endpoints[0].sd_ratio;
    if d.endpoints.iter().all(|e| e.sd_ratio == first) {
        format!("{first}")
    } else {
        "mixed".into()
    }
}

fn rho_label(c: &Correlation) -> String {
    match c {
        Correlation::Exchangeable(r) => format!("{r}"),
        Correlation::Matrix(_) => "matrix".into(),
    }
}

pub fn render_plan(report: &PlanReport, format: Format) -> String {
    match format {
        Format::Records => records(&report.rows),
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "# design: {}", json(&report.base)).unwrap();
            writeln!(out, "# sweep: {}", json(&report.sweep)).unwrap();
            let header = [
                "r",
                "B",
                "theta0",
                "assurance",
                "rho",
                "level",
                "theta",
                "f",
                "raw_n",
                "n_treated",
                "n_control",
                "n_total",
            ];
            let mut rows = Vec::new();
            let mut errors = Vec::new();
            for (i, row) in report.rows.iter().enumerate() {
                let d = &row.design;
                let mut cells = vec![
                    format!("{}", d.alloc_ratio),
                    common_sd_ratio(d),
                    prob(d.lower_bound),
                    prob(d.assurance),
                    rho_label(&d.correlation),
                    prob(d.ci_level),
                    prob(d.global_winp()),
                ];
                match (&row.result, &row.error) {
                    (Some(r), _) => cells.extend([
                        format!("{:.6}", r.f_value),
                        format!("{:.3}", r.raw_n),
                        r.n_treated.to_string(),
                        r.n_control.to_string(),
                        r.n_total.to_string(),
                    ]),
                    (None, e) => {
                        cells.extend(["-", "-", "-", "-", "error"].map(String::from));
                        errors.push(format!("# row {i}: {}", e.as_deref().unwrap_or("")));
                    }
                }
                rows.push(cells);
            }
            out.push_str(&table(&header, &rows));
            for e in errors {
                writeln!(out, "{e}").unwrap();
            }
            out
        }
    }
}

pub fn render_estimate(report: &EstimateReport, format: Format) -> String {
    match format {
        Format::Records => records(std::slice::from_ref(report)),
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "# config: {}", json(&report.config)).unwrap();
            writeln!(
                out,
                "# subjects: {} treated, {} control",
                report.n_treated, report.n_control
            )
            .unwrap();
            let rows: Vec<Vec<String>> = report
                .endpoints
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    vec![
                        name.clone(),
                        prob(report.per_endpoint[k]),
                        format!("{:.6e}", report.covariance[k][k]),
                    ]
                })
                .collect();
            out.push_str(&table(&["endpoint", "winp", "variance"], &rows));

            let matrix =
                |title: &str, m: &[Vec<f64>], cell: &dyn Fn(f64) -> String, out: &mut String| {
                    writeln!(out, "\n{title}").unwrap();
                    let mut header = vec![""];
                    header.extend(report.endpoints.iter().map(String::as_str));
                    let rows: Vec<Vec<String>> = m
                        .iter()
                        .zip(&report.endpoints)
                        .map(|(row, name)| {
                            std::iter::once(name.clone())
                                .chain(row.iter().map(|&v| cell(v)))
                                .collect()
                        })
                        .collect();
                    out.push_str(&table(&header, &rows));
                };
            matrix(
                "covariance",
                &report.covariance,
                &|v| format!("{v:.6e}"),
                &mut out,
            );
            match &report.correlations {
                Some(c) => matrix("correlation", c, &|v| prob(v), &mut out),
                None => out.push_str("\ncorrelation: undefined (an endpoint has zero variance)\n"),
            }

            writeln!(out).unwrap();
            writeln!(out, "global winp: {}", prob(report.global_estimate)).unwrap();
            writeln!(out, "global variance: {:.6e}", report.global_variance).unwrap();
            match (report.ci_lower, report.ci_upper) {
                (Some(lo), Some(hi)) => writeln!(
                    out,
                    "{}% CI: {} to {}",
                    pct(100.0 * report.ci_level),
                    prob(lo),
                    prob(hi)
                )
                .unwrap(),
                _ => writeln!(out, "CI: undefined (global estimate is 0 or 1)").unwrap(),
            }
            out
        }
    }
}

pub fn render_sim(report: &SimReport, format: Format) -> String {
    match format {
        Format::Records => records(&report.rows),
        Format::Table => {
            let mut out = String::new();
            writeln!(
                out,
                "# master_seed: {}  replicates: {}  ci_level: {}",
                report.master_seed, report.replicates, report.ci_level
            )
            .unwrap();
            let header = [
                "#",
                "label",
                "rho",
                "theta0",
                "B",
                "r",
                "assurance",
                "n",
                "ECP",
                "EAP",
                "degenerate",
                "mean_lower",
            ];
            let mut rows = Vec::new();
            let mut errors = Vec::new();
            for row in &report.rows {
                let s = &row.scenario;
                let mut cells = vec![
                    row.index.to_string(),
                    row.label.clone().unwrap_or_else(|| "-".into()),
                    format!("{}", s.data_correlation),
                    prob(s.design.lower_bound),
                    common_sd_ratio(&s.design),
                    format!("{}", s.design.alloc_ratio),
                    prob(s.design.assurance),
                ];
                match &row.result {
                    Some(r) => cells.extend([
                        r.n_total_used.to_string(),
                        pct(r.empirical_coverage),
                        pct(r.empirical_assurance),
                        r.degenerate_count.to_string(),
                        prob(r.mean_ci_lower),
                    ]),
                    None => {
                        cells.extend(["-", "-", "-", "-", "error"].map(String::from));
                        errors.push(format!(
                            "# scenario {}: {}",
                            row.index,
                            row.error.as_deref().unwrap_or("")
                        ));
                    }
                }
                rows.push(cells);
            }
            out.push_str(&table(&header, &rows));
            for e in errors {
                writeln!(out, "{e}").unwrap();
            }
            out
        }
    }
}
