//! Tabular and JSON report writers. Every numeric CSV column names its unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{ProblemKind, SolveReport};
use crate::simulator::{ErrorReport, SimMetrics, SimulationStats};
use crate::system::{ScenarioConfig, SteadyStateMetrics, SystemPolicy};
use crate::units::TimeUnit;

/// Provenance embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub scenario: String,
    pub seed: Option<u64>,
    pub flags: Vec<String>,
    pub crate_version: String,
    pub wall_time_s: f64,
}

impl RunMetadata {
    pub fn new(command: &str, scenario: &str, seed: Option<u64>, flags: Vec<String>) -> Self {
        RunMetadata {
            command: command.to_string(),
            scenario: scenario.to_string(),
            seed,
            flags,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        }
    }
}

fn unit_name(unit: TimeUnit) -> &'static str {
    match unit {
        TimeUnit::Week => "week",
        TimeUnit::Day => "day",
    }
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Cost components in M$/yr, one row.
pub fn cost_breakdown_csv(m: &SteadyStateMetrics) -> Result<String> {
    let c = &m.cost;
    to_csv(
        &strings(&[
            "manufacturing_musd_per_year",
            "launch_musd_per_year",
            "maneuvering_musd_per_year",
            "holding_musd_per_year",
            "tessac_musd_per_year",
        ]),
        &[vec![num(c.manufacturing), num(c.launch), num(c.maneuvering), num(c.holding), num(c.tessac)]],
    )
}

fn policy_header() -> Vec<String> {
    strings(&["n_parking_orbits", "h_parking_km", "r1_sats", "r2_sats", "q1_sats", "q2_sats", "alpha_w_ratio", "k_r_batches", "k_q_batches"])
}

fn policy_cells(p: &SystemPolicy) -> Vec<String> {
    vec![
        p.n_parking.to_string(),
        num(p.h_parking_km),
        p.plane.r1.to_string(),
        p.plane.r2.to_string(),
        p.plane.q1.to_string(),
        p.plane.q2.to_string(),
        num(p.plane.alpha_w),
        p.parking.k_r.to_string(),
        p.parking.k_q.to_string(),
    ]
}

fn outcome_header() -> Vec<String> {
    strings(&[
        "tessac_musd_per_year",
        "rho_plane_pct",
        "rho_parking_pct",
        "sl_plane_sats",
        "sl_parking_batches",
        "p2_pct",
        "total_mean_stock_sats",
        "aux_launches_per_primary_ratio",
    ])
}

fn outcome_cells(config: &ScenarioConfig, p: &SystemPolicy, m: &SteadyStateMetrics) -> Vec<String> {
    vec![
        num(m.cost.tessac),
        num(m.plane.rho_plane * 100.0),
        num(m.parking.rho_parking * 100.0),
        num(m.plane.sl_plane),
        num(m.parking.sl_parking),
        num(m.plane.p2 * 100.0),
        num(m.total_mean_stock(config, p)),
        num(m.relative_auxiliary_usage(p)),
    ]
}

/// Policy and headline outcomes, one row per labelled evaluation.
pub fn policy_table_csv(rows: &[(String, ScenarioConfig, SystemPolicy, SteadyStateMetrics)]) -> Result<String> {
    let mut header = strings(&["label", "h_s_musd_per_sat_year"]);
    header.extend(policy_header());
    header.extend(outcome_header());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, config, p, m)| {
            let mut r = vec![label.clone(), num(config.costs.h_s_musd)];
            r.extend(policy_cells(p));
            r.extend(outcome_cells(config, p, m));
            r
        })
        .collect();
    to_csv(&header, &body)
}

type Column = (String, fn(&SimMetrics) -> f64);

fn sim_metric_columns(unit: TimeUnit) -> Vec<Column> {
    let u = unit_name(unit);
    vec![
        (format!("lambda_parking_batches_per_{u}"), |m| m.lambda_parking),
        ("sl_plane_sats".into(), |m| m.sl_plane),
        ("sl_parking_batches".into(), |m| m.sl_parking),
        ("rho_plane_pct".into(), |m| m.rho_plane * 100.0),
        ("rho_parking_pct".into(), |m| m.rho_parking * 100.0),
        ("p2_pct".into(), |m| m.p2 * 100.0),
        ("manufacturing_musd_per_year".into(), |m| m.manufacturing),
        ("launch_musd_per_year".into(), |m| m.launch),
        ("maneuvering_musd_per_year".into(), |m| m.maneuvering),
        ("holding_musd_per_year".into(), |m| m.holding),
        ("tessac_musd_per_year".into(), |m| m.tessac),
    ]
}

/// Long format: one row per replication per metric. The metric name carries its unit.
pub fn replications_csv(stats: &SimulationStats, unit: TimeUnit) -> Result<String> {
    let cols = sim_metric_columns(unit);
    let mut rows = Vec::new();
    for r in &stats.replications {
        for (name, get) in &cols {
            rows.push(vec![r.index.to_string(), name.clone(), num(get(&r.metrics))]);
        }
    }
    to_csv(&strings(&["replication", "metric", "value"]), &rows)
}

/// Pooled mean, standard error, and optionally the model value and error for each metric.
pub fn pooled_summary_csv(stats: &SimulationStats, unit: TimeUnit, model: Option<&SteadyStateMetrics>) -> Result<String> {
    let n = stats.replications.len() as f64;
    let model_sim = model.map(model_as_sim);
    let rows = sim_metric_columns(unit)
        .into_iter()
        .map(|(name, get)| {
            let mean = get(&stats.pooled);
            let var = if n > 1.0 {
                stats.replications.iter().map(|r| (get(&r.metrics) - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let m = model_sim.as_ref().map(get);
            vec![name, num(mean), num((var / n).sqrt()), opt(m), opt(m.map(|m| m - mean))]
        })
        .collect::<Vec<_>>();
    to_csv(&strings(&["metric", "sim_mean", "sim_std_error", "model_value", "model_minus_sim"]), &rows)
}

fn model_as_sim(m: &SteadyStateMetrics) -> SimMetrics {
    SimMetrics {
        lambda_parking: m.parking.lambda_parking,
        sl_plane: m.plane.sl_plane,
        sl_parking: m.parking.sl_parking,
        rho_plane: m.plane.rho_plane,
        rho_parking: m.parking.rho_parking,
        p2: m.plane.p2,
        manufacturing: m.cost.manufacturing,
        launch: m.cost.launch,
        maneuvering: m.cost.maneuvering,
        holding: m.cost.holding,
        tessac: m.cost.tessac,
    }
}

/// Per-metric limits above which a validation instance is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorThresholds {
    pub lambda_parking_rel_pct: f64,
    pub sl_plane_rel_pct: f64,
    pub sl_parking_rel_pct: f64,
    pub tessac_rel_pct: f64,
    pub rho_plane_abs_pp: f64,
    pub rho_parking_abs_pp: f64,
    pub p2_abs_pp: f64,
}

impl Default for ErrorThresholds {
    /// Twice the mean errors reported for the reference simulator.
    fn default() -> Self {
        ErrorThresholds {
            lambda_parking_rel_pct: 1.5,
            sl_plane_rel_pct: 9.0,
            sl_parking_rel_pct: 2.2,
            tessac_rel_pct: 3.0,
            rho_plane_abs_pp: 0.1,
            rho_parking_abs_pp: 0.2,
            p2_abs_pp: 1.0,
        }
    }
}

impl ErrorThresholds {
    /// Names of the metrics in `e` that exceed their limit.
    pub fn exceeded(&self, e: &ErrorReport) -> Vec<&'static str> {
        let over = |v: Option<f64>, lim: f64| v.is_some_and(|v| v > lim);
        let mut out = Vec::new();
        if over(e.lambda_parking_rel, self.lambda_parking_rel_pct) {
            out.push("lambda_parking");
        }
        if over(e.sl_plane_rel, self.sl_plane_rel_pct) {
            out.push("sl_plane");
        }
        if over(e.sl_parking_rel, self.sl_parking_rel_pct) {
            out.push("sl_parking");
        }
        if over(e.tessac_rel, self.tessac_rel_pct) {
            out.push("tessac");
        }
        if e.rho_plane_abs > self.rho_plane_abs_pp {
            out.push("rho_plane");
        }
        if e.rho_parking_abs > self.rho_parking_abs_pp {
            out.push("rho_parking");
        }
        if e.p2_abs > self.p2_abs_pp {
            out.push("p2");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub instance: String,
    pub errors: ErrorReport,
    pub flagged: Vec<String>,
}

/// Mean of each error over the instances where it is defined.
pub fn average_errors(rows: &[ValidationRow]) -> ErrorReport {
    let mean_opt = |f: fn(&ErrorReport) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(|r| f(&r.errors)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mean = |f: fn(&ErrorReport) -> f64| rows.iter().map(|r| f(&r.errors)).sum::<f64>() / rows.len().max(1) as f64;
    ErrorReport {
        lambda_parking_rel: mean_opt(|e| e.lambda_parking_rel),
        sl_plane_rel: mean_opt(|e| e.sl_plane_rel),
        sl_parking_rel: mean_opt(|e| e.sl_parking_rel),
        tessac_rel: mean_opt(|e| e.tessac_rel),
        rho_plane_abs: mean(|e| e.rho_plane_abs),
        rho_parking_abs: mean(|e| e.rho_parking_abs),
        p2_abs: mean(|e| e.p2_abs),
    }
}

fn error_cells(e: &ErrorReport) -> Vec<String> {
    vec![
        opt(e.lambda_parking_rel),
        opt(e.sl_plane_rel),
        opt(e.sl_parking_rel),
        opt(e.tessac_rel),
        num(e.rho_plane_abs),
        num(e.rho_parking_abs),
        num(e.p2_abs),
    ]
}

/// Per-instance error table followed by a `mean` row.
pub fn validation_csv(rows: &[ValidationRow]) -> Result<String> {
    let header = strings(&[
        "instance",
        "lambda_parking_rel_err_pct",
        "sl_plane_rel_err_pct",
        "sl_parking_rel_err_pct",
        "tessac_rel_err_pct",
        "rho_plane_abs_err_pp",
        "rho_parking_abs_err_pp",
        "p2_abs_err_pp",
        "flagged",
    ]);
    let mut body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut c = vec![r.instance.clone()];
            c.extend(error_cells(&r.errors));
            c.push(r.flagged.join(";"));
            c
        })
        .collect();
    let mut mean = vec!["mean".to_string()];
    mean.extend(error_cells(&average_errors(rows)));
    mean.push(String::new());
    body.push(mean);
    to_csv(&header, &body)
}

/// Per-generation optimizer trace.
pub fn trace_csv(report: &SolveReport) -> Result<String> {
    let obj = match report.kind {
        ProblemKind::Or => "tessac_musd_per_year",
        ProblemKind::Va => "c_auxiliary_musd",
    };
    let header = vec![
        "generation".to_string(),
        format!("best_{obj}"),
        format!("mean_feasible_{obj}"),
        "feasible_count".to_string(),
        "best_violation_scaled".to_string(),
    ];
    let rows: Vec<Vec<String>> = report
        .trace
        .iter()
        .map(|t| {
            vec![
                t.generation.to_string(),
                num(t.best_objective),
                num(t.mean_feasible_objective),
                t.feasible_count.to_string(),
                num(t.best_violation),
            ]
        })
        .collect();
    to_csv(&header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(x: f64) -> ErrorReport {
        ErrorReport {
            lambda_parking_rel: Some(x),
            sl_plane_rel: None,
            sl_parking_rel: Some(x),
            tessac_rel: Some(x),
            rho_plane_abs: x,
            rho_parking_abs: x,
            p2_abs: x,
        }
    }

    #[test]
    fn averages_skip_undefined_errors() {
        let rows = vec![
            ValidationRow { instance: "a".into(), errors: err(1.0), flagged: vec![] },
            ValidationRow { instance: "b".into(), errors: err(3.0), flagged: vec![] },
        ];
        let avg = average_errors(&rows);
        assert_eq!(avg.tessac_rel, Some(2.0));
        assert_eq!(avg.sl_plane_rel, None);
        assert_eq!(avg.p2_abs, 2.0);
        let csv = validation_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().last().unwrap().starts_with("mean,2.000000,,"));
    }

    #[test]
    fn thresholds_flag_large_errors() {
        let t = ErrorThresholds::default();
        assert!(t.exceeded(&err(0.05)).is_empty());
        assert_eq!(t.exceeded(&err(5.0)), vec!["lambda_parking", "sl_parking", "tessac", "rho_plane", "rho_parking", "p2"]);
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        let csv = to_csv(&strings(&["a"]), &[vec!["x,y".into()]]).unwrap();
        assert_eq!(csv, "a\n\"x,y\"\n");
    }
}
