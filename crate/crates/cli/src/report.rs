//! Rendering of metric reports and dataset statistics as text, CSV or JSON.
//!
//! Rational metric values are printed as decimals with six fractional digits
//! together with their exact numerator and denominator, so downstream
//! comparisons never depend on float parsing.

use std::fmt::Write as _;

use rulebench_core::metrics::{decimal6, MetricsReport, Rat};
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

/// Environment variable that sets the default output format.
pub const FORMAT_ENV: &str = "RULEBENCH_FORMAT";

/// Resolution order: explicit flag, then the environment, then text.
pub fn resolve_format(flag: Option<ReportFormat>) -> ReportFormat {
    if let Some(f) = flag {
        return f;
    }
    match std::env::var(FORMAT_ENV).ok().as_deref() {
        Some("csv") => ReportFormat::Csv,
        Some("json") => ReportFormat::Json,
        _ => ReportFormat::Text,
    }
}

const METRIC_NAMES: [&str; 9] = [
    "h_distance",
    "h_accuracy",
    "h_score",
    "std_confidence",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "r_score",
];

fn rationals(report: &MetricsReport) -> [Rat; 8] {
    [
        report.h_accuracy,
        report.h_score,
        report.std_confidence,
        report.accuracy,
        report.precision,
        report.recall,
        report.f1,
        report.r_score,
    ]
}

fn flag_list(report: &MetricsReport) -> Vec<&'static str> {
    let f = report.flags;
    let mut out = Vec::new();
    for (set, name) in [
        (f.h_accuracy_undefined, "h_accuracy_undefined"),
        (f.h_score_vacuous, "h_score_vacuous"),
        (f.std_confidence_undefined, "std_confidence_undefined"),
        (f.accuracy_undefined, "accuracy_undefined"),
        (f.precision_undefined, "precision_undefined"),
        (f.recall_undefined, "recall_undefined"),
        (f.f1_vacuous, "f1_vacuous"),
        (f.r_score_undefined, "r_score_undefined"),
        (f.universe_exceeded, "universe_exceeded"),
    ] {
        if set {
            out.push(name);
        }
    }
    out
}

pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "{:<16} {}", "h_distance", report.h_distance);
            for (name, value) in METRIC_NAMES[1..].iter().zip(rationals(report)) {
                let _ = writeln!(
                    out,
                    "{:<16} {} ({}/{})",
                    name,
                    decimal6(value),
                    value.numer(),
                    value.denom()
                );
            }
            let c = report.counts;
            let _ = writeln!(
                out,
                "counts           tp={} fp={} fn={} tn={} u={}",
                c.true_positives, c.false_positives, c.false_negatives, c.true_negatives, c.universe
            );
            let flags = flag_list(report);
            if !flags.is_empty() {
                let _ = writeln!(out, "flags            {}", flags.join(","));
            }
            out
        }
        ReportFormat::Csv => {
            let mut header: Vec<String> = METRIC_NAMES.iter().map(|s| s.to_string()).collect();
            header.extend(["tp", "fp", "fn", "tn", "u", "flags"].map(String::from));
            let mut row = vec![report.h_distance.to_string()];
            row.extend(rationals(report).iter().map(|r| decimal6(*r)));
            let c = report.counts;
            row.extend([
                c.true_positives.to_string(),
                c.false_positives.to_string(),
                c.false_negatives.to_string(),
                c.true_negatives.to_string(),
                c.universe.to_string(),
                flag_list(report).join(";"),
            ]);
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
        ReportFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("h_distance".into(), json!(report.h_distance));
            for (name, value) in METRIC_NAMES[1..].iter().zip(rationals(report)) {
                obj.insert(
                    (*name).into(),
                    json!({
                        "decimal": decimal6(value),
                        "num": value.numer().to_string(),
                        "den": value.denom().to_string(),
                    }),
                );
            }
            let c = report.counts;
            obj.insert(
                "counts".into(),
                json!({
                    "tp": c.true_positives,
                    "fp": c.false_positives,
                    "fn": c.false_negatives,
                    "tn": c.true_negatives.to_string(),
                    "u": c.universe.to_string(),
                }),
            );
            obj.insert("flags".into(), json!(flag_list(report)));
            let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
                .expect("report serializes");
            text.push('\n');
            text
        }
    }
}

/// Aggregate of one numeric column over a dataset group.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinAvgMax {
    pub min: usize,
    pub avg: f64,
    pub max: usize,
}

impl MinAvgMax {
    pub fn of(values: &[usize]) -> Self {
        let min = values.iter().copied().min().unwrap_or(0);
        let max = values.iter().copied().max().unwrap_or(0);
        let avg = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<usize>() as f64 / values.len() as f64
        };
        MinAvgMax { min, avg, max }
    }
}

/// One row of the `stats` table: a dataset group and its aggregates.
#[derive(Clone, Debug)]
pub struct StatsRow {
    pub category: String,
    pub size: String,
    pub depth: usize,
    pub count: usize,
    pub rules: MinAvgMax,
    pub facts: MinAvgMax,
    pub predicates: MinAvgMax,
    pub constants: MinAvgMax,
}

pub fn render_stats(rows: &[StatsRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<8} {:<8} {:>5} {:>5}  {:>18} {:>21} {:>18} {:>18}",
                "category", "size", "depth", "n", "rules min/avg/max", "facts min/avg/max",
                "preds min/avg/max", "consts min/avg/max"
            );
            for r in rows {
                let cell = |m: &MinAvgMax| format!("{}/{:.1}/{}", m.min, m.avg, m.max);
                let _ = writeln!(
                    out,
                    "{:<8} {:<8} {:>5} {:>5}  {:>18} {:>21} {:>18} {:>18}",
                    r.category,
                    r.size,
                    r.depth,
                    r.count,
                    cell(&r.rules),
                    cell(&r.facts),
                    cell(&r.predicates),
                    cell(&r.constants),
                );
            }
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from(
                "category,size,depth,count,\
                 rules_min,rules_avg,rules_max,\
                 facts_min,facts_avg,facts_max,\
                 preds_min,preds_avg,preds_max,\
                 consts_min,consts_avg,consts_max\n",
            );
            for r in rows {
                let cell = |m: &MinAvgMax| format!("{},{},{}", m.min, m.avg, m.max);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.category,
                    r.size,
                    r.depth,
                    r.count,
                    cell(&r.rules),
                    cell(&r.facts),
                    cell(&r.predicates),
                    cell(&r.constants),
                );
            }
            out
        }
        ReportFormat::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let cell = |m: &MinAvgMax| json!({"min": m.min, "avg": m.avg, "max": m.max});
                    json!({
                        "category": r.category,
                        "size": r.size,
                        "depth": r.depth,
                        "count": r.count,
                        "rules": cell(&r.rules),
                        "facts": cell(&r.facts),
                        "predicates": cell(&r.predicates),
                        "constants": cell(&r.constants),
                    })
                })
                .collect();
            let mut text =
                serde_json::to_string_pretty(&serde_json::Value::Array(rows)).expect("serializes");
            text.push('\n');
            text
        }
    }
}
