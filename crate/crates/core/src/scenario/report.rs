//! CSV and JSON rendering of comparison reports.
//!
//! CSV has one row per scenario and case, in input order with `online`
//! before `no_reuse`. Money columns are exact decimals in money units, delays
//! are milliseconds with three decimals. Cells of a case without a plan are
//! empty. Wall time is left empty unless timing is requested, so that output
//! bytes depend only on the inputs.

use serde::Serialize;

use super::{CaseReport, ComparisonReport};
use crate::error::Result;
use crate::model::Money;

/// Version tag written in every report.
pub const REPORT_SCHEMA: &str = "chainplace-report/1";

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 19] = [
    "schema",
    "scenario",
    "seed",
    "servers",
    "existing",
    "new",
    "case",
    "status",
    "total",
    "hosting",
    "instantiation",
    "routing",
    "migration",
    "migration_count",
    "reused_count",
    "instantiated_count",
    "removed_count",
    "mean_delay_ms",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn money(m: Option<Money>) -> String {
    m.map(Money::to_decimal).unwrap_or_default()
}

fn case_row(report: &ComparisonReport, case: &CaseReport, timing: bool) -> Vec<String> {
    let spec = &report.spec;
    let b = case.breakdown;
    let count =
        |f: fn(&crate::model::DeltaCounts) -> usize| case.counts.as_ref().map(|c| f(c).to_string());
    vec![
        REPORT_SCHEMA.to_string(),
        spec.scenario_id
            .map(|id| id.to_string())
            .unwrap_or_default(),
        spec.seed.to_string(),
        spec.n_servers.to_string(),
        spec.existing_requests.to_string(),
        spec.new_requests.to_string(),
        case.case.label().to_string(),
        serde_json::to_value(case.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        money(b.map(|b| b.total)),
        money(b.map(|b| b.hosting_delta)),
        money(b.map(|b| b.instantiation)),
        money(b.map(|b| b.routing_delta)),
        money(b.map(|b| b.migration)),
        count(|c| c.migrated).unwrap_or_default(),
        count(|c| c.reused).unwrap_or_default(),
        count(|c| c.instantiated).unwrap_or_default(),
        count(|c| c.removed).unwrap_or_default(),
        case.mean_delay()
            .map(|us| format!("{:.3}", us / 1000.0))
            .unwrap_or_default(),
        if timing {
            case.stats.wall_time_ms.to_string()
        } else {
            String::new()
        },
    ]
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'a str,
    reports: Vec<ComparisonReport>,
}

/// Renders reports as CSV or as a JSON document `{"schema", "reports"}`.
pub fn emit_report(
    reports: &[ComparisonReport],
    format: ReportFormat,
    timing: bool,
) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(CSV_COLUMNS)?;
            for report in reports {
                for case in [&report.online, &report.no_reuse] {
                    writer.write_record(case_row(report, case, timing))?;
                }
            }
            let bytes = writer.into_inner().map_err(|e| e.into_error())?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        ReportFormat::Json => {
            let mut reports = reports.to_vec();
            if !timing {
                for r in &mut reports {
                    r.online.stats.wall_time_ms = 0;
                    r.no_reuse.stats.wall_time_ms = 0;
                }
            }
            let mut text = serde_json::to_string_pretty(&Document {
                schema: REPORT_SCHEMA,
                reports,
            })?;
            text.push('\n');
            Ok(text)
        }
    }
}
