use std::collections::{BTreeMap, HashMap};

use csv::StringRecord;
use serde::{Deserialize, Serialize};

use super::{ReportPayload, Violation};
use crate::access::Session;
use crate::analytics::DOCUMENT_CSV_HEADER;
use crate::domain::{EngagementId, ReportType};
use crate::error::{Error, Result};
use crate::persistence::Tables;
use crate::service::Consortium;

/// Header line every import file must start with, verbatim.
pub const IMPORT_CSV_HEADER: [&str; 12] = [
    "report_type",
    "cmi_code",
    "engagement_id",
    "title",
    "period_year",
    "period_quarter",
    "detail_key_1",
    "detail_value_1",
    "detail_key_2",
    "detail_value_2",
    "detail_key_3",
    "detail_value_3",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based index among data rows (the header is not counted).
    pub row_number: usize,
    pub error_code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub accepted: usize,
    pub rejected: Vec<RejectedRow>,
}

struct Layout {
    columns: HashMap<&'static str, usize>,
    width: usize,
}

impl Layout {
    /// Recognizes either the import header or the document-export header,
    /// so an exported report file can be loaded back.
    fn detect(header: &StringRecord) -> Option<Layout> {
        let fields: Vec<&str> = header
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if i == 0 {
                    f.trim_start_matches('\u{feff}')
                } else {
                    f
                }
            })
            .collect();
        let known: &[&'static str] = if fields == IMPORT_CSV_HEADER {
            &IMPORT_CSV_HEADER
        } else if fields == DOCUMENT_CSV_HEADER {
            &DOCUMENT_CSV_HEADER
        } else {
            return None;
        };
        Some(Layout {
            columns: known
                .iter()
                .enumerate()
                .map(|(i, name)| (*name, i))
                .collect(),
            width: known.len(),
        })
    }

    fn get<'r>(&self, row: &'r StringRecord, column: &str) -> &'r str {
        self.columns
            .get(column)
            .and_then(|i| row.get(*i))
            .unwrap_or("")
    }
}

fn parse_rows(csv_bytes: &[u8]) -> Result<(Layout, Vec<StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_bytes);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| Error::MalformedCsv("missing header line".into()))?
        .map_err(|e| Error::MalformedCsv(e.to_string()))?;
    let layout = Layout::detect(&header).ok_or_else(|| {
        Error::MalformedCsv(format!(
            "header must be exactly `{}`",
            IMPORT_CSV_HEADER.join(",")
        ))
    })?;
    let rows = records
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::MalformedCsv(e.to_string()))?;
    Ok((layout, rows))
}

fn row_payload(
    layout: &Layout,
    row: &StringRecord,
    tables: &Tables,
) -> std::result::Result<ReportPayload, Vec<Violation>> {
    let mut violations = Vec::new();
    let raw_type = layout.get(row, "report_type").trim();
    let report_type = raw_type
        .parse::<ReportType>()
        .map_err(|_| Violation::UnknownReportType {
            value: raw_type.to_owned(),
        });
    let code = layout.get(row, "cmi_code").trim();
    let cmi = tables
        .cmi_by_code(code)
        .filter(|c| !c.deleted)
        .ok_or_else(|| Violation::UnknownCmi {
            cmi: code.to_owned(),
        });

    let raw_year = layout.get(row, "period_year").trim();
    let period_year = if raw_year.is_empty() {
        Err(Violation::MissingField {
            field: "period_year".into(),
        })
    } else {
        raw_year
            .parse::<i32>()
            .map_err(|_| Violation::InvalidValue {
                field: "period_year".into(),
                value: raw_year.to_owned(),
            })
    };
    let raw_quarter = layout.get(row, "period_quarter").trim();
    let period_quarter = if raw_quarter.is_empty() {
        Ok(None)
    } else {
        raw_quarter
            .parse::<u8>()
            .map(Some)
            .map_err(|_| Violation::InvalidValue {
                field: "period_quarter".into(),
                value: raw_quarter.to_owned(),
            })
    };

    let mut details = BTreeMap::new();
    for n in 1..=3 {
        let key = layout.get(row, &format!("detail_key_{n}")).trim();
        let value = layout.get(row, &format!("detail_value_{n}"));
        if !key.is_empty() {
            details.insert(key.to_owned(), value.to_owned());
        }
    }
    let engagement = layout.get(row, "engagement_id").trim();

    let report_type = report_type.map_err(|v| violations.push(v)).ok();
    let cmi = cmi.map_err(|v| violations.push(v)).ok();
    let period_year = period_year.map_err(|v| violations.push(v)).ok();
    let period_quarter = period_quarter.map_err(|v| violations.push(v)).ok();
    match (report_type, cmi, period_year, period_quarter) {
        (Some(report_type), Some(cmi), Some(period_year), Some(period_quarter))
            if violations.is_empty() =>
        {
            Ok(ReportPayload {
                report_type,
                cmi_id: cmi.id.clone(),
                engagement_id: (!engagement.is_empty()).then(|| EngagementId::from(engagement)),
                title: layout.get(row, "title").to_owned(),
                period_year,
                period_quarter,
                details,
            })
        }
        _ => Err(violations),
    }
}

fn rejection(row_number: usize, violations: &[Violation]) -> RejectedRow {
    RejectedRow {
        row_number,
        error_code: violations
            .first()
            .map(Violation::code)
            .unwrap_or("Invalid")
            .to_owned(),
        message: violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; "),
    }
}

impl Consortium {
    /// Imports reports from CSV. A file whose header is wrong, or which is
    /// not parseable CSV, is rejected before anything is written. Otherwise
    /// every row is validated and applied on its own, in file order.
    pub fn import_batch(&self, session: &Session, csv_bytes: &[u8]) -> Result<ImportSummary> {
        let principal = self.principal(session)?;
        let (layout, rows) = parse_rows(csv_bytes)?;
        let mut summary = ImportSummary::default();
        for (i, row) in rows.iter().enumerate() {
            let row_number = i + 1;
            if row.len() != layout.width {
                summary.rejected.push(RejectedRow {
                    row_number,
                    error_code: "MalformedRow".into(),
                    message: format!("expected {} fields, found {}", layout.width, row.len()),
                });
                continue;
            }
            let payload = match row_payload(&layout, row, &self.store().snapshot()) {
                Ok(p) => p,
                Err(violations) => {
                    summary.rejected.push(rejection(row_number, &violations));
                    continue;
                }
            };
            match self.submit_as(&principal, payload) {
                Ok(_) => summary.accepted += 1,
                Err(Error::ValidationFailed(violations)) => {
                    summary.rejected.push(rejection(row_number, &violations))
                }
                Err(e @ (Error::AuthRequired | Error::SessionExpired | Error::Storage(_))) => {
                    return Err(e)
                }
                Err(e) => summary.rejected.push(RejectedRow {
                    row_number,
                    error_code: e.code().to_owned(),
                    message: e.to_string(),
                }),
            }
        }
        Ok(summary)
    }
}
