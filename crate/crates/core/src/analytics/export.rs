use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::document::ReportDocument;
use crate::error::{Error, Result};

/// Columns of an exported document. The first seven describe the entry;
/// the rest carry what a re-import needs (engagement link and up to three
/// detail pairs, required keys first).
pub const DOCUMENT_CSV_HEADER: [&str; 14] = [
    "category",
    "report_type",
    "cmi_code",
    "title",
    "period_year",
    "period_quarter",
    "submitted_at",
    "engagement_id",
    "detail_key_1",
    "detail_value_1",
    "detail_key_2",
    "detail_value_2",
    "detail_key_3",
    "detail_value_3",
];

const DETAIL_PAIRS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Csv,
}

impl ExportFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Json => "application/json",
            ExportFormat::Csv => "text/csv; charset=utf-8",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidFilter(format!(
                "unknown export format `{other}`"
            ))),
        }
    }
}

/// Serializes a document. Output is a pure function of the document.
pub fn export_document(doc: &ReportDocument, format: ExportFormat) -> Vec<u8> {
    match format {
        // struct fields serialize in declaration order and maps are BTreeMaps
        ExportFormat::Json => serde_json::to_vec_pretty(doc).expect("document serializes"),
        ExportFormat::Csv => document_csv(doc),
    }
}

fn document_csv(doc: &ReportDocument) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(DOCUMENT_CSV_HEADER).expect("write to Vec");
    for section in &doc.sections {
        for sub in &section.subsections {
            for e in &sub.entries {
                let required = crate::acquisition::required_detail_keys(e.report_type);
                let mut keys: Vec<&String> = e
                    .details
                    .keys()
                    .filter(|k| required.contains(&k.as_str()))
                    .collect();
                keys.extend(e.details.keys().filter(|k| !required.contains(&k.as_str())));
                let mut row = vec![
                    section.category.as_str().to_owned(),
                    e.report_type.as_str().to_owned(),
                    e.cmi_code.clone(),
                    e.title.clone(),
                    e.period_year.to_string(),
                    e.period_quarter.map(|q| q.to_string()).unwrap_or_default(),
                    e.submitted_at
                        .to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                    e.engagement_id
                        .as_ref()
                        .map(|id| id.to_string())
                        .unwrap_or_default(),
                ];
                for i in 0..DETAIL_PAIRS {
                    match keys.get(i) {
                        Some(k) => {
                            row.push((*k).clone());
                            row.push(e.details[*k].clone());
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                w.write_record(&row).expect("write to Vec");
            }
        }
    }
    w.into_inner().expect("flush to Vec")
}
