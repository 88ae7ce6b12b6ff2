//! Data acquisition: report submission with CMI attribution and scoping,
//! edit and delete workflows, registry maintenance for institutions,
//! engagements and researchers, and CSV batch import.

mod import;
mod registry;
mod reports;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use import::{ImportSummary, RejectedRow, IMPORT_CSV_HEADER};
pub use registry::{
    CmiPatch, EngagementPatch, EngagementQuery, NewCmi, NewEngagement, NewResearcher,
    ResearcherPatch,
};
pub use reports::{ReportPatch, ReportQuery};

use crate::domain::{CmiId, EngagementId, ReportRecord, ReportType};
use crate::persistence::Tables;

pub const MIN_PERIOD_YEAR: i32 = 1990;
pub const MAX_PERIOD_YEAR: i32 = 2100;

/// Detail keys every report of the given type must carry, non-empty.
pub fn required_detail_keys(report_type: ReportType) -> &'static [&'static str] {
    use ReportType::*;
    match report_type {
        GoverningCouncilMeeting => &["date", "agenda"],
        MonitoringEvaluationVisit => &["site", "findings"],
        ProgressReport => &["percent_complete", "highlights"],
        NewProgram | NewProject | NewSubProject => &["duration_months", "objectives"],
        CompletedProject => &["outputs", "completion_date"],
        TechnologyTransfer => &["technology", "adopters"],
        Publication => &["venue", "authors"],
        IntellectualProperty => &["ip_kind", "registration_no"],
        TrainingWorkshop => &["venue", "participants_count", "dates"],
        ScholarshipHrDevelopment => &["scholar_name", "degree"],
        AwardsRecognition => &["award", "awarding_body"],
        InfrastructureFacility => &["facility", "cost"],
        PolicyBrief => &["policy_title", "issue"],
        AdvocacyActivity => &["activity", "audience"],
    }
}

/// A client-supplied report, before the server assigns id, submitter,
/// timestamps and versions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPayload {
    pub report_type: ReportType,
    pub cmi_id: CmiId,
    #[serde(default)]
    pub engagement_id: Option<EngagementId>,
    pub title: String,
    pub period_year: i32,
    #[serde(default)]
    pub period_quarter: Option<u8>,
    #[serde(default)]
    pub details: BTreeMap<String, String>,
}

impl From<&ReportRecord> for ReportPayload {
    fn from(r: &ReportRecord) -> Self {
        ReportPayload {
            report_type: r.report_type,
            cmi_id: r.cmi_id.clone(),
            engagement_id: r.engagement_id.clone(),
            title: r.title.clone(),
            period_year: r.period_year,
            period_quarter: r.period_quarter,
            details: r.details.clone(),
        }
    }
}

/// One reason a submission is not acceptable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum Violation {
    MissingField { field: String },
    InvalidValue { field: String, value: String },
    InvalidPeriod { year: i32 },
    InvalidQuarter { quarter: u8 },
    InvalidDateRange,
    MissingRequiredDetail { key: String },
    UnknownReportType { value: String },
    UnknownCmi { cmi: String },
    UnknownEngagement { engagement_id: String },
    EngagementCmiMismatch { engagement_id: String },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::MissingField { .. } => "MissingField",
            Violation::InvalidValue { .. } => "InvalidValue",
            Violation::InvalidPeriod { .. } => "InvalidPeriod",
            Violation::InvalidQuarter { .. } => "InvalidQuarter",
            Violation::InvalidDateRange => "InvalidDateRange",
            Violation::MissingRequiredDetail { .. } => "MissingRequiredDetail",
            Violation::UnknownReportType { .. } => "UnknownReportType",
            Violation::UnknownCmi { .. } => "UnknownCmi",
            Violation::UnknownEngagement { .. } => "UnknownEngagement",
            Violation::EngagementCmiMismatch { .. } => "EngagementCmiMismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingField { field } => write!(f, "{field} is required"),
            Violation::InvalidValue { field, value } => {
                write!(f, "{field}: invalid value {value:?}")
            }
            Violation::InvalidPeriod { year } => {
                write!(
                    f,
                    "period_year {year} is outside {MIN_PERIOD_YEAR}-{MAX_PERIOD_YEAR}"
                )
            }
            Violation::InvalidQuarter { quarter } => {
                write!(f, "period_quarter {quarter} is not 1-4")
            }
            Violation::InvalidDateRange => f.write_str("start_date is after end_date"),
            Violation::MissingRequiredDetail { key } => {
                write!(f, "detail {key:?} is required for this report type")
            }
            Violation::UnknownReportType { value } => write!(f, "unknown report type {value:?}"),
            Violation::UnknownCmi { cmi } => write!(f, "unknown CMI {cmi:?}"),
            Violation::UnknownEngagement { engagement_id } => {
                write!(f, "unknown engagement {engagement_id}")
            }
            Violation::EngagementCmiMismatch { engagement_id } => {
                write!(f, "engagement {engagement_id} belongs to a different CMI")
            }
        }
    }
}

/// Every reason `payload` cannot be accepted against the given tables;
/// empty when it can.
pub fn validate_report_payload(payload: &ReportPayload, tables: &Tables) -> Vec<Violation> {
    let mut out = Vec::new();
    if payload.title.trim().is_empty() {
        out.push(Violation::MissingField {
            field: "title".into(),
        });
    }
    if !(MIN_PERIOD_YEAR..=MAX_PERIOD_YEAR).contains(&payload.period_year) {
        out.push(Violation::InvalidPeriod {
            year: payload.period_year,
        });
    }
    if let Some(q) = payload.period_quarter {
        if !(1..=4).contains(&q) {
            out.push(Violation::InvalidQuarter { quarter: q });
        }
    }
    for key in required_detail_keys(payload.report_type) {
        if payload
            .details
            .get(*key)
            .is_none_or(|v| v.trim().is_empty())
        {
            out.push(Violation::MissingRequiredDetail {
                key: (*key).to_owned(),
            });
        }
    }
    if tables.cmi(&payload.cmi_id).is_none_or(|c| c.deleted) {
        out.push(Violation::UnknownCmi {
            cmi: payload.cmi_id.to_string(),
        });
    }
    if let Some(eid) = &payload.engagement_id {
        match tables.engagement(eid) {
            Some(e) if !e.deleted => {
                if e.lead_cmi_id != payload.cmi_id {
                    out.push(Violation::EngagementCmiMismatch {
                        engagement_id: eid.to_string(),
                    });
                }
            }
            _ => out.push(Violation::UnknownEngagement {
                engagement_id: eid.to_string(),
            }),
        }
    }
    out
}

/// Like [`validate_report_payload`], for a revision of `previous`.
/// References the record already had stay acceptable after their target
/// is soft-deleted, so such records remain editable.
pub fn validate_report_revision(
    payload: &ReportPayload,
    previous: Option<&ReportRecord>,
    tables: &Tables,
) -> Vec<Violation> {
    let mut out = validate_report_payload(payload, tables);
    if let Some(prev) = previous {
        out.retain(|v| match v {
            Violation::UnknownCmi { .. } => {
                prev.cmi_id != payload.cmi_id || tables.cmi(&payload.cmi_id).is_none()
            }
            Violation::UnknownEngagement { .. } => {
                prev.engagement_id != payload.engagement_id
                    || payload
                        .engagement_id
                        .as_ref()
                        .is_some_and(|e| tables.engagement(e).is_none())
            }
            _ => true,
        });
    }
    out
}
