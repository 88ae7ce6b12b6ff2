use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::Scope;
use crate::domain::{
    CmiId, EngagementId, ReportCategory, ReportId, ReportRecord, ReportType, UserId,
};
use crate::error::{Error, Result};
use crate::persistence::Tables;

/// A report as it appears inside a generated document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: ReportId,
    pub report_type: ReportType,
    pub cmi_id: CmiId,
    pub cmi_code: String,
    pub engagement_id: Option<EngagementId>,
    pub title: String,
    pub period_year: i32,
    pub period_quarter: Option<u8>,
    pub details: BTreeMap<String, String>,
    pub submitted_by: UserId,
    pub submitted_at: DateTime<Utc>,
}

impl ReportEntry {
    fn from_record(r: &ReportRecord, tables: &Tables) -> Self {
        ReportEntry {
            id: r.id.clone(),
            report_type: r.report_type,
            cmi_id: r.cmi_id.clone(),
            cmi_code: tables.cmi_code(Some(&r.cmi_id)).to_owned(),
            engagement_id: r.engagement_id.clone(),
            title: r.title.clone(),
            period_year: r.period_year,
            period_quarter: r.period_quarter,
            details: r.details.clone(),
            submitted_by: r.submitted_by.clone(),
            submitted_at: r.submitted_at,
        }
    }

    pub fn category(&self) -> ReportCategory {
        self.report_type.category()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsection {
    pub report_type: ReportType,
    pub entries: Vec<ReportEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub category: ReportCategory,
    pub subsections: Vec<Subsection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub year: Option<i32>,
    pub quarter: Option<u8>,
}

/// A consolidated report. Always carries all five category sections in
/// canonical order, and within each every report type of that category,
/// whether or not any entries matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub generated_at: DateTime<Utc>,
    pub scope: Scope,
    pub period: Period,
    pub sections: Vec<Section>,
    pub entry_count: usize,
}

impl ReportDocument {
    pub fn entries(&self) -> impl Iterator<Item = &ReportEntry> {
        self.sections
            .iter()
            .flat_map(|s| s.subsections.iter())
            .flat_map(|ss| ss.entries.iter())
    }
}

/// Selection for a filtered report. Absent (or empty) sets do not
/// constrain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub scope: Scope,
    #[serde(default)]
    pub period_year: Option<i32>,
    #[serde(default)]
    pub period_quarter: Option<u8>,
    #[serde(default)]
    pub categories: Option<BTreeSet<ReportCategory>>,
    #[serde(default)]
    pub report_types: Option<BTreeSet<ReportType>>,
}

impl FilterSpec {
    pub fn for_scope(scope: Scope) -> Self {
        FilterSpec {
            scope,
            period_year: None,
            period_quarter: None,
            categories: None,
            report_types: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.period_quarter {
            if !(1..=4).contains(&q) {
                return Err(Error::InvalidFilter(format!(
                    "period_quarter {q} is not 1-4"
                )));
            }
        }
        if let (Some(cats), Some(types)) = (self.categories(), self.report_types()) {
            if let Some(t) = types.iter().find(|t| !cats.contains(&t.category())) {
                return Err(Error::InconsistentFilter(format!(
                    "{t} belongs to {}, which is not among the selected categories",
                    t.category()
                )));
            }
        }
        Ok(())
    }

    fn categories(&self) -> Option<&BTreeSet<ReportCategory>> {
        self.categories.as_ref().filter(|s| !s.is_empty())
    }

    fn report_types(&self) -> Option<&BTreeSet<ReportType>> {
        self.report_types.as_ref().filter(|s| !s.is_empty())
    }

    pub fn matches(&self, r: &ReportRecord) -> bool {
        !r.deleted
            && self.scope.contains(&r.cmi_id)
            && self.period_year.is_none_or(|y| r.period_year == y)
            && self
                .period_quarter
                .is_none_or(|q| r.period_quarter == Some(q))
            && self.categories().is_none_or(|c| c.contains(&r.category()))
            && self
                .report_types()
                .is_none_or(|t| t.contains(&r.report_type))
    }
}

/// All live reports for `year` within `scope`.
pub fn annual_report(
    tables: &Tables,
    year: i32,
    scope: &Scope,
    generated_at: DateTime<Utc>,
) -> ReportDocument {
    let filter = FilterSpec {
        period_year: Some(year),
        ..FilterSpec::for_scope(scope.clone())
    };
    assemble(tables, &filter, generated_at)
}

pub fn filtered_report(
    tables: &Tables,
    filter: &FilterSpec,
    generated_at: DateTime<Utc>,
) -> Result<ReportDocument> {
    filter.validate()?;
    Ok(assemble(tables, filter, generated_at))
}

fn assemble(tables: &Tables, filter: &FilterSpec, generated_at: DateTime<Utc>) -> ReportDocument {
    let mut by_type: BTreeMap<ReportType, Vec<ReportEntry>> = BTreeMap::new();
    for r in tables.reports().filter(|r| filter.matches(r)) {
        by_type
            .entry(r.report_type)
            .or_default()
            .push(ReportEntry::from_record(r, tables));
    }
    let mut entry_count = 0;
    let sections = ReportCategory::ALL
        .into_iter()
        .map(|category| Section {
            category,
            subsections: category
                .report_types()
                .map(|report_type| {
                    let mut entries = by_type.remove(&report_type).unwrap_or_default();
                    entries.sort_by(|a, b| {
                        (&a.cmi_code, a.submitted_at, &a.id).cmp(&(
                            &b.cmi_code,
                            b.submitted_at,
                            &b.id,
                        ))
                    });
                    entry_count += entries.len();
                    Subsection {
                        report_type,
                        entries,
                    }
                })
                .collect(),
        })
        .collect();
    ReportDocument {
        generated_at,
        scope: filter.scope.clone(),
        period: Period {
            year: filter.period_year,
            quarter: filter.period_quarter,
        },
        sections,
        entry_count,
    }
}
