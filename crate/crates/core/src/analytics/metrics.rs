use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::Scope;
use crate::domain::{EngagementKind, EngagementStatus, Pesos, ReportCategory};
use crate::persistence::Tables;

/// Dashboard aggregates over the live (non-deleted) records in one scope.
///
/// Maps only carry keys that were actually observed, so an empty store
/// yields empty maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    /// Store head the aggregates were computed at.
    pub as_of_version: u64,
    pub scope: Scope,
    pub engagement_counts: BTreeMap<EngagementKind, BTreeMap<EngagementStatus, u64>>,
    pub reports_by_category: BTreeMap<ReportCategory, u64>,
    /// Keyed by CMI code.
    pub reports_by_cmi: BTreeMap<String, u64>,
    /// Engagement budgets keyed by the lead CMI's code.
    pub budget_by_cmi: BTreeMap<String, Pesos>,
    /// Engagement budgets keyed by start year.
    pub budget_by_year: BTreeMap<i32, Pesos>,
}

pub fn compute_metrics(tables: &Tables, scope: &Scope) -> MetricsSnapshot {
    let mut m = MetricsSnapshot {
        as_of_version: tables.head(),
        scope: scope.clone(),
        engagement_counts: BTreeMap::new(),
        reports_by_category: BTreeMap::new(),
        reports_by_cmi: BTreeMap::new(),
        budget_by_cmi: BTreeMap::new(),
        budget_by_year: BTreeMap::new(),
    };
    for e in tables
        .engagements()
        .filter(|e| !e.deleted && scope.contains(&e.lead_cmi_id))
    {
        *m.engagement_counts
            .entry(e.kind)
            .or_default()
            .entry(e.status)
            .or_default() += 1;
        let code = tables.cmi_code(Some(&e.lead_cmi_id)).to_owned();
        let by_cmi = m.budget_by_cmi.entry(code).or_default();
        *by_cmi = *by_cmi + e.budget_total;
        let by_year = m.budget_by_year.entry(e.start_date.year()).or_default();
        *by_year = *by_year + e.budget_total;
    }
    for r in tables
        .reports()
        .filter(|r| !r.deleted && scope.contains(&r.cmi_id))
    {
        *m.reports_by_category.entry(r.category()).or_default() += 1;
        *m.reports_by_cmi
            .entry(tables.cmi_code(Some(&r.cmi_id)).to_owned())
            .or_default() += 1;
    }
    m
}
