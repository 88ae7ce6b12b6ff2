use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{validate_report_payload, validate_report_revision, ReportPayload};
use crate::access::{Action, Principal, Session};
use crate::analytics::Scope;
use crate::domain::{CmiId, EngagementId, ReportCategory, ReportId, ReportRecord, ReportType};
use crate::error::{Error, Result};
use crate::persistence::{EntityKind, Page, QueryFilter, QueryPage, Record};
use crate::service::Consortium;

/// Partial update of a report. Absent fields are left alone; `null` clears
/// an optional field. `details` replaces the whole map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPatch {
    #[serde(default)]
    pub report_type: Option<ReportType>,
    #[serde(default, deserialize_with = "crate::serde_util::double_option")]
    pub engagement_id: Option<Option<EngagementId>>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub period_year: Option<i32>,
    #[serde(default, deserialize_with = "crate::serde_util::double_option")]
    pub period_quarter: Option<Option<u8>>,
    #[serde(default)]
    pub details: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportQuery {
    #[serde(default)]
    pub cmi_id: Option<CmiId>,
    #[serde(default)]
    pub report_type: Option<ReportType>,
    #[serde(default)]
    pub category: Option<ReportCategory>,
    #[serde(default)]
    pub period_year: Option<i32>,
    #[serde(default)]
    pub include_deleted: bool,
    #[serde(default)]
    pub page: Page,
}

impl Consortium {
    /// Accepts a report for `payload.cmi_id`. Focal accounts may only
    /// submit for their own institution.
    pub fn submit_report(&self, session: &Session, payload: ReportPayload) -> Result<ReportRecord> {
        let principal = self.principal(session)?;
        self.submit_as(&principal, payload)
    }

    pub(crate) fn submit_as(
        &self,
        principal: &Principal,
        payload: ReportPayload,
    ) -> Result<ReportRecord> {
        self.require(
            principal,
            Action::Write,
            &Scope::SingleCmi(payload.cmi_id.clone()),
        )?;
        let violations = validate_report_payload(&payload, &self.store().snapshot());
        if !violations.is_empty() {
            return Err(Error::ValidationFailed(violations));
        }
        let record = ReportRecord {
            id: ReportId::new(""),
            report_type: payload.report_type,
            cmi_id: payload.cmi_id,
            engagement_id: payload.engagement_id,
            title: payload.title,
            period_year: payload.period_year,
            period_quarter: payload.period_quarter,
            details: payload.details,
            submitted_by: principal.user_id.clone(),
            // replaced by the store's commit timestamp
            submitted_at: DateTime::<Utc>::UNIX_EPOCH,
            deleted: false,
            entity_version: 0,
        };
        self.store().insert(&principal.user_id, record)
    }

    pub fn get_report(&self, session: &Session, id: &ReportId) -> Result<ReportRecord> {
        let principal = self.principal(session)?;
        let record: ReportRecord = self.store().snapshot().get_record(id.as_str())?;
        self.require(
            &principal,
            Action::Read,
            &Scope::SingleCmi(record.cmi_id.clone()),
        )?;
        Ok(record)
    }

    pub fn edit_report(
        &self,
        session: &Session,
        id: &ReportId,
        patch: ReportPatch,
        expected_version: u64,
    ) -> Result<ReportRecord> {
        let principal = self.principal(session)?;
        let snapshot = self.store().snapshot();
        let mut record: ReportRecord = snapshot
            .get_record(id.as_str())
            .ok()
            .filter(|r: &ReportRecord| !r.deleted)
            .ok_or_else(|| Error::NotFound {
                kind: EntityKind::ReportRecord,
                id: id.to_string(),
            })?;
        self.require(
            &principal,
            Action::Write,
            &Scope::SingleCmi(record.cmi_id.clone()),
        )?;
        if record.entity_version != expected_version {
            return Err(Error::VersionConflict {
                kind: EntityKind::ReportRecord,
                id: id.to_string(),
                expected: expected_version,
                actual: record.entity_version,
            });
        }

        if let Some(t) = patch.report_type {
            record.report_type = t;
        }
        if let Some(e) = patch.engagement_id {
            record.engagement_id = e;
        }
        if let Some(title) = patch.title {
            record.title = title;
        }
        if let Some(y) = patch.period_year {
            record.period_year = y;
        }
        if let Some(q) = patch.period_quarter {
            record.period_quarter = q;
        }
        if let Some(d) = patch.details {
            record.details = d;
        }
        let previous: ReportRecord = snapshot.get_record(id.as_str())?;
        let violations =
            validate_report_revision(&ReportPayload::from(&record), Some(&previous), &snapshot);
        if !violations.is_empty() {
            return Err(Error::ValidationFailed(violations));
        }
        drop(snapshot);
        self.store()
            .update(&principal.user_id, record, expected_version)
    }

    pub fn delete_report(&self, session: &Session, id: &ReportId) -> Result<u64> {
        let principal = self.principal(session)?;
        let record: ReportRecord = self.store().snapshot().get_record(id.as_str())?;
        self.require(
            &principal,
            Action::Write,
            &Scope::SingleCmi(record.cmi_id.clone()),
        )?;
        self.store()
            .soft_delete(&principal.user_id, EntityKind::ReportRecord, id.as_str())
    }

    /// Lists reports. Focal accounts default to, and are confined to,
    /// their own institution.
    pub fn list_reports(
        &self,
        session: &Session,
        query: ReportQuery,
    ) -> Result<QueryPage<ReportRecord>> {
        let principal = self.principal(session)?;
        let cmi_id = self.listing_scope(&principal, query.cmi_id)?;
        let filter = QueryFilter {
            cmi_id,
            report_type: query.report_type,
            category: query.category,
            period_year: query.period_year,
            include_deleted: query.include_deleted,
            page: query.page,
            ..QueryFilter::new(EntityKind::ReportRecord)
        };
        typed_page(self.store().query(&filter)?)
    }

    /// CMI filter to apply for a listing requested by `principal`.
    pub(crate) fn listing_scope(
        &self,
        principal: &Principal,
        requested: Option<CmiId>,
    ) -> Result<Option<CmiId>> {
        let requested = match requested {
            Some(id) => Some(id),
            None if principal.is_admin() => None,
            None => principal.cmi_id.clone(),
        };
        let scope = match &requested {
            Some(id) => Scope::SingleCmi(id.clone()),
            None => Scope::Consortium,
        };
        self.require(principal, Action::Read, &scope)?;
        Ok(requested)
    }
}

pub(crate) fn typed_page<R: Record>(
    page: QueryPage<crate::persistence::Entity>,
) -> Result<QueryPage<R>> {
    Ok(QueryPage {
        items: page.items.into_iter().filter_map(R::from_entity).collect(),
        total: page.total,
    })
}
