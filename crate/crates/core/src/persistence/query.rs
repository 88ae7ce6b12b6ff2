use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::entity::{Entity, EntityKind};
use super::tables::Tables;
use crate::domain::{CmiId, EngagementKind, EngagementStatus, ReportCategory, ReportType};
use crate::error::{Error, Result};

pub const MAX_PAGE_LIMIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub offset: usize,
    pub limit: usize,
}

impl Default for Page {
    fn default() -> Self {
        Page {
            offset: 0,
            limit: 100,
        }
    }
}

/// Selection over one entity kind. Filters that do not apply to the chosen
/// kind are rejected rather than ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryFilter {
    pub entity_kind: EntityKind,
    #[serde(default)]
    pub cmi_id: Option<CmiId>,
    #[serde(default)]
    pub kind: Option<EngagementKind>,
    #[serde(default)]
    pub status: Option<EngagementStatus>,
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

impl QueryFilter {
    pub fn new(entity_kind: EntityKind) -> Self {
        QueryFilter {
            entity_kind,
            cmi_id: None,
            kind: None,
            status: None,
            report_type: None,
            category: None,
            period_year: None,
            include_deleted: false,
            page: Page::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_PAGE_LIMIT).contains(&self.page.limit) {
            return Err(Error::InvalidFilter(format!(
                "limit must be between 1 and {MAX_PAGE_LIMIT}, got {}",
                self.page.limit
            )));
        }
        let engagement_only = self.kind.is_some() || self.status.is_some();
        let report_only = self.report_type.is_some() || self.category.is_some();
        let dated = self.period_year.is_some();
        let bad = match self.entity_kind {
            EntityKind::Engagement => report_only,
            EntityKind::ReportRecord => engagement_only,
            EntityKind::Cmi | EntityKind::Researcher | EntityKind::UserAccount => {
                engagement_only || report_only || dated
            }
        };
        if bad {
            return Err(Error::InvalidFilter(format!(
                "filter dimension does not apply to {}",
                self.entity_kind
            )));
        }
        Ok(())
    }

    fn matches(&self, entity: &Entity) -> bool {
        if entity.is_deleted() && !self.include_deleted {
            return false;
        }
        if let Some(cmi) = &self.cmi_id {
            if entity.owner_cmi() != Some(cmi) {
                return false;
            }
        }
        match entity {
            Entity::Engagement(e) => {
                self.kind.is_none_or(|k| e.kind == k)
                    && self.status.is_none_or(|s| e.status == s)
                    && self.period_year.is_none_or(|y| e.start_date.year() == y)
            }
            Entity::ReportRecord(r) => {
                self.report_type.is_none_or(|t| r.report_type == t)
                    && self.category.is_none_or(|c| r.category() == c)
                    && self.period_year.is_none_or(|y| r.period_year == y)
            }
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPage<T> {
    pub items: Vec<T>,
    pub total: usize,
}

impl Tables {
    /// Sort key shared by every listing: owning CMI code, then the record's
    /// period or start date, then id.
    pub fn sort_key(&self, entity: &Entity) -> (String, i64, String) {
        let date_key = match entity {
            Entity::ReportRecord(r) => {
                i64::from(r.period_year) * 10 + i64::from(r.period_quarter.unwrap_or(0))
            }
            Entity::Engagement(e) => i64::from(e.start_date.num_days_from_ce()),
            _ => 0,
        };
        (
            self.cmi_code(entity.owner_cmi()).to_owned(),
            date_key,
            entity.id().to_owned(),
        )
    }

    pub fn query(&self, filter: &QueryFilter) -> Result<QueryPage<Entity>> {
        filter.validate()?;
        let candidates: Vec<Entity> = match filter.entity_kind {
            EntityKind::Cmi => self.cmis().cloned().map(Entity::from).collect(),
            EntityKind::Engagement => self.engagements().cloned().map(Entity::from).collect(),
            EntityKind::ReportRecord => self.reports().cloned().map(Entity::from).collect(),
            EntityKind::Researcher => self.researchers().cloned().map(Entity::from).collect(),
            EntityKind::UserAccount => self.users().cloned().map(Entity::from).collect(),
        };
        let mut keyed: Vec<_> = candidates
            .into_iter()
            .filter(|e| filter.matches(e))
            .map(|e| (self.sort_key(&e), e))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let total = keyed.len();
        let items = keyed
            .into_iter()
            .skip(filter.page.offset)
            .take(filter.page.limit)
            .map(|(_, e)| e)
            .collect();
        Ok(QueryPage { items, total })
    }
}
