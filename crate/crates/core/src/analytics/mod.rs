//! Dashboard metrics, consolidated report documents, and the scoped
//! change feed.

mod document;
mod export;
mod metrics;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use document::{
    annual_report, filtered_report, FilterSpec, Period, ReportDocument, ReportEntry, Section,
    Subsection,
};
pub use export::{export_document, ExportFormat, DOCUMENT_CSV_HEADER};
pub use metrics::{compute_metrics, MetricsSnapshot};

use crate::access::{Action, Session};
use crate::domain::CmiId;
use crate::error::{Error, Result};
use crate::persistence::{ChangeSet, Tables};
use crate::service::Consortium;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scope {
    Consortium,
    SingleCmi(CmiId),
}

impl Scope {
    /// Accepts `consortium` or a CMI code or id.
    pub fn parse(raw: &str, tables: &Tables) -> Result<Scope> {
        let raw = raw.trim();
        if raw.is_empty() || raw.eq_ignore_ascii_case("consortium") {
            return Ok(Scope::Consortium);
        }
        tables
            .resolve_cmi(raw)
            .filter(|c| !c.deleted)
            .map(|c| Scope::SingleCmi(c.id.clone()))
            .ok_or_else(|| Error::UnknownCmi(raw.to_owned()))
    }

    pub fn contains(&self, cmi: &CmiId) -> bool {
        match self {
            Scope::Consortium => true,
            Scope::SingleCmi(id) => id == cmi,
        }
    }

    pub fn validate(&self, tables: &Tables) -> Result<()> {
        match self {
            Scope::Consortium => Ok(()),
            Scope::SingleCmi(id) => match tables.cmi(id) {
                Some(c) if !c.deleted => Ok(()),
                _ => Err(Error::UnknownCmi(id.to_string())),
            },
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Consortium => f.write_str("consortium"),
            Scope::SingleCmi(id) => write!(f, "{id}"),
        }
    }
}

impl Consortium {
    pub fn dashboard_metrics(&self, session: &Session, scope: &Scope) -> Result<MetricsSnapshot> {
        let principal = self.principal(session)?;
        let snap = self.store().snapshot();
        scope.validate(&snap)?;
        self.require(&principal, Action::Read, scope)?;
        Ok(compute_metrics(&snap, scope))
    }

    pub fn generate_annual_report(
        &self,
        session: &Session,
        year: i32,
        scope: &Scope,
    ) -> Result<ReportDocument> {
        let principal = self.principal(session)?;
        let snap = self.store().snapshot();
        scope.validate(&snap)?;
        self.require(&principal, Action::Read, scope)?;
        Ok(annual_report(&snap, year, scope, self.clock().now()))
    }

    pub fn generate_filtered_report(
        &self,
        session: &Session,
        filter: &FilterSpec,
    ) -> Result<ReportDocument> {
        let principal = self.principal(session)?;
        let snap = self.store().snapshot();
        filter.scope.validate(&snap)?;
        self.require(&principal, Action::Read, &filter.scope)?;
        filtered_report(&snap, filter, self.clock().now())
    }

    /// Change feed since `version`. Administrators see every entry; a
    /// focal account sees only entries touching its own institution's
    /// records, while `head` is always the global head.
    pub fn monitor(&self, session: &Session, since: u64) -> Result<ChangeSet> {
        let principal = self.principal(session)?;
        let snap = self.store().snapshot();
        if principal.is_admin() {
            return Ok(snap.changes_since(since));
        }
        match &principal.cmi_id {
            Some(cmi) => Ok(snap.changes_since_for_cmi(since, cmi)),
            None => Err(Error::ScopeViolation("account has no institution".into())),
        }
    }
}
