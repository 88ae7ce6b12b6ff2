use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ids::{CmiId, EngagementId, ReportId, ResearcherId, UserId};
use super::taxonomy::{classify_report_type, ReportCategory, ReportType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InstitutionKind {
    StateUniversity,
    College,
    ResearchAgency,
    Other,
}

/// A consortium member institution: the unit every record is scoped to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cmi {
    pub id: CmiId,
    pub code: String,
    pub name: String,
    pub institution_kind: InstitutionKind,
    pub active: bool,
    pub entity_version: u64,
    #[serde(default)]
    pub deleted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Researcher {
    pub id: ResearcherId,
    pub full_name: String,
    pub cmi_id: CmiId,
    pub email: String,
    pub expertise: String,
    pub entity_version: u64,
    #[serde(default)]
    pub deleted: bool,
}

/// One submitted report. The category is derived, never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub id: ReportId,
    pub report_type: ReportType,
    pub cmi_id: CmiId,
    pub engagement_id: Option<EngagementId>,
    pub title: String,
    pub period_year: i32,
    pub period_quarter: Option<u8>,
    pub details: BTreeMap<String, String>,
    pub submitted_by: UserId,
    pub submitted_at: DateTime<Utc>,
    pub deleted: bool,
    pub entity_version: u64,
}

impl ReportRecord {
    pub fn category(&self) -> ReportCategory {
        classify_report_type(self.report_type)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Consortium main office: sees and manages everything.
    Admin,
    /// Member-institution focal person: confined to one CMI.
    CmiFocal,
}

/// A login identity. `password_digest` is a salted one-way digest and is
/// kept out of `Debug` output.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub id: UserId,
    pub username: String,
    pub role: Role,
    pub cmi_id: Option<CmiId>,
    pub password_digest: String,
    pub active: bool,
    pub entity_version: u64,
    #[serde(default)]
    pub deleted: bool,
}

impl fmt::Debug for UserAccount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserAccount")
            .field("id", &self.id)
            .field("username", &self.username)
            .field("role", &self.role)
            .field("cmi_id", &self.cmi_id)
            .field("password_digest", &"<redacted>")
            .field("active", &self.active)
            .field("entity_version", &self.entity_version)
            .field("deleted", &self.deleted)
            .finish()
    }
}

impl UserAccount {
    /// `cmi_id` is required for focal accounts and forbidden for admins.
    pub fn pairing_is_valid(role: Role, cmi_id: Option<&CmiId>) -> bool {
        matches!(
            (role, cmi_id),
            (Role::Admin, None) | (Role::CmiFocal, Some(_))
        )
    }
}

/// Account view safe to hand to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserView {
    pub id: UserId,
    pub username: String,
    pub role: Role,
    pub cmi_id: Option<CmiId>,
    pub active: bool,
    pub entity_version: u64,
    pub deleted: bool,
}

impl From<&UserAccount> for UserView {
    fn from(u: &UserAccount) -> Self {
        UserView {
            id: u.id.clone(),
            username: u.username.clone(),
            role: u.role,
            cmi_id: u.cmi_id.clone(),
            active: u.active,
            entity_version: u.entity_version,
            deleted: u.deleted,
        }
    }
}
