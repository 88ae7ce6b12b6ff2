use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::entity::{Entity, EntityKind, Record};
use crate::acquisition::{self, ReportPayload, Violation};
use crate::domain::{
    validate_engagement_link, validate_status_transition, Cmi, CmiId, Engagement, EngagementId,
    HierarchyViolation, ReportId, ReportRecord, Researcher, ResearcherId, UserAccount, UserId,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuditAction {
    Create,
    Update,
    SoftDelete,
}

/// One line of the append-only change history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub global_version: u64,
    pub actor: UserId,
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub action: AuditAction,
    pub at: DateTime<Utc>,
}

/// The full in-memory image of a store at one global version.
#[derive(Debug, Clone, Default)]
pub struct Tables {
    cmis: BTreeMap<String, Cmi>,
    engagements: BTreeMap<String, Engagement>,
    reports: BTreeMap<String, ReportRecord>,
    researchers: BTreeMap<String, Researcher>,
    users: BTreeMap<String, UserAccount>,
    cmi_codes: HashMap<String, CmiId>,
    // lowercased username -> id
    usernames: HashMap<String, UserId>,
    audit: Vec<AuditEntry>,
    // owning CMI of each audit entry's record at write time, parallel to `audit`
    owners: Vec<Option<CmiId>>,
    created: u64,
}

impl Tables {
    /// Number of successful mutations applied so far.
    pub fn head(&self) -> u64 {
        self.audit.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.audit.is_empty()
    }

    pub fn cmi(&self, id: &CmiId) -> Option<&Cmi> {
        self.cmis.get(id.as_str())
    }

    pub fn cmi_by_code(&self, code: &str) -> Option<&Cmi> {
        self.cmi_codes.get(code).and_then(|id| self.cmi(id))
    }

    /// Resolves either a CMI code or a CMI id.
    pub fn resolve_cmi(&self, code_or_id: &str) -> Option<&Cmi> {
        self.cmi_by_code(code_or_id)
            .or_else(|| self.cmis.get(code_or_id))
    }

    pub fn cmis(&self) -> impl Iterator<Item = &Cmi> {
        self.cmis.values()
    }

    pub fn engagement(&self, id: &EngagementId) -> Option<&Engagement> {
        self.engagements.get(id.as_str())
    }

    pub fn engagements(&self) -> impl Iterator<Item = &Engagement> {
        self.engagements.values()
    }

    pub fn report(&self, id: &ReportId) -> Option<&ReportRecord> {
        self.reports.get(id.as_str())
    }

    pub fn reports(&self) -> impl Iterator<Item = &ReportRecord> {
        self.reports.values()
    }

    pub fn researcher(&self, id: &ResearcherId) -> Option<&Researcher> {
        self.researchers.get(id.as_str())
    }

    pub fn researchers(&self) -> impl Iterator<Item = &Researcher> {
        self.researchers.values()
    }

    pub fn user(&self, id: &UserId) -> Option<&UserAccount> {
        self.users.get(id.as_str())
    }

    pub fn user_by_username(&self, username: &str) -> Option<&UserAccount> {
        self.usernames
            .get(&username.to_lowercase())
            .and_then(|id| self.user(id))
    }

    pub fn users(&self) -> impl Iterator<Item = &UserAccount> {
        self.users.values()
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// CMI code used for ordering and display; empty for unscoped records.
    pub fn cmi_code(&self, id: Option<&CmiId>) -> &str {
        id.and_then(|id| self.cmi(id))
            .map(|c| c.code.as_str())
            .unwrap_or("")
    }

    pub fn get(&self, kind: EntityKind, id: &str) -> Result<Entity> {
        let found = match kind {
            EntityKind::Cmi => self.cmis.get(id).cloned().map(Entity::from),
            EntityKind::Engagement => self.engagements.get(id).cloned().map(Entity::from),
            EntityKind::ReportRecord => self.reports.get(id).cloned().map(Entity::from),
            EntityKind::Researcher => self.researchers.get(id).cloned().map(Entity::from),
            EntityKind::UserAccount => self.users.get(id).cloned().map(Entity::from),
        };
        found.ok_or_else(|| Error::NotFound {
            kind,
            id: id.to_owned(),
        })
    }

    pub fn get_record<R: Record>(&self, id: &str) -> Result<R> {
        self.get(R::KIND, id)
            .map(|e| R::from_entity(e).expect("kind-matched lookup"))
    }

    pub(crate) fn audit_with_owners(&self) -> impl Iterator<Item = (&AuditEntry, Option<&CmiId>)> {
        self.audit
            .iter()
            .zip(self.owners.iter().map(Option::as_ref))
    }

    pub(crate) fn next_id(&self, kind: EntityKind) -> String {
        format!("{}-{:010}", kind.id_prefix(), self.created + 1)
    }

    /// Checks `entity` against the current tables. `previous` is the stored
    /// version when this is an update.
    pub(crate) fn check(&self, entity: &Entity, previous: Option<&Entity>) -> Result<()> {
        match (entity, previous) {
            (Entity::Cmi(c), _) => self.check_cmi(c),
            (Entity::Engagement(e), Some(Entity::Engagement(p))) => {
                self.check_engagement(e, Some(p))
            }
            (Entity::Engagement(e), _) => self.check_engagement(e, None),
            (Entity::ReportRecord(r), Some(Entity::ReportRecord(p))) => {
                self.check_report(r, Some(p))
            }
            (Entity::ReportRecord(r), _) => self.check_report(r, None),
            (Entity::Researcher(r), previous) => {
                require_text(&[("full_name", &r.full_name)])?;
                let kept = previous.and_then(Entity::owner_cmi);
                self.require_cmi("cmi_id", &r.cmi_id, kept)
            }
            (Entity::UserAccount(u), previous) => {
                let kept = previous.and_then(Entity::owner_cmi);
                self.check_user(u, kept)
            }
        }
    }

    fn check_cmi(&self, c: &Cmi) -> Result<()> {
        require_text(&[("code", &c.code), ("name", &c.name)])?;
        match self.cmi_codes.get(&c.code) {
            Some(owner) if *owner != c.id => Err(Error::DuplicateCode(c.code.clone())),
            _ => Ok(()),
        }
    }

    fn check_engagement(&self, e: &Engagement, previous: Option<&Engagement>) -> Result<()> {
        let mut violations = Vec::new();
        if e.title.trim().is_empty() {
            violations.push(Violation::MissingField {
                field: "title".into(),
            });
        }
        if e.start_date > e.end_date {
            violations.push(Violation::InvalidDateRange);
        }
        if !violations.is_empty() {
            return Err(Error::ValidationFailed(violations));
        }

        self.require_cmi(
            "lead_cmi_id",
            &e.lead_cmi_id,
            previous.map(|p| &p.lead_cmi_id),
        )?;
        let leader_kept = previous.is_some_and(|p| p.leader_id == e.leader_id);
        match self.researcher(&e.leader_id) {
            Some(r) if !r.deleted || leader_kept => {}
            _ => {
                return Err(Error::ReferenceViolation {
                    field: "leader_id",
                    kind: EntityKind::Researcher,
                    id: e.leader_id.to_string(),
                })
            }
        }

        let parent_kind = match &e.parent_id {
            None => None,
            Some(pid) => {
                if pid == &e.id {
                    return Err(
                        HierarchyViolation::new("an engagement cannot be its own parent").into(),
                    );
                }
                let kept = previous.is_some_and(|p| p.parent_id.as_ref() == Some(pid));
                match self.engagement(pid) {
                    Some(p) if !p.deleted || kept => Some(p.kind),
                    _ => {
                        return Err(Error::ReferenceViolation {
                            field: "parent_id",
                            kind: EntityKind::Engagement,
                            id: pid.to_string(),
                        })
                    }
                }
            }
        };
        validate_engagement_link(e.kind, parent_kind)?;

        if let Some(prev) = previous {
            if prev.kind != e.kind {
                return Err(HierarchyViolation::new("engagement kind cannot change").into());
            }
            if prev.status != e.status && !validate_status_transition(prev.status, e.status) {
                return Err(Error::InvalidTransition {
                    from: prev.status,
                    to: e.status,
                });
            }
        }
        Ok(())
    }

    fn check_report(&self, r: &ReportRecord, previous: Option<&ReportRecord>) -> Result<()> {
        self.require_cmi("cmi_id", &r.cmi_id, previous.map(|p| &p.cmi_id))?;
        if self.user(&r.submitted_by).is_none() {
            return Err(Error::ReferenceViolation {
                field: "submitted_by",
                kind: EntityKind::UserAccount,
                id: r.submitted_by.to_string(),
            });
        }
        let violations =
            acquisition::validate_report_revision(&ReportPayload::from(r), previous, self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationFailed(violations))
        }
    }

    fn check_user(&self, u: &UserAccount, kept_cmi: Option<&CmiId>) -> Result<()> {
        require_text(&[("username", &u.username)])?;
        if !UserAccount::pairing_is_valid(u.role, u.cmi_id.as_ref()) {
            return Err(Error::InvalidPairing);
        }
        if let Some(owner) = self.usernames.get(&u.username.to_lowercase()) {
            if *owner != u.id {
                return Err(Error::DuplicateUsername);
            }
        }
        if let Some(cmi) = &u.cmi_id {
            self.require_cmi("cmi_id", cmi, kept_cmi)?;
        }
        Ok(())
    }

    /// The CMI must exist and be live, unless this is an update that keeps
    /// the reference it already had.
    fn require_cmi(&self, field: &'static str, id: &CmiId, kept: Option<&CmiId>) -> Result<()> {
        match self.cmi(id) {
            Some(c) if !c.deleted || kept == Some(id) => Ok(()),
            _ => Err(Error::ReferenceViolation {
                field,
                kind: EntityKind::Cmi,
                id: id.to_string(),
            }),
        }
    }

    /// Installs an already-validated write. Used both for live writes and
    /// for journal replay.
    pub(crate) fn apply(&mut self, entry: AuditEntry, entity: Entity) {
        debug_assert_eq!(entry.global_version, self.head() + 1);
        if entry.action == AuditAction::Create {
            self.created += 1;
        }
        self.owners.push(entity.owner_cmi().cloned());
        self.audit.push(entry);
        match entity {
            Entity::Cmi(c) => {
                if let Some(old) = self.cmis.get(c.id.as_str()) {
                    if old.code != c.code {
                        self.cmi_codes.remove(&old.code);
                    }
                }
                self.cmi_codes.insert(c.code.clone(), c.id.clone());
                self.cmis.insert(c.id.to_string(), c);
            }
            Entity::Engagement(e) => {
                self.engagements.insert(e.id.to_string(), e);
            }
            Entity::ReportRecord(r) => {
                self.reports.insert(r.id.to_string(), r);
            }
            Entity::Researcher(r) => {
                self.researchers.insert(r.id.to_string(), r);
            }
            Entity::UserAccount(u) => {
                if let Some(old) = self.users.get(u.id.as_str()) {
                    let old_key = old.username.to_lowercase();
                    if old_key != u.username.to_lowercase() {
                        self.usernames.remove(&old_key);
                    }
                }
                self.usernames
                    .insert(u.username.to_lowercase(), u.id.clone());
                self.users.insert(u.id.to_string(), u);
            }
        }
    }
}

fn require_text(fields: &[(&str, &String)]) -> Result<()> {
    let missing: Vec<_> = fields
        .iter()
        .filter(|(_, v)| v.trim().is_empty())
        .map(|(f, _)| Violation::MissingField {
            field: (*f).to_owned(),
        })
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::ValidationFailed(missing))
    }
}
