use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::reports::typed_page;
use crate::access::{Action, Principal, Session};
use crate::analytics::Scope;
use crate::domain::{
    rollup, Cmi, CmiId, Engagement, EngagementId, EngagementKind, EngagementStatus,
    InstitutionKind, Pesos, Researcher, ResearcherId, Rollup,
};
use crate::error::Result;
use crate::persistence::{EntityKind, Page, QueryFilter, QueryPage, Tables};
use crate::service::Consortium;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewCmi {
    pub code: String,
    pub name: String,
    pub institution_kind: InstitutionKind,
    #[serde(default = "default_true")]
    pub active: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmiPatch {
    #[serde(default)]
    pub code: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub institution_kind: Option<InstitutionKind>,
    #[serde(default)]
    pub active: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewEngagement {
    pub kind: EngagementKind,
    #[serde(default)]
    pub parent_id: Option<EngagementId>,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub lead_cmi_id: CmiId,
    pub leader_id: ResearcherId,
    #[serde(default)]
    pub funding_agency: String,
    pub budget_total: Pesos,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    #[serde(default = "default_status")]
    pub status: EngagementStatus,
}

fn default_status() -> EngagementStatus {
    EngagementStatus::Proposed
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementPatch {
    #[serde(default, deserialize_with = "crate::serde_util::double_option")]
    pub parent_id: Option<Option<EngagementId>>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub lead_cmi_id: Option<CmiId>,
    #[serde(default)]
    pub leader_id: Option<ResearcherId>,
    #[serde(default)]
    pub funding_agency: Option<String>,
    #[serde(default)]
    pub budget_total: Option<Pesos>,
    #[serde(default)]
    pub start_date: Option<NaiveDate>,
    #[serde(default)]
    pub end_date: Option<NaiveDate>,
    #[serde(default)]
    pub status: Option<EngagementStatus>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementQuery {
    #[serde(default)]
    pub cmi_id: Option<CmiId>,
    #[serde(default)]
    pub kind: Option<EngagementKind>,
    #[serde(default)]
    pub status: Option<EngagementStatus>,
    #[serde(default)]
    pub period_year: Option<i32>,
    #[serde(default)]
    pub include_deleted: bool,
    #[serde(default)]
    pub page: Page,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewResearcher {
    pub full_name: String,
    pub cmi_id: CmiId,
    #[serde(default)]
    pub email: String,
    #[serde(default)]
    pub expertise: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearcherPatch {
    #[serde(default)]
    pub full_name: Option<String>,
    #[serde(default)]
    pub cmi_id: Option<CmiId>,
    #[serde(default)]
    pub email: Option<String>,
    #[serde(default)]
    pub expertise: Option<String>,
}

impl Consortium {
    pub fn create_cmi(&self, session: &Session, new_cmi: NewCmi) -> Result<Cmi> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        self.insert_cmi(&principal, new_cmi)
    }

    pub(crate) fn insert_cmi(&self, principal: &Principal, new_cmi: NewCmi) -> Result<Cmi> {
        let cmi = Cmi {
            id: CmiId::new(""),
            code: new_cmi.code.trim().to_owned(),
            name: new_cmi.name,
            institution_kind: new_cmi.institution_kind,
            active: new_cmi.active,
            entity_version: 0,
            deleted: false,
        };
        self.store().insert(&principal.user_id, cmi)
    }

    pub fn update_cmi(
        &self,
        session: &Session,
        id: &CmiId,
        patch: CmiPatch,
        expected_version: u64,
    ) -> Result<Cmi> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        let mut cmi: Cmi = self.store().snapshot().get_record(id.as_str())?;
        if let Some(code) = patch.code {
            cmi.code = code.trim().to_owned();
        }
        if let Some(name) = patch.name {
            cmi.name = name;
        }
        if let Some(kind) = patch.institution_kind {
            cmi.institution_kind = kind;
        }
        if let Some(active) = patch.active {
            cmi.active = active;
        }
        self.store()
            .update(&principal.user_id, cmi, expected_version)
    }

    pub fn delete_cmi(&self, session: &Session, id: &CmiId) -> Result<u64> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        self.store()
            .soft_delete(&principal.user_id, EntityKind::Cmi, id.as_str())
    }

    /// Non-deleted institutions visible to the session, by code.
    pub fn list_cmis(&self, session: &Session) -> Result<Vec<Cmi>> {
        let principal = self.principal(session)?;
        let snapshot = self.store().snapshot();
        let mut out: Vec<Cmi> = snapshot
            .cmis()
            .filter(|c| !c.deleted)
            .filter(|c| principal.is_admin() || principal.cmi_id.as_ref() == Some(&c.id))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.code.cmp(&b.code).then_with(|| a.id.cmp(&b.id)));
        Ok(out)
    }

    pub fn create_engagement(&self, session: &Session, new: NewEngagement) -> Result<Engagement> {
        let principal = self.principal(session)?;
        self.insert_engagement(&principal, new)
    }

    pub(crate) fn insert_engagement(
        &self,
        principal: &Principal,
        new: NewEngagement,
    ) -> Result<Engagement> {
        let engagement = Engagement {
            id: EngagementId::new(""),
            kind: new.kind,
            parent_id: new.parent_id,
            title: new.title,
            description: new.description,
            lead_cmi_id: new.lead_cmi_id,
            leader_id: new.leader_id,
            funding_agency: new.funding_agency,
            budget_total: new.budget_total,
            start_date: new.start_date,
            end_date: new.end_date,
            status: new.status,
            entity_version: 0,
            deleted: false,
        };
        self.check_engagement_scope(principal, &engagement, &self.store().snapshot())?;
        self.store().insert(&principal.user_id, engagement)
    }

    pub fn get_engagement(&self, session: &Session, id: &EngagementId) -> Result<Engagement> {
        let principal = self.principal(session)?;
        let engagement: Engagement = self.store().snapshot().get_record(id.as_str())?;
        self.require(
            &principal,
            Action::Read,
            &Scope::SingleCmi(engagement.lead_cmi_id.clone()),
        )?;
        Ok(engagement)
    }

    pub fn update_engagement(
        &self,
        session: &Session,
        id: &EngagementId,
        patch: EngagementPatch,
        expected_version: u64,
    ) -> Result<Engagement> {
        let principal = self.principal(session)?;
        let snapshot = self.store().snapshot();
        let mut e: Engagement = snapshot.get_record(id.as_str())?;
        self.require(
            &principal,
            Action::Write,
            &Scope::SingleCmi(e.lead_cmi_id.clone()),
        )?;
        if let Some(parent) = patch.parent_id {
            e.parent_id = parent;
        }
        if let Some(title) = patch.title {
            e.title = title;
        }
        if let Some(description) = patch.description {
            e.description = description;
        }
        if let Some(lead) = patch.lead_cmi_id {
            e.lead_cmi_id = lead;
        }
        if let Some(leader) = patch.leader_id {
            e.leader_id = leader;
        }
        if let Some(agency) = patch.funding_agency {
            e.funding_agency = agency;
        }
        if let Some(budget) = patch.budget_total {
            e.budget_total = budget;
        }
        if let Some(start) = patch.start_date {
            e.start_date = start;
        }
        if let Some(end) = patch.end_date {
            e.end_date = end;
        }
        if let Some(status) = patch.status {
            e.status = status;
        }
        self.check_engagement_scope(&principal, &e, &snapshot)?;
        drop(snapshot);
        self.store().update(&principal.user_id, e, expected_version)
    }

    pub fn delete_engagement(&self, session: &Session, id: &EngagementId) -> Result<u64> {
        let principal = self.principal(session)?;
        let e: Engagement = self.store().snapshot().get_record(id.as_str())?;
        self.require(&principal, Action::Write, &Scope::SingleCmi(e.lead_cmi_id))?;
        self.store()
            .soft_delete(&principal.user_id, EntityKind::Engagement, id.as_str())
    }

    pub fn list_engagements(
        &self,
        session: &Session,
        query: EngagementQuery,
    ) -> Result<QueryPage<Engagement>> {
        let principal = self.principal(session)?;
        let cmi_id = self.listing_scope(&principal, query.cmi_id)?;
        let filter = QueryFilter {
            cmi_id,
            kind: query.kind,
            status: query.status,
            period_year: query.period_year,
            include_deleted: query.include_deleted,
            page: query.page,
            ..QueryFilter::new(EntityKind::Engagement)
        };
        typed_page(self.store().query(&filter)?)
    }

    /// Budget and child counts over an engagement's live subtree.
    pub fn engagement_rollup(&self, session: &Session, id: &EngagementId) -> Result<Rollup> {
        let root = self.get_engagement(session, id)?;
        let snapshot = self.store().snapshot();
        let mut descendants = Vec::new();
        let mut frontier = vec![root.id.clone()];
        while let Some(parent) = frontier.pop() {
            for child in snapshot
                .engagements()
                .filter(|e| !e.deleted && e.parent_id.as_ref() == Some(&parent))
            {
                frontier.push(child.id.clone());
                descendants.push(child.clone());
            }
        }
        Ok(rollup(&root, &descendants)?)
    }

    /// Focal accounts may only link to engagements and researchers of
    /// their own institution.
    fn check_engagement_scope(
        &self,
        principal: &Principal,
        e: &Engagement,
        tables: &Tables,
    ) -> Result<()> {
        self.require(
            principal,
            Action::Write,
            &Scope::SingleCmi(e.lead_cmi_id.clone()),
        )?;
        if principal.is_admin() {
            return Ok(());
        }
        if let Some(parent) = e.parent_id.as_ref().and_then(|p| tables.engagement(p)) {
            self.require(
                principal,
                Action::Write,
                &Scope::SingleCmi(parent.lead_cmi_id.clone()),
            )?;
        }
        if let Some(leader) = tables.researcher(&e.leader_id) {
            self.require(
                principal,
                Action::Write,
                &Scope::SingleCmi(leader.cmi_id.clone()),
            )?;
        }
        Ok(())
    }

    pub fn create_researcher(&self, session: &Session, new: NewResearcher) -> Result<Researcher> {
        let principal = self.principal(session)?;
        self.insert_researcher(&principal, new)
    }

    pub(crate) fn insert_researcher(
        &self,
        principal: &Principal,
        new: NewResearcher,
    ) -> Result<Researcher> {
        self.require(
            principal,
            Action::Write,
            &Scope::SingleCmi(new.cmi_id.clone()),
        )?;
        let researcher = Researcher {
            id: ResearcherId::new(""),
            full_name: new.full_name,
            cmi_id: new.cmi_id,
            email: new.email,
            expertise: new.expertise,
            entity_version: 0,
            deleted: false,
        };
        self.store().insert(&principal.user_id, researcher)
    }

    pub fn update_researcher(
        &self,
        session: &Session,
        id: &ResearcherId,
        patch: ResearcherPatch,
        expected_version: u64,
    ) -> Result<Researcher> {
        let principal = self.principal(session)?;
        let mut r: Researcher = self.store().snapshot().get_record(id.as_str())?;
        self.require(
            &principal,
            Action::Write,
            &Scope::SingleCmi(r.cmi_id.clone()),
        )?;
        if let Some(name) = patch.full_name {
            r.full_name = name;
        }
        if let Some(cmi) = patch.cmi_id {
            self.require(&principal, Action::Write, &Scope::SingleCmi(cmi.clone()))?;
            r.cmi_id = cmi;
        }
        if let Some(email) = patch.email {
            r.email = email;
        }
        if let Some(expertise) = patch.expertise {
            r.expertise = expertise;
        }
        self.store().update(&principal.user_id, r, expected_version)
    }

    pub fn delete_researcher(&self, session: &Session, id: &ResearcherId) -> Result<u64> {
        let principal = self.principal(session)?;
        let r: Researcher = self.store().snapshot().get_record(id.as_str())?;
        self.require(&principal, Action::Write, &Scope::SingleCmi(r.cmi_id))?;
        self.store()
            .soft_delete(&principal.user_id, EntityKind::Researcher, id.as_str())
    }

    pub fn list_researchers(
        &self,
        session: &Session,
        cmi_id: Option<CmiId>,
        include_deleted: bool,
        page: Page,
    ) -> Result<QueryPage<Researcher>> {
        let principal = self.principal(session)?;
        let cmi_id = self.listing_scope(&principal, cmi_id)?;
        let filter = QueryFilter {
            cmi_id,
            include_deleted,
            page,
            ..QueryFilter::new(EntityKind::Researcher)
        };
        typed_page(self.store().query(&filter)?)
    }
}
