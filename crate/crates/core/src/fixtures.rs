//! Deterministic seed data for development, demos and tests.
//!
//! Canonical profile: 29 member institutions `CMI-01` .. `CMI-29`, one
//! administrator and one focal account per institution, two researchers
//! per institution, five engagements per institution (a program with two
//! projects, a sub-project under the first project, and a standalone
//! project) and four reports per institution, which together cover all
//! sixteen report types across 2023 and 2024.
//!
//! Seeded passwords (development only):
//!
//! | account             | password             |
//! |---------------------|----------------------|
//! | `admin`             | [`ADMIN_PASSWORD`]   |
//! | `focal-cmi-NN`      | [`FOCAL_PASSWORD`]   |
//!
//! Record contents depend only on the profile. Timestamps come from the
//! store clock, so byte-identical exports need a deterministic clock such
//! as [`fixture_clock`].

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, TimeDelta, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::access::{NewUser, Principal};
use crate::acquisition::{
    required_detail_keys, NewCmi, NewEngagement, NewResearcher, ReportPayload,
};
use crate::clock::SteppingClock;
use crate::domain::{
    CmiId, Engagement, EngagementKind, EngagementStatus, InstitutionKind, Pesos, ReportType,
    ResearcherId, Role,
};
use crate::error::{Error, Result};
use crate::persistence::EntityKind;
use crate::service::Consortium;

pub const CANONICAL_CMI_COUNT: usize = 29;
pub const ADMIN_USERNAME: &str = "admin";
pub const ADMIN_PASSWORD: &str = "admin-dev-password";
pub const FOCAL_PASSWORD: &str = "focal-dev-password";

/// Username of the focal account seeded for the institution numbered `n`
/// (1-based).
pub fn focal_username(n: usize) -> String {
    format!("focal-cmi-{n:02}")
}

pub fn cmi_code(n: usize) -> String {
    format!("CMI-{n:02}")
}

/// A clock starting at 2025-01-06T00:00:00Z and advancing one second per
/// read.
pub fn fixture_clock() -> Arc<SteppingClock> {
    let start = DateTime::parse_from_rfc3339("2025-01-06T00:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc);
    Arc::new(SteppingClock::new(start, TimeDelta::seconds(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum SeedProfile {
    Canonical,
    /// The canonical institutions, accounts, researchers and engagements,
    /// without any reports. Ids match a canonical seed of an empty store.
    CanonicalRegistry,
    /// `size` reports spread over a random number of institutions.
    Random {
        seed: u64,
        size: usize,
    },
}

impl FromStr for SeedProfile {
    type Err = Error;

    /// `canonical`, `canonical-registry`, or `random:SEED:SIZE`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFilter(format!("unknown seed profile `{s}`"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["canonical"] => Ok(SeedProfile::Canonical),
            ["canonical-registry"] => Ok(SeedProfile::CanonicalRegistry),
            ["random", seed, size] => Ok(SeedProfile::Random {
                seed: seed.parse().map_err(|_| bad())?,
                size: size.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub cmis: usize,
    pub users: usize,
    pub researchers: usize,
    pub engagements: usize,
    pub reports: usize,
    pub deleted_reports: usize,
    /// Store writes performed by the seed.
    pub writes: u64,
    pub head: u64,
}

/// Loads a fixture. A non-empty store is refused unless dev mode is on,
/// in which case institutions and accounts that already exist (by code or
/// username) are reused and everything else is added.
pub fn seed_fixture(consortium: &Consortium, profile: SeedProfile) -> Result<SeedSummary> {
    let start = consortium.store().head();
    if start > 0 && !consortium.auth_config().dev_mode {
        return Err(Error::NonEmptyStore);
    }
    let mut seeder = Seeder {
        c: consortium,
        actor: Principal::system(),
        summary: SeedSummary::default(),
    };
    match profile {
        SeedProfile::Canonical => seeder.canonical(true)?,
        SeedProfile::CanonicalRegistry => seeder.canonical(false)?,
        SeedProfile::Random { seed, size } => seeder.random(seed, size)?,
    }
    let mut summary = seeder.summary;
    summary.head = consortium.store().head();
    summary.writes = summary.head - start;
    Ok(summary)
}

struct Seeder<'a> {
    c: &'a Consortium,
    actor: Principal,
    summary: SeedSummary,
}

struct CmiPlan {
    id: CmiId,
    focal: Option<Principal>,
    researchers: Vec<ResearcherId>,
    engagements: Vec<Engagement>,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid fixture date")
}

fn institution_kind(n: usize) -> InstitutionKind {
    match n % 7 {
        0 => InstitutionKind::ResearchAgency,
        1 | 4 => InstitutionKind::College,
        6 => InstitutionKind::Other,
        _ => InstitutionKind::StateUniversity,
    }
}

fn details_for(report_type: ReportType, tag: &str, extra: bool) -> BTreeMap<String, String> {
    let mut details: BTreeMap<String, String> = required_detail_keys(report_type)
        .iter()
        .map(|k| ((*k).to_owned(), format!("{k} {tag}")))
        .collect();
    if extra && details.len() < 3 {
        details.insert("notes".into(), format!("notes {tag}"));
    }
    details
}

impl Seeder<'_> {
    fn ensure_cmi(&mut self, n: usize, name: String) -> Result<CmiId> {
        let code = cmi_code(n);
        if let Some(existing) = self
            .c
            .store()
            .snapshot()
            .cmi_by_code(&code)
            .filter(|c| !c.deleted)
        {
            return Ok(existing.id.clone());
        }
        let cmi = self.c.insert_cmi(
            &self.actor,
            NewCmi {
                code,
                name,
                institution_kind: institution_kind(n),
                active: true,
            },
        )?;
        self.summary.cmis += 1;
        Ok(cmi.id)
    }

    /// Returns the account as a principal, so its reports can be
    /// submitted under it.
    fn ensure_user(
        &mut self,
        username: String,
        role: Role,
        cmi_id: Option<CmiId>,
        password: &str,
    ) -> Result<Principal> {
        let existing = self
            .c
            .store()
            .snapshot()
            .user_by_username(&username)
            .map(|u| u.id.clone());
        let user_id = match existing {
            Some(id) => id,
            None => {
                let user = self.c.insert_user(
                    &self.actor,
                    NewUser {
                        username,
                        role,
                        cmi_id: cmi_id.clone(),
                        password: password.to_owned(),
                    },
                )?;
                self.summary.users += 1;
                user.id
            }
        };
        Ok(Principal {
            user_id,
            role,
            cmi_id,
        })
    }

    fn researcher(
        &mut self,
        cmi_id: &CmiId,
        full_name: String,
        expertise: &str,
    ) -> Result<ResearcherId> {
        let email = format!("{}@example.org", full_name.to_lowercase().replace(' ', "."));
        let r = self.c.insert_researcher(
            &self.actor,
            NewResearcher {
                full_name,
                cmi_id: cmi_id.clone(),
                email,
                expertise: expertise.to_owned(),
            },
        )?;
        self.summary.researchers += 1;
        Ok(r.id)
    }

    fn engagement(&mut self, new: NewEngagement) -> Result<Engagement> {
        let e = self.c.insert_engagement(&self.actor, new)?;
        self.summary.engagements += 1;
        Ok(e)
    }

    fn report(
        &mut self,
        submitter: &Principal,
        payload: ReportPayload,
    ) -> Result<crate::domain::ReportRecord> {
        let r = self.c.submit_as(submitter, payload)?;
        self.summary.reports += 1;
        Ok(r)
    }

    fn canonical(&mut self, with_reports: bool) -> Result<()> {
        let mut plans = Vec::with_capacity(CANONICAL_CMI_COUNT);
        for n in 1..=CANONICAL_CMI_COUNT {
            let id = self.ensure_cmi(n, format!("Member Institution {n:02}"))?;
            plans.push(CmiPlan {
                id,
                focal: None,
                researchers: Vec::new(),
                engagements: Vec::new(),
            });
        }
        self.ensure_user(ADMIN_USERNAME.into(), Role::Admin, None, ADMIN_PASSWORD)?;
        for (i, plan) in plans.iter_mut().enumerate() {
            let focal = self.ensure_user(
                focal_username(i + 1),
                Role::CmiFocal,
                Some(plan.id.clone()),
                FOCAL_PASSWORD,
            )?;
            plan.focal = Some(focal);
        }
        for (i, plan) in plans.iter_mut().enumerate() {
            let n = i + 1;
            for (suffix, field) in [("A", "agriculture"), ("B", "aquatic resources")] {
                let id = self.researcher(&plan.id, format!("Researcher {n:02} {suffix}"), field)?;
                plan.researchers.push(id);
            }
        }
        for (i, plan) in plans.iter_mut().enumerate() {
            let n = i + 1;
            let lead = &plan.researchers[0];
            let other = &plan.researchers[1];
            let base = NewEngagement {
                kind: EngagementKind::Program,
                parent_id: None,
                title: format!("Program {n:02}"),
                description: format!("Regional R&D program led by CMI-{n:02}"),
                lead_cmi_id: plan.id.clone(),
                leader_id: lead.clone(),
                funding_agency: "Council".into(),
                budget_total: Pesos::from_whole(1_000_000 + 10_000 * n as u64),
                start_date: date(2023, 1, 1),
                end_date: date(2025, 12, 31),
                status: EngagementStatus::Ongoing,
            };
            let program = self.engagement(base.clone())?;
            let project_a = self.engagement(NewEngagement {
                kind: EngagementKind::Project,
                parent_id: Some(program.id.clone()),
                title: format!("Project {n:02}-1"),
                budget_total: Pesos::from_whole(250_000 + 1_000 * n as u64),
                start_date: date(2023, 4, 1),
                end_date: date(2024, 12, 31),
                ..base.clone()
            })?;
            let project_b = self.engagement(NewEngagement {
                kind: EngagementKind::Project,
                parent_id: Some(program.id.clone()),
                title: format!("Project {n:02}-2"),
                leader_id: other.clone(),
                budget_total: Pesos::from_whole(180_000 + 500 * n as u64),
                start_date: date(2024, 1, 15),
                end_date: date(2025, 6, 30),
                status: if n % 3 == 0 {
                    EngagementStatus::Proposed
                } else {
                    EngagementStatus::Ongoing
                },
                ..base.clone()
            })?;
            let sub = self.engagement(NewEngagement {
                kind: EngagementKind::SubProject,
                parent_id: Some(project_a.id.clone()),
                title: format!("Sub-project {n:02}-1-1"),
                leader_id: other.clone(),
                budget_total: Pesos::from_whole(60_000 + 100 * n as u64),
                start_date: date(2023, 6, 1),
                end_date: date(2024, 5, 31),
                status: if n % 2 == 0 {
                    EngagementStatus::Completed
                } else {
                    EngagementStatus::Ongoing
                },
                ..base.clone()
            })?;
            let standalone = self.engagement(NewEngagement {
                kind: EngagementKind::Project,
                title: format!("Standalone Project {n:02}"),
                budget_total: Pesos::from_whole(90_000 + 250 * n as u64),
                start_date: date(2024, 3, 1),
                end_date: date(2024, 11, 30),
                status: match n % 4 {
                    0 => EngagementStatus::Completed,
                    1 => EngagementStatus::Ongoing,
                    2 => EngagementStatus::Proposed,
                    _ => EngagementStatus::Terminated,
                },
                ..base
            })?;
            plan.engagements = vec![program, project_a, project_b, sub, standalone];
        }
        if !with_reports {
            return Ok(());
        }
        for (i, plan) in plans.iter().enumerate() {
            let n = i + 1;
            for k in 0..4 {
                let report_type = ReportType::ALL[(4 * i + k) % ReportType::ALL.len()];
                let year = 2023 + ((n + k) % 2) as i32;
                let quarter = (k != 3).then_some(((n + k) % 4) as u8 + 1);
                let engagement_id = match report_type {
                    ReportType::NewProgram => Some(plan.engagements[0].id.clone()),
                    ReportType::NewProject | ReportType::CompletedProject => {
                        Some(plan.engagements[1].id.clone())
                    }
                    ReportType::NewSubProject => Some(plan.engagements[3].id.clone()),
                    ReportType::ProgressReport => Some(plan.engagements[4].id.clone()),
                    _ => None,
                };
                let tag = format!("{n:02}-{k}");
                let focal = plan.focal.as_ref().expect("focal seeded");
                self.report(
                    focal,
                    ReportPayload {
                        report_type,
                        cmi_id: plan.id.clone(),
                        engagement_id,
                        title: format!("{} {tag}", report_type.as_str()),
                        period_year: year,
                        period_quarter: quarter,
                        details: details_for(report_type, &tag, k == 1),
                    },
                )?;
            }
        }
        Ok(())
    }

    fn random(&mut self, seed: u64, size: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cmi_count = (size / 8).clamp(2, CANONICAL_CMI_COUNT);
        let mut plans = Vec::with_capacity(cmi_count);
        for n in 1..=cmi_count {
            let id = self.ensure_cmi(n, format!("Member Institution {n:02}"))?;
            plans.push(CmiPlan {
                id,
                focal: None,
                researchers: Vec::new(),
                engagements: Vec::new(),
            });
        }
        self.ensure_user(ADMIN_USERNAME.into(), Role::Admin, None, ADMIN_PASSWORD)?;
        for (i, plan) in plans.iter_mut().enumerate() {
            let focal = self.ensure_user(
                focal_username(i + 1),
                Role::CmiFocal,
                Some(plan.id.clone()),
                FOCAL_PASSWORD,
            )?;
            plan.focal = Some(focal);
        }
        for (i, plan) in plans.iter_mut().enumerate() {
            for r in 0..rng.random_range(1..=3) {
                let id =
                    self.researcher(&plan.id, format!("Researcher {:02} {r}", i + 1), "general")?;
                plan.researchers.push(id);
            }
            for e in 0..rng.random_range(0..=4) {
                let parent = plan
                    .engagements
                    .iter()
                    .filter(|p| p.kind != EngagementKind::SubProject)
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .map(|p| (p.id.clone(), p.kind));
                let (kind, parent_id) = match (rng.random_bool(0.6), parent) {
                    (true, Some((id, EngagementKind::Program))) => {
                        (EngagementKind::Project, Some(id))
                    }
                    (true, Some((id, _))) => (EngagementKind::SubProject, Some(id)),
                    _ if rng.random_bool(0.5) => (EngagementKind::Program, None),
                    _ => (EngagementKind::Project, None),
                };
                let start = date(rng.random_range(2021..=2025), rng.random_range(1..=12), 1);
                let engagement = self.engagement(NewEngagement {
                    kind,
                    parent_id,
                    title: format!("Engagement {:02}-{e}", i + 1),
                    description: String::new(),
                    lead_cmi_id: plan.id.clone(),
                    leader_id: plan
                        .researchers
                        .choose(&mut rng)
                        .expect("at least one researcher")
                        .clone(),
                    funding_agency: "Council".into(),
                    budget_total: Pesos::from_centavos(rng.random_range(0..50_000_000)),
                    start_date: start,
                    end_date: start + TimeDelta::days(rng.random_range(30..1000)),
                    status: *EngagementStatus::ALL.choose(&mut rng).expect("non-empty"),
                })?;
                plan.engagements.push(engagement);
            }
        }
        for k in 0..size {
            let plan = plans.choose(&mut rng).expect("at least two institutions");
            let report_type = *ReportType::ALL.choose(&mut rng).expect("non-empty");
            let tag = format!("r{k}");
            let engagement_id = if rng.random_bool(0.3) {
                plan.engagements.choose(&mut rng).map(|e| e.id.clone())
            } else {
                None
            };
            let focal = plan.focal.as_ref().expect("focal seeded");
            let report = self.report(
                focal,
                ReportPayload {
                    report_type,
                    cmi_id: plan.id.clone(),
                    engagement_id,
                    title: format!("Report {tag}"),
                    period_year: rng.random_range(2021..=2025),
                    period_quarter: rng.random_bool(0.75).then(|| rng.random_range(1..=4)),
                    details: details_for(report_type, &tag, rng.random_bool(0.3)),
                },
            )?;
            if rng.random_bool(0.05) {
                self.c.store().soft_delete(
                    &focal.user_id,
                    EntityKind::ReportRecord,
                    report.id.as_str(),
                )?;
                self.summary.deleted_reports += 1;
            }
        }
        Ok(())
    }
}
