#![allow(dead_code)]

use std::sync::Arc;

use consortium_core::access::Session;
use consortium_core::clock::Clock;
use consortium_core::domain::{Cmi, Engagement, ReportRecord};
use consortium_core::fixtures::{self, seed_fixture, SeedProfile, SeedSummary};
use consortium_core::persistence::{Entity, EntityKind, Page, QueryFilter, MAX_PAGE_LIMIT};
use consortium_core::{AuthConfig, Consortium};

/// Cheap hashing keeps fixture seeding fast.
pub fn test_config() -> AuthConfig {
    AuthConfig {
        hash_rounds: 1_000,
        ..AuthConfig::default()
    }
}

pub fn dev_config() -> AuthConfig {
    AuthConfig {
        dev_mode: true,
        ..test_config()
    }
}

pub fn empty() -> Consortium {
    Consortium::in_memory_with_clock(test_config(), fixtures::fixture_clock())
}

pub fn with_clock(clock: Arc<dyn Clock>) -> Consortium {
    Consortium::in_memory_with_clock(test_config(), clock)
}

pub fn seeded(profile: SeedProfile) -> (Consortium, SeedSummary) {
    let c = empty();
    let summary = seed_fixture(&c, profile).expect("seed");
    (c, summary)
}

pub fn admin(c: &Consortium) -> Session {
    c.authenticate(fixtures::ADMIN_USERNAME, fixtures::ADMIN_PASSWORD)
        .expect("admin login")
}

/// Focal session for the institution numbered `n` (1-based).
pub fn focal(c: &Consortium, n: usize) -> Session {
    c.authenticate(&fixtures::focal_username(n), fixtures::FOCAL_PASSWORD)
        .expect("focal login")
}

/// Every stored record of one kind, deleted ones included, straight from
/// the tables (no query code involved).
pub fn all_reports(c: &Consortium) -> Vec<ReportRecord> {
    c.store().snapshot().reports().cloned().collect()
}

pub fn all_engagements(c: &Consortium) -> Vec<Engagement> {
    c.store().snapshot().engagements().cloned().collect()
}

pub fn all_cmis(c: &Consortium) -> Vec<Cmi> {
    c.store().snapshot().cmis().cloned().collect()
}

pub fn cmi_code_of(c: &Consortium, id: &consortium_core::domain::CmiId) -> String {
    c.store()
        .snapshot()
        .cmi(id)
        .expect("cmi exists")
        .code
        .clone()
}

/// Drains a query through every page.
pub fn query_all(c: &Consortium, mut filter: QueryFilter) -> Vec<Entity> {
    let mut out = Vec::new();
    filter.page = Page {
        offset: 0,
        limit: MAX_PAGE_LIMIT,
    };
    loop {
        let page = c.store().query(&filter).expect("query");
        let n = page.items.len();
        out.extend(page.items);
        if n == 0 || out.len() >= page.total {
            break;
        }
        filter.page.offset += n;
    }
    out
}

pub fn live_reports_via_query(c: &Consortium) -> Vec<ReportRecord> {
    query_all(c, QueryFilter::new(EntityKind::ReportRecord))
        .into_iter()
        .map(|e| match e {
            Entity::ReportRecord(r) => r,
            other => panic!("unexpected {other:?}"),
        })
        .collect()
}

pub fn live_engagements_via_query(c: &Consortium) -> Vec<Engagement> {
    query_all(c, QueryFilter::new(EntityKind::Engagement))
        .into_iter()
        .map(|e| match e {
            Entity::Engagement(r) => r,
            other => panic!("unexpected {other:?}"),
        })
        .collect()
}
