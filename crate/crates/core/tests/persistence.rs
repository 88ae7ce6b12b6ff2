mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate, TimeZone, Utc};
use consortium_core::clock::SystemClock;
use consortium_core::domain::*;
use consortium_core::fixtures::{fixture_clock, seed_fixture, SeedProfile};
use consortium_core::persistence::{
    AuditAction, Entity, EntityKind, Page, QueryFilter, Store, MAX_PAGE_LIMIT,
};
use consortium_core::Error;
use proptest::prelude::*;

use common::*;

fn actor() -> UserId {
    UserId::new("tester")
}

fn store() -> Store {
    Store::in_memory(Arc::new(SystemClock))
}

fn new_cmi(code: &str) -> Cmi {
    Cmi {
        id: CmiId::new(""),
        code: code.into(),
        name: format!("{code} name"),
        institution_kind: InstitutionKind::StateUniversity,
        active: true,
        entity_version: 0,
        deleted: false,
    }
}

fn new_researcher(cmi: &CmiId) -> Researcher {
    Researcher {
        id: ResearcherId::new(""),
        full_name: "R. Searcher".into(),
        cmi_id: cmi.clone(),
        email: "r@example.org".into(),
        expertise: "soil".into(),
        entity_version: 0,
        deleted: false,
    }
}

fn new_engagement(
    kind: EngagementKind,
    parent: Option<&EngagementId>,
    cmi: &CmiId,
    leader: &ResearcherId,
) -> Engagement {
    Engagement {
        id: EngagementId::new(""),
        kind,
        parent_id: parent.cloned(),
        title: format!("{kind} title"),
        description: String::new(),
        lead_cmi_id: cmi.clone(),
        leader_id: leader.clone(),
        funding_agency: "agency".into(),
        budget_total: Pesos::from_whole(100),
        start_date: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
        end_date: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
        status: EngagementStatus::Proposed,
        entity_version: 0,
        deleted: false,
    }
}

fn new_user(name: &str, cmi: Option<&CmiId>) -> UserAccount {
    UserAccount {
        id: UserId::new(""),
        username: name.into(),
        role: if cmi.is_some() {
            Role::CmiFocal
        } else {
            Role::Admin
        },
        cmi_id: cmi.cloned(),
        password_digest: "pbkdf2-sha256$1$00$00".into(),
        active: true,
        entity_version: 0,
        deleted: false,
    }
}

fn new_report(cmi: &CmiId, by: &UserId, year: i32) -> ReportRecord {
    ReportRecord {
        id: ReportId::new(""),
        report_type: ReportType::PolicyBrief,
        cmi_id: cmi.clone(),
        engagement_id: None,
        title: "Brief".into(),
        period_year: year,
        period_quarter: Some(2),
        details: BTreeMap::from([
            ("policy_title".to_owned(), "t".to_owned()),
            ("issue".to_owned(), "i".to_owned()),
        ]),
        submitted_by: by.clone(),
        submitted_at: Utc.timestamp_opt(0, 0).unwrap(),
        deleted: false,
        entity_version: 0,
    }
}

struct Basic {
    store: Store,
    cmi1: Cmi,
    cmi2: Cmi,
    user: UserAccount,
}

fn basic() -> Basic {
    let store = store();
    let cmi1 = store.insert(&actor(), new_cmi("CMI-01")).unwrap();
    let cmi2 = store.insert(&actor(), new_cmi("CMI-02")).unwrap();
    let user = store.insert(&actor(), new_user("admin", None)).unwrap();
    Basic {
        store,
        cmi1,
        cmi2,
        user,
    }
}

#[test]
fn first_write_is_version_one() {
    let s = store();
    let stamp = s.put(&actor(), new_cmi("CMI-01").into(), None).unwrap();
    assert_eq!(stamp.global_version, 1);
    let stored = s.get(EntityKind::Cmi, &stamp.entity_id).unwrap();
    assert_eq!(stored.entity_version(), 1);
}

#[test]
fn stale_update_is_a_version_conflict() {
    let s = store();
    let mut cmi = s.insert(&actor(), new_cmi("CMI-01")).unwrap();
    cmi.name = "renamed".into();
    let cmi = s.update(&actor(), cmi, 1).unwrap();
    assert_eq!(cmi.entity_version, 2);
    let err = s.update(&actor(), cmi.clone(), 1).unwrap_err();
    assert!(
        matches!(
            err,
            Error::VersionConflict {
                expected: 1,
                actual: 2,
                ..
            }
        ),
        "{err:?}"
    );
    assert_eq!(s.head(), 2);
}

#[test]
fn sub_project_under_program_is_rejected() {
    let b = basic();
    let r = b
        .store
        .insert(&actor(), new_researcher(&b.cmi1.id))
        .unwrap();
    let program = b
        .store
        .insert(
            &actor(),
            new_engagement(EngagementKind::Program, None, &b.cmi1.id, &r.id),
        )
        .unwrap();
    let head = b.store.head();
    let err = b
        .store
        .insert(
            &actor(),
            new_engagement(
                EngagementKind::SubProject,
                Some(&program.id),
                &b.cmi1.id,
                &r.id,
            ),
        )
        .unwrap_err();
    assert!(matches!(err, Error::Hierarchy(_)), "{err:?}");
    assert_eq!(b.store.head(), head);
}

#[test]
fn dangling_references_are_rejected() {
    let b = basic();
    let ghost_cmi = CmiId::new("cmi-9999999999");
    let err = b
        .store
        .insert(&actor(), new_researcher(&ghost_cmi))
        .unwrap_err();
    assert!(matches!(err, Error::ReferenceViolation { .. }), "{err:?}");
    let r = b
        .store
        .insert(&actor(), new_researcher(&b.cmi1.id))
        .unwrap();
    let ghost_parent = EngagementId::new("eng-9999999999");
    let err = b
        .store
        .insert(
            &actor(),
            new_engagement(
                EngagementKind::Project,
                Some(&ghost_parent),
                &b.cmi1.id,
                &r.id,
            ),
        )
        .unwrap_err();
    assert!(matches!(err, Error::ReferenceViolation { .. }), "{err:?}");
    let err = b
        .store
        .insert(
            &actor(),
            new_engagement(
                EngagementKind::Project,
                None,
                &b.cmi1.id,
                &ResearcherId::new("res-x"),
            ),
        )
        .unwrap_err();
    assert!(matches!(err, Error::ReferenceViolation { .. }), "{err:?}");
}

#[test]
fn get_examples() {
    let b = basic();
    let report = b
        .store
        .insert(&actor(), new_report(&b.cmi1.id, &b.user.id, 2024))
        .unwrap();
    let fetched = b
        .store
        .get(EntityKind::ReportRecord, report.id.as_str())
        .unwrap();
    assert_eq!(fetched, Entity::ReportRecord(report.clone()));
    assert!(matches!(
        b.store.get(EntityKind::ReportRecord, "rep-0000009999"),
        Err(Error::NotFound { .. })
    ));
    b.store
        .soft_delete(&actor(), EntityKind::ReportRecord, report.id.as_str())
        .unwrap();
    match b
        .store
        .get(EntityKind::ReportRecord, report.id.as_str())
        .unwrap()
    {
        Entity::ReportRecord(r) => {
            assert!(r.deleted);
            assert_eq!(r.entity_version, 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn query_examples() {
    let s = store();
    for kind in [
        EntityKind::Cmi,
        EntityKind::ReportRecord,
        EntityKind::Engagement,
    ] {
        let page = s.query(&QueryFilter::new(kind)).unwrap();
        assert!(page.items.is_empty());
        assert_eq!(page.total, 0);
    }

    let b = basic();
    for i in 0..10 {
        b.store
            .insert(&actor(), new_report(&b.cmi1.id, &b.user.id, 2020 + i))
            .unwrap();
    }
    for i in 0..5 {
        b.store
            .insert(&actor(), new_report(&b.cmi2.id, &b.user.id, 2020 + i))
            .unwrap();
    }
    let mut f = QueryFilter::new(EntityKind::ReportRecord);
    f.cmi_id = Some(b.cmi2.id.clone());
    let page = b.store.query(&f).unwrap();
    assert_eq!(page.total, 5);
    f.page.limit = 3;
    let page = b.store.query(&f).unwrap();
    assert_eq!(page.items.len(), 3);
    assert_eq!(page.total, 5);
    let years: Vec<_> = page
        .items
        .iter()
        .map(|e| match e {
            Entity::ReportRecord(r) => r.period_year,
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(years, [2020, 2021, 2022]);
}

#[test]
fn query_rejects_bad_filters() {
    let s = store();
    for limit in [0, MAX_PAGE_LIMIT + 1] {
        let mut f = QueryFilter::new(EntityKind::Cmi);
        f.page.limit = limit;
        assert!(matches!(s.query(&f), Err(Error::InvalidFilter(_))));
    }
    let mut f = QueryFilter::new(EntityKind::Engagement);
    f.report_type = Some(ReportType::Publication);
    assert!(matches!(s.query(&f), Err(Error::InvalidFilter(_))));
    let mut f = QueryFilter::new(EntityKind::ReportRecord);
    f.status = Some(EngagementStatus::Ongoing);
    assert!(matches!(s.query(&f), Err(Error::InvalidFilter(_))));
}

#[test]
fn soft_delete_examples() {
    let b = basic();
    let report = b
        .store
        .insert(&actor(), new_report(&b.cmi1.id, &b.user.id, 2024))
        .unwrap();
    let v = b
        .store
        .soft_delete(&actor(), EntityKind::ReportRecord, report.id.as_str())
        .unwrap();
    assert_eq!(v, b.store.head());
    let page = b
        .store
        .query(&QueryFilter::new(EntityKind::ReportRecord))
        .unwrap();
    assert_eq!(page.total, 0);
    assert!(matches!(
        b.store
            .soft_delete(&actor(), EntityKind::ReportRecord, report.id.as_str()),
        Err(Error::AlreadyDeleted { .. })
    ));
    let mut f = QueryFilter::new(EntityKind::ReportRecord);
    f.include_deleted = true;
    assert_eq!(b.store.query(&f).unwrap().total, 1);
    assert!(matches!(
        b.store.update(&actor(), report, 2),
        Err(Error::AlreadyDeleted { .. })
    ));
    let last = b.store.changes_since(b.store.head() - 1).entries;
    assert_eq!(last[0].action, AuditAction::SoftDelete);
}

#[test]
fn change_feed_examples() {
    let s = store();
    for code in ["A", "B", "C"] {
        s.insert(&actor(), new_cmi(code)).unwrap();
    }
    let all = s.changes_since(0);
    assert_eq!(all.entries.len(), 3);
    assert_eq!(all.head, 3);
    let none = s.changes_since(3);
    assert!(none.entries.is_empty());
    assert_eq!(none.head, 3);
    assert!(s.changes_since(99).entries.is_empty());
    s.insert(&actor(), new_cmi("D")).unwrap();
    s.insert(&actor(), new_cmi("E")).unwrap();
    let tail = s.changes_since(3);
    let versions: Vec<_> = tail.entries.iter().map(|e| e.global_version).collect();
    assert_eq!(versions, [4, 5]);
    assert!(tail
        .entries
        .iter()
        .all(|e| e.actor == actor() && e.action == AuditAction::Create));
}

#[test]
fn round_trip_is_lossless_for_every_entity_type() {
    let b = basic();
    let r = b
        .store
        .insert(&actor(), new_researcher(&b.cmi1.id))
        .unwrap();
    let e = b
        .store
        .insert(
            &actor(),
            new_engagement(EngagementKind::Program, None, &b.cmi1.id, &r.id),
        )
        .unwrap();
    let focal = b
        .store
        .insert(&actor(), new_user("focal", Some(&b.cmi1.id)))
        .unwrap();
    let rep = b
        .store
        .insert(&actor(), new_report(&b.cmi1.id, &focal.id, 2024))
        .unwrap();
    let stored: Vec<Entity> = vec![
        b.cmi1.clone().into(),
        r.into(),
        e.into(),
        focal.into(),
        rep.into(),
    ];
    for entity in stored {
        assert_eq!(b.store.get(entity.kind(), entity.id()).unwrap(), entity);
    }
}

#[test]
fn concurrent_writers_are_linearized() {
    let b = Arc::new(basic());
    let start = b.store.head();
    let threads: Vec<_> = (0..8)
        .map(|t| {
            let b = Arc::clone(&b);
            std::thread::spawn(move || {
                for i in 0..50 {
                    let cmi = if (t + i) % 2 == 0 {
                        &b.cmi1.id
                    } else {
                        &b.cmi2.id
                    };
                    b.store
                        .insert(&actor(), new_report(cmi, &b.user.id, 2024))
                        .unwrap();
                }
            })
        })
        .collect();
    for t in threads {
        t.join().unwrap();
    }
    assert_eq!(b.store.head(), start + 400);
    let versions: Vec<u64> = b
        .store
        .changes_since(0)
        .entries
        .iter()
        .map(|e| e.global_version)
        .collect();
    assert_eq!(versions, (1..=start + 400).collect::<Vec<_>>());
}

#[test]
fn journal_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("consortium.journal");
    let (cmi, report, head) = {
        let s = Store::open(&path, Arc::new(SystemClock)).unwrap();
        let cmi = s.insert(&actor(), new_cmi("CMI-01")).unwrap();
        let user = s.insert(&actor(), new_user("admin", None)).unwrap();
        let report = s
            .insert(&actor(), new_report(&cmi.id, &user.id, 2024))
            .unwrap();
        let mut edited = report.clone();
        edited.title = "Edited brief".into();
        let report = s.update(&actor(), edited, 1).unwrap();
        (cmi, report, s.head())
    };
    let s = Store::open(&path, Arc::new(SystemClock)).unwrap();
    assert_eq!(s.head(), head);
    assert_eq!(
        s.get(EntityKind::Cmi, cmi.id.as_str()).unwrap(),
        Entity::Cmi(cmi)
    );
    assert_eq!(
        s.get(EntityKind::ReportRecord, report.id.as_str()).unwrap(),
        Entity::ReportRecord(report.clone())
    );
    // ids keep counting after a restart
    let next = s.insert(&actor(), new_cmi("CMI-02")).unwrap();
    assert_ne!(next.id.as_str(), report.id.as_str());
    assert_eq!(s.head(), head + 1);
}

#[test]
fn torn_trailing_line_is_discarded() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    {
        let s = Store::open(&path, Arc::new(SystemClock)).unwrap();
        s.insert(&actor(), new_cmi("CMI-01")).unwrap();
        s.insert(&actor(), new_cmi("CMI-02")).unwrap();
    }
    let mut f = std::fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .unwrap();
    f.write_all(br#"{"entry":{"global_version":3,"#).unwrap();
    drop(f);
    let s = Store::open(&path, Arc::new(SystemClock)).unwrap();
    assert_eq!(s.head(), 2);
    s.insert(&actor(), new_cmi("CMI-03")).unwrap();
    drop(s);
    let s = Store::open(&path, Arc::new(SystemClock)).unwrap();
    assert_eq!(s.head(), 3);
}

#[test]
fn foreign_file_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    std::fs::write(&path, "hello\nworld\n").unwrap();
    assert!(matches!(
        Store::open(&path, Arc::new(SystemClock)),
        Err(Error::Storage(_))
    ));
}

// Query oracle: an independent filter and sort over the raw tables.

#[derive(Debug, Clone)]
struct FilterCase {
    kind: EntityKind,
    cmi: Option<usize>,
    eng_kind: Option<EngagementKind>,
    status: Option<EngagementStatus>,
    report_type: Option<ReportType>,
    category: Option<ReportCategory>,
    year: Option<i32>,
    include_deleted: bool,
    offset: usize,
    limit: usize,
}

fn filter_case() -> impl Strategy<Value = FilterCase> {
    (
        prop_oneof![
            Just(EntityKind::ReportRecord),
            Just(EntityKind::Engagement),
            Just(EntityKind::Cmi)
        ],
        proptest::option::of(0usize..6),
        proptest::option::of(proptest::sample::select(EngagementKind::ALL.to_vec())),
        proptest::option::of(proptest::sample::select(EngagementStatus::ALL.to_vec())),
        proptest::option::of(proptest::sample::select(ReportType::ALL.to_vec())),
        proptest::option::of(proptest::sample::select(ReportCategory::ALL.to_vec())),
        proptest::option::of(2020i32..2027),
        any::<bool>(),
        0usize..40,
        1usize..60,
    )
        .prop_map(
            |(
                kind,
                cmi,
                eng_kind,
                status,
                report_type,
                category,
                year,
                include_deleted,
                offset,
                limit,
            )| {
                let engagement = kind == EntityKind::Engagement;
                let report = kind == EntityKind::ReportRecord;
                FilterCase {
                    kind,
                    cmi,
                    eng_kind: eng_kind.filter(|_| engagement),
                    status: status.filter(|_| engagement),
                    report_type: report_type.filter(|_| report),
                    category: category.filter(|_| report),
                    year: year.filter(|_| engagement || report),
                    include_deleted,
                    offset,
                    limit,
                }
            },
        )
}

fn oracle(
    c: &consortium_core::Consortium,
    case: &FilterCase,
    cmi: Option<&CmiId>,
) -> (Vec<String>, usize) {
    let snap = c.store().snapshot();
    let code = |id: &CmiId| snap.cmi(id).map(|c| c.code.clone()).unwrap_or_default();
    let mut rows: Vec<((String, i64, String), String)> = Vec::new();
    match case.kind {
        EntityKind::ReportRecord => {
            for r in snap.reports() {
                let keep = (case.include_deleted || !r.deleted)
                    && cmi.is_none_or(|c| &r.cmi_id == c)
                    && case.report_type.is_none_or(|t| t == r.report_type)
                    && case
                        .category
                        .is_none_or(|k| k == classify_report_type(r.report_type))
                    && case.year.is_none_or(|y| y == r.period_year);
                if keep {
                    let date = r.period_year as i64 * 10 + r.period_quarter.map_or(0, i64::from);
                    rows.push(((code(&r.cmi_id), date, r.id.to_string()), r.id.to_string()));
                }
            }
        }
        EntityKind::Engagement => {
            for e in snap.engagements() {
                let keep = (case.include_deleted || !e.deleted)
                    && cmi.is_none_or(|c| &e.lead_cmi_id == c)
                    && case.eng_kind.is_none_or(|k| k == e.kind)
                    && case.status.is_none_or(|s| s == e.status)
                    && case.year.is_none_or(|y| y == e.start_date.year());
                if keep {
                    let date =
                        (e.start_date - NaiveDate::from_ymd_opt(1, 1, 1).unwrap()).num_days();
                    rows.push((
                        (code(&e.lead_cmi_id), date, e.id.to_string()),
                        e.id.to_string(),
                    ));
                }
            }
        }
        _ => {
            for c in snap.cmis() {
                if (case.include_deleted || !c.deleted) && cmi.is_none_or(|x| &c.id == x) {
                    rows.push(((c.code.clone(), 0, c.id.to_string()), c.id.to_string()));
                }
            }
        }
    }
    rows.sort();
    let total = rows.len();
    let ids = rows
        .into_iter()
        .skip(case.offset)
        .take(case.limit)
        .map(|(_, id)| id)
        .collect();
    (ids, total)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 120, ..ProptestConfig::default() })]

    #[test]
    fn query_matches_filter_oracle(seed in 0u64..10_000, size in 5usize..60, case in filter_case()) {
        let c = consortium_core::Consortium::in_memory_with_clock(test_config(), fixture_clock());
        seed_fixture(&c, SeedProfile::Random { seed, size }).unwrap();
        let cmis = all_cmis(&c);
        let cmi = case.cmi.and_then(|i| cmis.get(i)).map(|c| c.id.clone());
        let filter = QueryFilter {
            entity_kind: case.kind,
            cmi_id: cmi.clone(),
            kind: case.eng_kind,
            status: case.status,
            report_type: case.report_type,
            category: case.category,
            period_year: case.year,
            include_deleted: case.include_deleted,
            page: Page { offset: case.offset, limit: case.limit },
        };
        let page = c.store().query(&filter).unwrap();
        let got: Vec<String> = page.items.iter().map(|e| e.id().to_owned()).collect();
        let (want, total) = oracle(&c, &case, cmi.as_ref());
        prop_assert_eq!(page.total, total);
        prop_assert_eq!(&got, &want);
        for item in &page.items {
            prop_assert_eq!(&c.store().get(item.kind(), item.id()).unwrap(), item);
        }
        let again: Vec<String> = c.store().query(&filter).unwrap().items.iter().map(|e| e.id().to_owned()).collect();
        prop_assert_eq!(got, again);
    }
}
