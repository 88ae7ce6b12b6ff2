mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::http::{Method, StatusCode};
use common::{seeded, test_config, Api};
use consortium_core::acquisition::required_detail_keys;
use consortium_core::analytics::DOCUMENT_CSV_HEADER;
use consortium_core::domain::{EngagementKind, HierarchyViolation, ReportType};
use consortium_core::fixtures::{self, seed_fixture, SeedProfile};
use consortium_core::persistence::EntityKind;
use consortium_core::{AuthConfig, Consortium, Error};
use consortium_server::status_for;
use serde_json::{json, Value};

fn api() -> Api {
    Api::new(seeded(SeedProfile::Canonical))
}

fn cmi_id(api: &Api, n: usize) -> String {
    let snap = api.consortium.store().snapshot();
    snap.resolve_cmi(&fixtures::cmi_code(n))
        .unwrap()
        .id
        .to_string()
}

fn report_body(cmi: &str, report_type: ReportType) -> Value {
    let details: BTreeMap<&str, &str> = required_detail_keys(report_type)
        .iter()
        .map(|k| (*k, "value"))
        .collect();
    json!({
        "report_type": report_type,
        "cmi_id": cmi,
        "title": "Quarterly output",
        "period_year": 2024,
        "period_quarter": 2,
        "details": details,
    })
}

#[tokio::test]
async fn protected_routes_need_a_token() {
    let api = api();
    for uri in [
        "/api/v1/metrics",
        "/api/v1/reports",
        "/api/v1/changes?since=0",
        "/api/v1/users",
    ] {
        let (status, body) = api.call(Method::GET, uri, None, None).await;
        assert_eq!(status, StatusCode::UNAUTHORIZED, "{uri}");
        assert_eq!(body["error_code"], "AuthRequired");
    }
    let (status, _) = api
        .call(Method::GET, "/api/v1/metrics", Some("not-a-token"), None)
        .await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn bad_credentials_are_401() {
    let api = api();
    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/auth/login",
            None,
            Some(json!({"username": "admin", "password": "wrong-password"})),
        )
        .await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_eq!(body["error_code"], "AuthFailure");
}

#[tokio::test]
async fn focal_cannot_list_another_cmi() {
    let api = api();
    let token = api.focal(1).await;
    let (status, body) = api.get("/api/v1/reports?cmi=CMI-02", &token).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(body["error_code"], "ScopeViolation");

    let (status, body) = api.get("/api/v1/reports?cmi=CMI-01", &token).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["total"], 4);

    let (status, body) = api.get("/api/v1/reports?cmi=CMI-99", &token).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error_code"], "UnknownCmi");

    let (status, _) = api.get("/api/v1/metrics?scope=CMI-03", &token).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn submitted_report_is_201_and_readable() {
    let api = api();
    let token = api.focal(1).await;
    let before = api.head();
    let (status, created) = api
        .call(
            Method::POST,
            "/api/v1/reports",
            Some(&token),
            Some(report_body(&cmi_id(&api, 1), ReportType::Publication)),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    assert_eq!(api.head(), before + 1);
    assert_eq!(created["report_type"], "Publication");
    assert_eq!(created["entity_version"], 1);
    let id = created["id"].as_str().unwrap();

    let (status, fetched) = api.get(&format!("/api/v1/reports/{id}"), &token).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched, created);
}

#[tokio::test]
async fn invalid_report_is_422_with_violations() {
    let api = api();
    let token = api.focal(1).await;
    let mut body = report_body(&cmi_id(&api, 1), ReportType::TrainingWorkshop);
    body["details"] = json!({"venue": "Hall A"});
    body["title"] = json!("  ");
    let before = api.head();
    let (status, reply) = api
        .call(Method::POST, "/api/v1/reports", Some(&token), Some(body))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply["error_code"], "ValidationFailed");
    let codes: Vec<&str> = reply["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"MissingField"), "{codes:?}");
    assert_eq!(
        codes
            .iter()
            .filter(|c| **c == "MissingRequiredDetail")
            .count(),
        2
    );
    assert_eq!(api.head(), before);
}

#[tokio::test]
async fn focal_cannot_submit_for_another_cmi() {
    let api = api();
    let token = api.focal(1).await;
    let (status, _) = api
        .call(
            Method::POST,
            "/api/v1/reports",
            Some(&token),
            Some(report_body(&cmi_id(&api, 2), ReportType::Publication)),
        )
        .await;
    assert_eq!(status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn stale_edit_is_409_and_delete_is_once() {
    let api = api();
    let token = api.focal(1).await;
    let (_, created) = api
        .call(
            Method::POST,
            "/api/v1/reports",
            Some(&token),
            Some(report_body(&cmi_id(&api, 1), ReportType::PolicyBrief)),
        )
        .await;
    let uri = format!("/api/v1/reports/{}", created["id"].as_str().unwrap());

    let (status, edited) = api
        .call(
            Method::PATCH,
            &uri,
            Some(&token),
            Some(json!({"expected_version": 1, "title": "Revised"})),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{edited}");
    assert_eq!(edited["title"], "Revised");
    assert_eq!(edited["entity_version"], 2);

    let (status, body) = api
        .call(
            Method::PATCH,
            &uri,
            Some(&token),
            Some(json!({"expected_version": 1, "title": "Stale"})),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error_code"], "VersionConflict");

    let (status, body) = api.call(Method::DELETE, &uri, Some(&token), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["global_version"], api.head());

    let (status, body) = api.call(Method::DELETE, &uri, Some(&token), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error_code"], "AlreadyDeleted");

    let (status, listed) = api.get("/api/v1/reports?cmi=CMI-01", &token).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(listed["total"], 4);
    let (_, listed) = api
        .get("/api/v1/reports?cmi=CMI-01&include_deleted=true", &token)
        .await;
    assert_eq!(listed["total"], 5);
}

#[tokio::test]
async fn malformed_input_is_400() {
    let api = api();
    let token = api.focal(1).await;
    let reply = api
        .raw(
            Method::POST,
            "/api/v1/reports",
            Some(&token),
            Some("application/json"),
            b"{bad".to_vec(),
        )
        .await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    assert_eq!(reply.json()["error_code"], "MalformedJson");

    let (status, body) = api.get("/api/v1/reports?year=last", &token).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error_code"], "MalformedQuery");

    let reply = api
        .raw(
            Method::POST,
            "/api/v1/import",
            Some(&token),
            Some("text/csv"),
            b"just,some\nnoise,here\n".to_vec(),
        )
        .await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    assert_eq!(reply.json()["error_code"], "MalformedCsv");
}

#[tokio::test]
async fn unknown_routes_get_a_json_envelope() {
    let api = api();
    let (status, body) = api
        .call(Method::GET, "/api/v1/nothing-here", None, None)
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error_code"], "RouteNotFound");
    assert!(body["message"].is_string());

    let (status, body) = api.call(Method::PUT, "/api/v1/reports", None, None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert!(body["error_code"].is_string());

    let token = api.admin().await;
    let (status, body) = api.get("/api/v1/reports/rep-9999999999", &token).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error_code"], "NotFound");
}

#[tokio::test]
async fn user_management_is_admin_only() {
    let api = api();
    let focal = api.focal(1).await;
    let (status, _) = api.get("/api/v1/users", &focal).await;
    assert_eq!(status, StatusCode::FORBIDDEN);

    let admin = api.admin().await;
    let (status, users) = api.get("/api/v1/users", &admin).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(users.as_array().unwrap().len(), 30);
    assert!(users[0].get("password_digest").is_none());

    let new_user = json!({
        "username": "second-focal",
        "role": "CmiFocal",
        "cmi_id": cmi_id(&api, 5),
        "password": "a-long-enough-password",
    });
    let (status, created) = api
        .call(
            Method::POST,
            "/api/v1/users",
            Some(&admin),
            Some(new_user.clone()),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let (status, body) = api
        .call(Method::POST, "/api/v1/users", Some(&admin), Some(new_user))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error_code"], "DuplicateUsername");

    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/users",
            Some(&admin),
            Some(json!({"username": "no-cmi", "role": "CmiFocal", "password": "a-long-enough-password"})),
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error_code"], "InvalidPairing");

    let uri = format!("/api/v1/users/{}", created["id"].as_str().unwrap());
    let (status, updated) = api
        .call(
            Method::PATCH,
            &uri,
            Some(&admin),
            Some(json!({"expected_version": 1, "active": false})),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{updated}");
    assert_eq!(updated["active"], false);
    let (status, _) = api.call(Method::DELETE, &uri, Some(&admin), None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn changes_feed_is_scoped_but_head_is_global() {
    let api = api();
    let admin = api.admin().await;
    let focal = api.focal(2).await;
    let since = api.head();

    let (status, _) = api
        .call(
            Method::POST,
            "/api/v1/reports",
            Some(&admin),
            Some(report_body(&cmi_id(&api, 1), ReportType::AwardsRecognition)),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED);

    let (_, seen) = api
        .get(&format!("/api/v1/changes?since={since}"), &focal)
        .await;
    assert_eq!(seen["entries"].as_array().unwrap().len(), 0);
    assert_eq!(seen["head"], since + 1);

    let (_, seen) = api
        .get(&format!("/api/v1/changes?since={since}"), &admin)
        .await;
    let entries = seen["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["global_version"], since + 1);
    assert_eq!(entries[0]["entity_kind"], "ReportRecord");

    let (_, seen) = api
        .get(&format!("/api/v1/changes?since={}", since + 1), &admin)
        .await;
    assert!(seen["entries"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn metrics_default_to_the_callers_scope() {
    let api = api();
    let focal = api.focal(4).await;
    let (status, m) = api.get("/api/v1/metrics", &focal).await;
    assert_eq!(status, StatusCode::OK);
    let by_cmi = m["reports_by_cmi"].as_object().unwrap();
    assert_eq!(by_cmi.keys().collect::<Vec<_>>(), vec!["CMI-04"]);
    assert_eq!(by_cmi["CMI-04"], 4);

    let admin = api.admin().await;
    let (_, m) = api.get("/api/v1/metrics", &admin).await;
    assert_eq!(m["scope"], "Consortium");
    let total: u64 = m["reports_by_cmi"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(total, 116);
}

#[tokio::test]
async fn generated_documents_have_five_sections() {
    let api = api();
    let admin = api.admin().await;
    let (status, doc) = api
        .call(
            Method::POST,
            "/api/v1/generate/annual?year=2024",
            Some(&admin),
            None,
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["sections"].as_array().unwrap().len(), 5);
    assert_eq!(doc["period"]["year"], 2024);

    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/generate/filtered",
            Some(&admin),
            Some(json!({
                "scope": "Consortium",
                "categories": ["PolicyAnalysisAndAdvocacy"],
                "report_types": ["Publication"],
            })),
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error_code"], "InconsistentFilter");

    let (status, doc) = api
        .call(
            Method::POST,
            "/api/v1/generate/filtered",
            Some(&admin),
            Some(json!({"scope": "Consortium", "categories": ["PolicyAnalysisAndAdvocacy"]})),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    for section in doc["sections"].as_array().unwrap() {
        let n: usize = section["subsections"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["entries"].as_array().unwrap().len())
            .sum();
        if section["category"] != "PolicyAnalysisAndAdvocacy" {
            assert_eq!(n, 0);
        }
    }
}

#[tokio::test]
async fn export_serves_csv_and_json() {
    let api = api();
    let admin = api.admin().await;
    let reply = api
        .raw(
            Method::GET,
            "/api/v1/export?format=csv&year=2023",
            Some(&admin),
            None,
            vec![],
        )
        .await;
    assert_eq!(reply.status, StatusCode::OK);
    assert!(reply.content_type.unwrap().starts_with("text/csv"));
    let text = String::from_utf8(reply.bytes).unwrap();
    assert_eq!(text.lines().next().unwrap(), DOCUMENT_CSV_HEADER.join(","));

    let reply = api
        .raw(
            Method::GET,
            "/api/v1/export?format=json",
            Some(&admin),
            None,
            vec![],
        )
        .await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.json()["entry_count"], 116);

    let reply = api
        .raw(
            Method::GET,
            "/api/v1/export?format=csv&year=1999&scope=CMI-03",
            Some(&admin),
            None,
            vec![],
        )
        .await;
    assert_eq!(String::from_utf8(reply.bytes).unwrap().lines().count(), 1);

    let reply = api
        .raw(
            Method::GET,
            "/api/v1/export?format=xml",
            Some(&admin),
            None,
            vec![],
        )
        .await;
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn engagement_routes_enforce_the_hierarchy() {
    let api = api();
    let focal = api.focal(1).await;
    let (_, listed) = api.get("/api/v1/engagements?kind=Program", &focal).await;
    let program = &listed["items"][0];
    let program_id = program["id"].as_str().unwrap();

    let (status, rollup) = api
        .get(&format!("/api/v1/engagements/{program_id}/rollup"), &focal)
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(rollup["project_count"], 2);
    assert_eq!(rollup["subproject_count"], 1);

    let (_, researchers) = api.get("/api/v1/researchers", &focal).await;
    let leader = researchers["items"][0]["id"].clone();
    let sub_under_program = json!({
        "kind": EngagementKind::SubProject,
        "parent_id": program_id,
        "title": "Misplaced",
        "lead_cmi_id": cmi_id(&api, 1),
        "leader_id": leader,
        "budget_total": "1000.00",
        "start_date": "2024-01-01",
        "end_date": "2024-12-31",
    });
    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/engagements",
            Some(&focal),
            Some(sub_under_program),
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert_eq!(body["error_code"], "HierarchyViolation");
}

#[tokio::test]
async fn researcher_and_cmi_crud() {
    let api = api();
    let admin = api.admin().await;
    let (status, cmi) = api
        .call(
            Method::POST,
            "/api/v1/cmis",
            Some(&admin),
            Some(json!({"code": "CMI-30", "name": "Newcomer", "institution_kind": "College", "active": true})),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED, "{cmi}");
    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/cmis",
            Some(&admin),
            Some(json!({"code": "CMI-30", "name": "Again", "institution_kind": "College", "active": true})),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error_code"], "DuplicateCode");

    let (status, r) = api
        .call(
            Method::POST,
            "/api/v1/researchers",
            Some(&admin),
            Some(json!({"full_name": "R. Cruz", "cmi_id": cmi["id"], "email": "r@example.org", "expertise": "soils"})),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED, "{r}");
    let uri = format!("/api/v1/researchers/{}", r["id"].as_str().unwrap());
    let (status, r) = api
        .call(
            Method::PATCH,
            &uri,
            Some(&admin),
            Some(json!({"expected_version": 1, "expertise": "water"})),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["expertise"], "water");
    let (status, _) = api.call(Method::DELETE, &uri, Some(&admin), None).await;
    assert_eq!(status, StatusCode::OK);

    let focal = api.focal(1).await;
    let (_, cmis) = api.get("/api/v1/cmis", &focal).await;
    assert_eq!(cmis.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn logout_revokes_the_token() {
    let api = api();
    let token = api.focal(1).await;
    let (status, _) = api
        .call(Method::POST, "/api/v1/auth/logout", Some(&token), None)
        .await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = api.get("/api/v1/metrics", &token).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn recovery_flow_over_http() {
    let c = Consortium::in_memory_with_clock(
        AuthConfig {
            dev_mode: true,
            ..test_config()
        },
        fixtures::fixture_clock(),
    );
    seed_fixture(&c, SeedProfile::CanonicalRegistry).unwrap();
    let api = Api::new(Arc::new(c));

    let known = api
        .call(
            Method::POST,
            "/api/v1/auth/recovery",
            None,
            Some(json!({"username": "focal-cmi-07"})),
        )
        .await;
    let unknown = api
        .call(
            Method::POST,
            "/api/v1/auth/recovery",
            None,
            Some(json!({"username": "nobody"})),
        )
        .await;
    assert_eq!(known, unknown);
    assert_eq!(known.0, StatusCode::ACCEPTED);

    let admin = api.admin().await;
    let (status, tokens) = api.get("/api/v1/auth/recovery/tokens", &admin).await;
    assert_eq!(status, StatusCode::OK);
    let tokens = tokens.as_array().unwrap();
    assert_eq!(tokens.len(), 1);
    assert_eq!(tokens[0]["username"], "focal-cmi-07");
    let token = tokens[0]["token"].as_str().unwrap();

    let complete = json!({"token": token, "new_password": "brand-new-password"});
    let (status, _) = api
        .call(
            Method::POST,
            "/api/v1/auth/recovery/complete",
            None,
            Some(complete.clone()),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = api
        .call(
            Method::POST,
            "/api/v1/auth/recovery/complete",
            None,
            Some(complete),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error_code"], "InvalidToken");
    api.login("focal-cmi-07", "brand-new-password").await;
}

#[tokio::test]
async fn dev_tokens_are_hidden_outside_dev_mode() {
    let api = api();
    let admin = api.admin().await;
    let (status, _) = api.get("/api/v1/auth/recovery/tokens", &admin).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn import_accepts_rows_and_reports_rejections() {
    let api = api();
    let admin = api.admin().await;
    let header = DOCUMENT_CSV_HEADER.join(",");
    let csv = format!(
        "{header}\n\
         StrategicRdActivities,Publication,CMI-02,Imported paper,2024,1,,,venue,Journal,authors,A. B.,,\n\
         StrategicRdActivities,Publication,CMI-77,Nowhere,2024,1,,,venue,Journal,authors,A. B.,,\n"
    );
    let before = api.head();
    let reply = api
        .raw(
            Method::POST,
            "/api/v1/import",
            Some(&admin),
            Some("text/csv"),
            csv.into_bytes(),
        )
        .await;
    assert_eq!(
        reply.status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&reply.bytes)
    );
    let summary = reply.json();
    assert_eq!(summary["accepted"], 1);
    assert_eq!(summary["rejected"].as_array().unwrap().len(), 1);
    assert_eq!(summary["rejected"][0]["row_number"], 2);
    assert_eq!(api.head(), before + 1);
}

/// Reference table of statuses, written out independently of the server.
fn expected_status(code: &str) -> u16 {
    match code {
        "AuthFailure" | "AuthRequired" | "SessionExpired" => 401,
        "Forbidden" | "ScopeViolation" => 403,
        "NotFound" | "UnknownCmi" => 404,
        "VersionConflict" | "AlreadyDeleted" | "DuplicateUsername" | "DuplicateCode"
        | "NonEmptyStore" => 409,
        "ValidationFailed" | "InvalidFilter" | "InconsistentFilter" | "HierarchyViolation"
        | "InvalidPairing" | "ReferenceViolation" | "WeakPassword" | "InvalidTransition" => 422,
        "MalformedCsv" | "InvalidToken" => 400,
        "StorageFailure" => 500,
        other => panic!("no status listed for {other}"),
    }
}

#[test]
fn status_mapping_covers_every_error() {
    use consortium_core::domain::EngagementStatus;
    let kind = EntityKind::ReportRecord;
    let all = vec![
        Error::Hierarchy(HierarchyViolation { rule: "r".into() }),
        Error::VersionConflict {
            kind,
            id: "x".into(),
            expected: 1,
            actual: 2,
        },
        Error::ReferenceViolation {
            field: "f",
            kind,
            id: "x".into(),
        },
        Error::NotFound {
            kind,
            id: "x".into(),
        },
        Error::AlreadyDeleted {
            kind,
            id: "x".into(),
        },
        Error::InvalidFilter("x".into()),
        Error::ValidationFailed(vec![]),
        Error::InvalidTransition {
            from: EngagementStatus::Completed,
            to: EngagementStatus::Ongoing,
        },
        Error::DuplicateCode("x".into()),
        Error::ScopeViolation("x".into()),
        Error::Forbidden("x".into()),
        Error::AuthRequired,
        Error::AuthFailure,
        Error::SessionExpired,
        Error::DuplicateUsername,
        Error::InvalidPairing,
        Error::WeakPassword { min: 8 },
        Error::InvalidToken,
        Error::MalformedCsv("x".into()),
        Error::UnknownCmi("x".into()),
        Error::InconsistentFilter("x".into()),
        Error::NonEmptyStore,
        Error::Storage("x".into()),
    ];
    let codes: std::collections::BTreeSet<&str> = all.iter().map(Error::code).collect();
    assert_eq!(codes.len(), all.len(), "error codes must be distinct");
    for e in &all {
        assert_eq!(
            status_for(e).as_u16(),
            expected_status(e.code()),
            "{}",
            e.code()
        );
    }
}
