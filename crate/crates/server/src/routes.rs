use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use consortium_core::access::{NewUser, UserPatch};
use consortium_core::acquisition::{
    CmiPatch, EngagementPatch, EngagementQuery, NewCmi, NewEngagement, NewResearcher, ReportPatch,
    ReportPayload, ReportQuery, ResearcherPatch,
};
use consortium_core::analytics::{export_document, ExportFormat, FilterSpec};
use consortium_core::domain::{
    CmiId, EngagementId, EngagementKind, EngagementStatus, ReportCategory, ReportId, ReportType,
    ResearcherId, UserId,
};
use consortium_core::persistence::{Page, Tables};
use consortium_core::{Consortium, Error, Scope, Session};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;
use crate::extract::{Authed, Body, Params};

const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub consortium: Arc<Consortium>,
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs a core call off the async workers: password hashing and journal
/// syncs both block.
async fn run<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Consortium) -> consortium_core::Result<T> + Send + 'static,
{
    let c = Arc::clone(&state.consortium);
    tokio::task::spawn_blocking(move || f(&c))
        .await
        .map_err(|e| ApiError::Core(Error::Storage(format!("worker failed: {e}"))))?
        .map_err(ApiError::from)
}

pub fn router(consortium: Arc<Consortium>) -> Router {
    let state = AppState { consortium };
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/auth/login", post(login))
        .route("/api/v1/auth/logout", post(logout))
        .route("/api/v1/auth/recovery", post(initiate_recovery))
        .route("/api/v1/auth/recovery/complete", post(complete_recovery))
        .route("/api/v1/auth/recovery/tokens", get(dev_tokens))
        .route("/api/v1/cmis", get(list_cmis).post(create_cmi))
        .route("/api/v1/cmis/{id}", patch(update_cmi).delete(delete_cmi))
        .route(
            "/api/v1/engagements",
            get(list_engagements).post(create_engagement),
        )
        .route(
            "/api/v1/engagements/{id}",
            get(get_engagement)
                .patch(update_engagement)
                .delete(delete_engagement),
        )
        .route("/api/v1/engagements/{id}/rollup", get(engagement_rollup))
        .route("/api/v1/reports", get(list_reports).post(submit_report))
        .route(
            "/api/v1/reports/{id}",
            get(get_report).patch(edit_report).delete(delete_report),
        )
        .route(
            "/api/v1/researchers",
            get(list_researchers).post(create_researcher),
        )
        .route(
            "/api/v1/researchers/{id}",
            patch(update_researcher).delete(delete_researcher),
        )
        .route("/api/v1/users", get(list_users).post(create_user))
        .route("/api/v1/users/{id}", patch(update_user).delete(delete_user))
        .route("/api/v1/metrics", get(metrics))
        .route("/api/v1/changes", get(changes))
        .route("/api/v1/generate/annual", post(generate_annual))
        .route("/api/v1/generate/filtered", post(generate_filtered))
        .route("/api/v1/export", get(export))
        .route("/api/v1/import", post(import))
        .fallback(|| async { ApiError::RouteNotFound })
        .method_not_allowed_fallback(|| async {
            (
                StatusCode::METHOD_NOT_ALLOWED,
                Json(json!({"error_code": "MethodNotAllowed", "message": "method not allowed"})),
            )
        })
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Update bodies carry the version the client last saw next to the patch.
#[derive(Debug, Deserialize)]
struct Versioned<P> {
    expected_version: u64,
    #[serde(flatten)]
    patch: P,
}

#[derive(Debug, Serialize)]
struct Deleted {
    global_version: u64,
}

fn resolve_cmi(tables: &Tables, raw: Option<&str>) -> consortium_core::Result<Option<CmiId>> {
    match raw.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(raw) => tables
            .resolve_cmi(raw)
            .map(|c| Some(c.id.clone()))
            .ok_or_else(|| Error::UnknownCmi(raw.to_owned())),
    }
}

/// An explicit `scope` parameter, or the caller's natural scope: the whole
/// consortium for admins, the own institution for focal accounts.
fn scope_for(
    c: &Consortium,
    session: &Session,
    raw: Option<&str>,
) -> consortium_core::Result<Scope> {
    if let Some(raw) = raw.filter(|s| !s.trim().is_empty()) {
        return Scope::parse(raw, &c.store().snapshot());
    }
    let principal = c.principal(session)?;
    Ok(match principal.cmi_id {
        Some(cmi) if !principal.is_admin() => Scope::SingleCmi(cmi),
        _ => Scope::Consortium,
    })
}

fn page(offset: Option<usize>, limit: Option<usize>) -> Page {
    let d = Page::default();
    Page {
        offset: offset.unwrap_or(d.offset),
        limit: limit.unwrap_or(d.limit),
    }
}

async fn health(State(s): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "head": s.consortium.store().head()}))
}

// --- auth ---------------------------------------------------------------

#[derive(Deserialize)]
struct Credentials {
    username: String,
    password: String,
}

async fn login(
    State(s): State<AppState>,
    Body(body): Body<Credentials>,
) -> ApiResult<Json<Session>> {
    run(&s, move |c| c.authenticate(&body.username, &body.password))
        .await
        .map(Json)
}

async fn logout(
    State(s): State<AppState>,
    Authed(session): Authed,
) -> ApiResult<Json<serde_json::Value>> {
    run(&s, move |c| c.logout(&session)).await?;
    Ok(Json(json!({"status": "ok"})))
}

#[derive(Deserialize)]
struct RecoveryRequest {
    username: String,
}

async fn initiate_recovery(
    State(s): State<AppState>,
    Body(body): Body<RecoveryRequest>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    run(&s, move |c| c.initiate_password_recovery(&body.username)).await?;
    Ok((
        StatusCode::ACCEPTED,
        Json(
            json!({"status": "accepted", "message": "if the account exists, a recovery token has been issued"}),
        ),
    ))
}

#[derive(Deserialize)]
struct RecoveryCompletion {
    token: String,
    new_password: String,
}

async fn complete_recovery(
    State(s): State<AppState>,
    Body(body): Body<RecoveryCompletion>,
) -> ApiResult<Json<serde_json::Value>> {
    run(&s, move |c| {
        c.complete_password_recovery(&body.token, &body.new_password)
    })
    .await?;
    Ok(Json(json!({"status": "ok"})))
}

async fn dev_tokens(
    State(s): State<AppState>,
    Authed(session): Authed,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.dev_recovery_tokens(&session))
        .await
        .map(Json)
}

// --- CMIs -------------------------------------------------------------------

async fn list_cmis(
    State(s): State<AppState>,
    Authed(session): Authed,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.list_cmis(&session)).await.map(Json)
}

async fn create_cmi(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(body): Body<NewCmi>,
) -> ApiResult<impl IntoResponse> {
    let cmi = run(&s, move |c| c.create_cmi(&session, body)).await?;
    Ok((StatusCode::CREATED, Json(cmi)))
}

async fn update_cmi(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
    Body(body): Body<Versioned<CmiPatch>>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.update_cmi(&session, &CmiId::new(id), body.patch, body.expected_version)
    })
    .await
    .map(Json)
}

async fn delete_cmi(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<Json<Deleted>> {
    let global_version = run(&s, move |c| c.delete_cmi(&session, &CmiId::new(id))).await?;
    Ok(Json(Deleted { global_version }))
}

// --- engagements ------------------------------------------------------------

#[derive(Deserialize)]
struct EngagementParams {
    cmi: Option<String>,
    kind: Option<EngagementKind>,
    status: Option<EngagementStatus>,
    year: Option<i32>,
    include_deleted: Option<bool>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_engagements(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<EngagementParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        let query = EngagementQuery {
            cmi_id: resolve_cmi(&c.store().snapshot(), p.cmi.as_deref())?,
            kind: p.kind,
            status: p.status,
            period_year: p.year,
            include_deleted: p.include_deleted.unwrap_or(false),
            page: page(p.offset, p.limit),
        };
        c.list_engagements(&session, query)
    })
    .await
    .map(Json)
}

async fn create_engagement(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(body): Body<NewEngagement>,
) -> ApiResult<impl IntoResponse> {
    let e = run(&s, move |c| c.create_engagement(&session, body)).await?;
    Ok((StatusCode::CREATED, Json(e)))
}

async fn get_engagement(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.get_engagement(&session, &EngagementId::new(id))
    })
    .await
    .map(Json)
}

async fn update_engagement(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
    Body(body): Body<Versioned<EngagementPatch>>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.update_engagement(
            &session,
            &EngagementId::new(id),
            body.patch,
            body.expected_version,
        )
    })
    .await
    .map(Json)
}

async fn delete_engagement(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<Json<Deleted>> {
    let global_version = run(&s, move |c| {
        c.delete_engagement(&session, &EngagementId::new(id))
    })
    .await?;
    Ok(Json(Deleted { global_version }))
}

async fn engagement_rollup(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.engagement_rollup(&session, &EngagementId::new(id))
    })
    .await
    .map(Json)
}

// --- reports ------------------------------------------------------------------

#[derive(Deserialize)]
struct ReportParams {
    cmi: Option<String>,
    report_type: Option<ReportType>,
    category: Option<ReportCategory>,
    year: Option<i32>,
    include_deleted: Option<bool>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_reports(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<ReportParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        let query = ReportQuery {
            cmi_id: resolve_cmi(&c.store().snapshot(), p.cmi.as_deref())?,
            report_type: p.report_type,
            category: p.category,
            period_year: p.year,
            include_deleted: p.include_deleted.unwrap_or(false),
            page: page(p.offset, p.limit),
        };
        c.list_reports(&session, query)
    })
    .await
    .map(Json)
}

async fn submit_report(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(body): Body<ReportPayload>,
) -> ApiResult<impl IntoResponse> {
    let r = run(&s, move |c| c.submit_report(&session, body)).await?;
    Ok((StatusCode::CREATED, Json(r)))
}

async fn get_report(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.get_report(&session, &ReportId::new(id)))
        .await
        .map(Json)
}

async fn edit_report(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
    Body(body): Body<Versioned<ReportPatch>>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.edit_report(
            &session,
            &ReportId::new(id),
            body.patch,
            body.expected_version,
        )
    })
    .await
    .map(Json)
}

async fn delete_report(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<Json<Deleted>> {
    let global_version = run(&s, move |c| c.delete_report(&session, &ReportId::new(id))).await?;
    Ok(Json(Deleted { global_version }))
}

// --- researchers ----------------------------------------------------------------

#[derive(Deserialize)]
struct ResearcherParams {
    cmi: Option<String>,
    include_deleted: Option<bool>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_researchers(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<ResearcherParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        let cmi = resolve_cmi(&c.store().snapshot(), p.cmi.as_deref())?;
        c.list_researchers(
            &session,
            cmi,
            p.include_deleted.unwrap_or(false),
            page(p.offset, p.limit),
        )
    })
    .await
    .map(Json)
}

async fn create_researcher(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(body): Body<NewResearcher>,
) -> ApiResult<impl IntoResponse> {
    let r = run(&s, move |c| c.create_researcher(&session, body)).await?;
    Ok((StatusCode::CREATED, Json(r)))
}

async fn update_researcher(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
    Body(body): Body<Versioned<ResearcherPatch>>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.update_researcher(
            &session,
            &ResearcherId::new(id),
            body.patch,
            body.expected_version,
        )
    })
    .await
    .map(Json)
}

async fn delete_researcher(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<Json<Deleted>> {
    let global_version = run(&s, move |c| {
        c.delete_researcher(&session, &ResearcherId::new(id))
    })
    .await?;
    Ok(Json(Deleted { global_version }))
}

// --- users ------------------------------------------------------------------------

async fn list_users(
    State(s): State<AppState>,
    Authed(session): Authed,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.list_users(&session)).await.map(Json)
}

async fn create_user(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(body): Body<NewUser>,
) -> ApiResult<impl IntoResponse> {
    let u = run(&s, move |c| c.create_user(&session, body)).await?;
    Ok((StatusCode::CREATED, Json(u)))
}

async fn update_user(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
    Body(body): Body<Versioned<UserPatch>>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        c.update_user(
            &session,
            &UserId::new(id),
            body.patch,
            body.expected_version,
        )
    })
    .await
    .map(Json)
}

async fn delete_user(
    State(s): State<AppState>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> ApiResult<Json<Deleted>> {
    let global_version = run(&s, move |c| c.delete_user(&session, &UserId::new(id))).await?;
    Ok(Json(Deleted { global_version }))
}

// --- monitoring and reporting ---------------------------------------------------------

#[derive(Deserialize)]
struct ScopeParams {
    scope: Option<String>,
}

async fn metrics(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<ScopeParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        let scope = scope_for(c, &session, p.scope.as_deref())?;
        c.dashboard_metrics(&session, &scope)
    })
    .await
    .map(Json)
}

#[derive(Deserialize)]
struct ChangesParams {
    since: Option<u64>,
}

async fn changes(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<ChangesParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.monitor(&session, p.since.unwrap_or(0)))
        .await
        .map(Json)
}

#[derive(Deserialize)]
struct AnnualParams {
    year: i32,
    scope: Option<String>,
}

async fn generate_annual(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<AnnualParams>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| {
        let scope = scope_for(c, &session, p.scope.as_deref())?;
        c.generate_annual_report(&session, p.year, &scope)
    })
    .await
    .map(Json)
}

async fn generate_filtered(
    State(s): State<AppState>,
    Authed(session): Authed,
    Body(filter): Body<FilterSpec>,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.generate_filtered_report(&session, &filter))
        .await
        .map(Json)
}

/// Export selection. Sets are comma-separated enum names.
#[derive(Deserialize)]
struct ExportParams {
    format: String,
    scope: Option<String>,
    year: Option<i32>,
    quarter: Option<u8>,
    categories: Option<String>,
    report_types: Option<String>,
}

fn name_set<T: std::str::FromStr + Ord>(
    raw: Option<&str>,
    what: &str,
) -> consortium_core::Result<Option<std::collections::BTreeSet<T>>> {
    raw.map(|raw| {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::InvalidFilter(format!("unknown {what} `{s}`")))
            })
            .collect()
    })
    .transpose()
}

async fn export(
    State(s): State<AppState>,
    Authed(session): Authed,
    Params(p): Params<ExportParams>,
) -> ApiResult<Response> {
    let (format, bytes) = run(&s, move |c| {
        let format: ExportFormat = p.format.parse()?;
        let filter = FilterSpec {
            scope: scope_for(c, &session, p.scope.as_deref())?,
            period_year: p.year,
            period_quarter: p.quarter,
            categories: name_set(p.categories.as_deref(), "category")?,
            report_types: name_set(p.report_types.as_deref(), "report type")?,
        };
        let doc = c.generate_filtered_report(&session, &filter)?;
        Ok((format, export_document(&doc, format)))
    })
    .await?;
    let disposition = format!("attachment; filename=\"report.{}\"", format.as_str());
    Ok((
        [
            (header::CONTENT_TYPE, format.content_type().to_owned()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}

async fn import(
    State(s): State<AppState>,
    Authed(session): Authed,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    run(&s, move |c| c.import_batch(&session, &body))
        .await
        .map(Json)
}
