//! Python bindings. Records cross the boundary as plain dicts and lists
//! with the same field names as the JSON API; failures raise
//! `ConsortiumError(code, message)`.

use std::path::PathBuf;
use std::sync::Arc;

use consortium_core::access::Session as CoreSession;
use consortium_core::acquisition::{
    CmiPatch, EngagementPatch, EngagementQuery, NewCmi, NewEngagement, NewResearcher, ReportPatch,
    ReportPayload, ReportQuery, ResearcherPatch,
};
use consortium_core::analytics::export_document;
use consortium_core::domain::{
    CmiId, EngagementId, ReportCategory, ReportId, ReportType, ResearcherId, UserId,
};
use consortium_core::fixtures::{fixture_clock, seed_fixture, SeedProfile};
use consortium_core::persistence::Page;
use consortium_core::{
    AuthConfig, Consortium as Core, Error, ExportFormat, FilterSpec, NewUser, Scope, UserPatch,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(
    consortium,
    ConsortiumError,
    PyException,
    "A failed consortium operation. args are (error_code, message)."
);

fn raise(e: Error) -> PyErr {
    ConsortiumError::new_err((e.code(), e.to_string()))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj
        .py()
        .import("json")?
        .call_method1("dumps", (obj,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// An authenticated session. Pass it back to every operation.
#[pyclass(frozen, module = "consortium")]
pub struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    #[getter]
    fn token(&self) -> &str {
        &self.inner.token
    }

    #[getter]
    fn user_id(&self) -> &str {
        self.inner.user_id.as_str()
    }

    #[getter]
    fn expires_at(&self) -> String {
        self.inner.expires_at.to_rfc3339()
    }

    fn __repr__(&self) -> String {
        format!(
            "Session(user_id={:?}, expires_at={:?})",
            self.user_id(),
            self.expires_at()
        )
    }
}

/// A consortium store: in memory, or journaled to `db_path`.
#[pyclass(frozen, module = "consortium")]
pub struct Consortium {
    inner: Arc<Core>,
}

fn with<T, F>(py: Python<'_>, f: F) -> PyResult<T>
where
    T: Send,
    F: FnOnce() -> consortium_core::Result<T> + Send,
{
    py.detach(f).map_err(raise)
}

impl Consortium {
    fn scope(&self, raw: Option<&str>) -> PyResult<Scope> {
        match raw {
            None => Ok(Scope::Consortium),
            Some(raw) => Scope::parse(raw, &self.inner.store().snapshot()).map_err(raise),
        }
    }
}

#[pymethods]
impl Consortium {
    #[new]
    #[pyo3(signature = (db_path=None, dev_mode=false, hash_rounds=None))]
    fn new(
        py: Python<'_>,
        db_path: Option<PathBuf>,
        dev_mode: bool,
        hash_rounds: Option<u32>,
    ) -> PyResult<Self> {
        let mut config = AuthConfig {
            dev_mode,
            ..AuthConfig::default()
        };
        if let Some(rounds) = hash_rounds {
            config.hash_rounds = rounds;
        }
        let inner = match db_path {
            Some(path) => with(py, || Core::open(&path, config))?,
            None => Core::in_memory(config),
        };
        Ok(Consortium {
            inner: Arc::new(inner),
        })
    }

    /// An in-memory store loaded with a fixture on the deterministic
    /// fixture clock. `profile` is `canonical`, `canonical-registry` or
    /// `random:SEED:SIZE`.
    #[staticmethod]
    #[pyo3(signature = (profile="canonical", dev_mode=false, hash_rounds=1000))]
    fn fixture(py: Python<'_>, profile: &str, dev_mode: bool, hash_rounds: u32) -> PyResult<Self> {
        let profile: SeedProfile = profile.parse().map_err(raise)?;
        let config = AuthConfig {
            dev_mode,
            hash_rounds,
            ..AuthConfig::default()
        };
        let inner = Core::in_memory_with_clock(config, fixture_clock());
        with(py, || seed_fixture(&inner, profile))?;
        Ok(Consortium {
            inner: Arc::new(inner),
        })
    }

    fn seed(&self, py: Python<'_>, profile: &str) -> PyResult<Py<PyAny>> {
        let profile: SeedProfile = profile.parse().map_err(raise)?;
        let summary = with(py, || seed_fixture(&self.inner, profile))?;
        to_py(py, &summary)
    }

    /// Global version: the number of writes so far.
    fn head(&self) -> u64 {
        self.inner.store().head()
    }

    fn bootstrap_admin(
        &self,
        py: Python<'_>,
        username: &str,
        password: &str,
    ) -> PyResult<Py<PyAny>> {
        let user = with(py, || self.inner.bootstrap_admin(username, password))?;
        to_py(py, &user)
    }

    fn login(&self, py: Python<'_>, username: &str, password: &str) -> PyResult<Session> {
        let inner = with(py, || self.inner.authenticate(username, password))?;
        Ok(Session { inner })
    }

    fn logout(&self, py: Python<'_>, session: &Session) -> PyResult<()> {
        with(py, || self.inner.logout(&session.inner))
    }

    fn initiate_password_recovery(&self, py: Python<'_>, username: &str) -> PyResult<()> {
        with(py, || self.inner.initiate_password_recovery(username))
    }

    fn complete_password_recovery(
        &self,
        py: Python<'_>,
        token: &str,
        new_password: &str,
    ) -> PyResult<()> {
        with(py, || {
            self.inner.complete_password_recovery(token, new_password)
        })
    }

    fn dev_recovery_tokens(&self, py: Python<'_>, session: &Session) -> PyResult<Py<PyAny>> {
        let tokens = with(py, || self.inner.dev_recovery_tokens(&session.inner))?;
        to_py(py, &tokens)
    }

    // users

    fn create_user(
        &self,
        py: Python<'_>,
        session: &Session,
        user: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let user: NewUser = from_py(user)?;
        let created = with(py, || self.inner.create_user(&session.inner, user))?;
        to_py(py, &created)
    }

    fn list_users(&self, py: Python<'_>, session: &Session) -> PyResult<Py<PyAny>> {
        let users = with(py, || self.inner.list_users(&session.inner))?;
        to_py(py, &users)
    }

    fn update_user(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
        patch: &Bound<'_, PyAny>,
        expected_version: u64,
    ) -> PyResult<Py<PyAny>> {
        let patch: UserPatch = from_py(patch)?;
        let id = UserId::new(id.to_owned());
        let user = with(py, || {
            self.inner
                .update_user(&session.inner, &id, patch, expected_version)
        })?;
        to_py(py, &user)
    }

    // registry

    fn create_cmi(
        &self,
        py: Python<'_>,
        session: &Session,
        cmi: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let cmi: NewCmi = from_py(cmi)?;
        let created = with(py, || self.inner.create_cmi(&session.inner, cmi))?;
        to_py(py, &created)
    }

    fn update_cmi(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
        patch: &Bound<'_, PyAny>,
        expected_version: u64,
    ) -> PyResult<Py<PyAny>> {
        let patch: CmiPatch = from_py(patch)?;
        let id = CmiId::new(id.to_owned());
        let cmi = with(py, || {
            self.inner
                .update_cmi(&session.inner, &id, patch, expected_version)
        })?;
        to_py(py, &cmi)
    }

    fn list_cmis(&self, py: Python<'_>, session: &Session) -> PyResult<Py<PyAny>> {
        let cmis = with(py, || self.inner.list_cmis(&session.inner))?;
        to_py(py, &cmis)
    }

    fn create_researcher(
        &self,
        py: Python<'_>,
        session: &Session,
        researcher: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let researcher: NewResearcher = from_py(researcher)?;
        let created = with(py, || {
            self.inner.create_researcher(&session.inner, researcher)
        })?;
        to_py(py, &created)
    }

    fn update_researcher(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
        patch: &Bound<'_, PyAny>,
        expected_version: u64,
    ) -> PyResult<Py<PyAny>> {
        let patch: ResearcherPatch = from_py(patch)?;
        let id = ResearcherId::new(id.to_owned());
        let r = with(py, || {
            self.inner
                .update_researcher(&session.inner, &id, patch, expected_version)
        })?;
        to_py(py, &r)
    }

    #[pyo3(signature = (session, cmi_id=None, include_deleted=false, offset=0, limit=100))]
    fn list_researchers(
        &self,
        py: Python<'_>,
        session: &Session,
        cmi_id: Option<&str>,
        include_deleted: bool,
        offset: usize,
        limit: usize,
    ) -> PyResult<Py<PyAny>> {
        let cmi = cmi_id.map(|c| CmiId::new(c.to_owned()));
        let page = with(py, || {
            self.inner.list_researchers(
                &session.inner,
                cmi,
                include_deleted,
                Page { offset, limit },
            )
        })?;
        to_py(py, &page)
    }

    fn create_engagement(
        &self,
        py: Python<'_>,
        session: &Session,
        engagement: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let engagement: NewEngagement = from_py(engagement)?;
        let created = with(py, || {
            self.inner.create_engagement(&session.inner, engagement)
        })?;
        to_py(py, &created)
    }

    fn get_engagement(&self, py: Python<'_>, session: &Session, id: &str) -> PyResult<Py<PyAny>> {
        let id = EngagementId::new(id.to_owned());
        let e = with(py, || self.inner.get_engagement(&session.inner, &id))?;
        to_py(py, &e)
    }

    fn update_engagement(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
        patch: &Bound<'_, PyAny>,
        expected_version: u64,
    ) -> PyResult<Py<PyAny>> {
        let patch: EngagementPatch = from_py(patch)?;
        let id = EngagementId::new(id.to_owned());
        let e = with(py, || {
            self.inner
                .update_engagement(&session.inner, &id, patch, expected_version)
        })?;
        to_py(py, &e)
    }

    fn delete_engagement(&self, py: Python<'_>, session: &Session, id: &str) -> PyResult<u64> {
        let id = EngagementId::new(id.to_owned());
        with(py, || self.inner.delete_engagement(&session.inner, &id))
    }

    /// `query` holds any of cmi_id, kind, status, period_year,
    /// include_deleted and page ({offset, limit}).
    #[pyo3(signature = (session, query=None))]
    fn list_engagements(
        &self,
        py: Python<'_>,
        session: &Session,
        query: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Py<PyAny>> {
        let query: EngagementQuery = query.map(from_py).transpose()?.unwrap_or_default();
        let page = with(py, || self.inner.list_engagements(&session.inner, query))?;
        to_py(py, &page)
    }

    fn engagement_rollup(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
    ) -> PyResult<Py<PyAny>> {
        let id = EngagementId::new(id.to_owned());
        let rollup = with(py, || self.inner.engagement_rollup(&session.inner, &id))?;
        to_py(py, &rollup)
    }

    // reports

    fn submit_report(
        &self,
        py: Python<'_>,
        session: &Session,
        report: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let payload: ReportPayload = from_py(report)?;
        let created = with(py, || self.inner.submit_report(&session.inner, payload))?;
        to_py(py, &created)
    }

    fn get_report(&self, py: Python<'_>, session: &Session, id: &str) -> PyResult<Py<PyAny>> {
        let id = ReportId::new(id.to_owned());
        let r = with(py, || self.inner.get_report(&session.inner, &id))?;
        to_py(py, &r)
    }

    fn edit_report(
        &self,
        py: Python<'_>,
        session: &Session,
        id: &str,
        patch: &Bound<'_, PyAny>,
        expected_version: u64,
    ) -> PyResult<Py<PyAny>> {
        let patch: ReportPatch = from_py(patch)?;
        let id = ReportId::new(id.to_owned());
        let r = with(py, || {
            self.inner
                .edit_report(&session.inner, &id, patch, expected_version)
        })?;
        to_py(py, &r)
    }

    fn delete_report(&self, py: Python<'_>, session: &Session, id: &str) -> PyResult<u64> {
        let id = ReportId::new(id.to_owned());
        with(py, || self.inner.delete_report(&session.inner, &id))
    }

    /// `query` holds any of cmi_id, report_type, category, period_year,
    /// include_deleted and page ({offset, limit}).
    #[pyo3(signature = (session, query=None))]
    fn list_reports(
        &self,
        py: Python<'_>,
        session: &Session,
        query: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Py<PyAny>> {
        let query: ReportQuery = query.map(from_py).transpose()?.unwrap_or_default();
        let page = with(py, || self.inner.list_reports(&session.inner, query))?;
        to_py(py, &page)
    }

    fn import_csv(&self, py: Python<'_>, session: &Session, data: &[u8]) -> PyResult<Py<PyAny>> {
        let summary = with(py, || self.inner.import_batch(&session.inner, data))?;
        to_py(py, &summary)
    }

    // monitoring and reporting

    /// `scope` is "consortium" (the default) or a CMI code or id.
    #[pyo3(signature = (session, scope=None))]
    fn dashboard_metrics(
        &self,
        py: Python<'_>,
        session: &Session,
        scope: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let scope = self.scope(scope)?;
        let m = with(py, || self.inner.dashboard_metrics(&session.inner, &scope))?;
        to_py(py, &m)
    }

    #[pyo3(signature = (session, since=0))]
    fn changes(&self, py: Python<'_>, session: &Session, since: u64) -> PyResult<Py<PyAny>> {
        let set = with(py, || self.inner.monitor(&session.inner, since))?;
        to_py(py, &set)
    }

    #[pyo3(signature = (session, year, scope=None))]
    fn annual_report(
        &self,
        py: Python<'_>,
        session: &Session,
        year: i32,
        scope: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let scope = self.scope(scope)?;
        let doc = with(py, || {
            self.inner
                .generate_annual_report(&session.inner, year, &scope)
        })?;
        to_py(py, &doc)
    }

    fn filtered_report(
        &self,
        py: Python<'_>,
        session: &Session,
        filter: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let filter: FilterSpec = from_py(filter)?;
        let doc = with(py, || {
            self.inner.generate_filtered_report(&session.inner, &filter)
        })?;
        to_py(py, &doc)
    }

    /// Rendered document bytes. Without `year` every period is included.
    #[pyo3(signature = (session, format="json", year=None, scope=None))]
    fn export<'py>(
        &self,
        py: Python<'py>,
        session: &Session,
        format: &str,
        year: Option<i32>,
        scope: Option<&str>,
    ) -> PyResult<Bound<'py, PyBytes>> {
        let format: ExportFormat = format.parse().map_err(raise)?;
        let filter = FilterSpec {
            period_year: year,
            ..FilterSpec::for_scope(self.scope(scope)?)
        };
        let doc = with(py, || {
            self.inner.generate_filtered_report(&session.inner, &filter)
        })?;
        Ok(PyBytes::new(py, &export_document(&doc, format)))
    }
}

/// Category wire name for a report type wire name.
#[pyfunction]
fn classify_report_type(report_type: &str) -> PyResult<&'static str> {
    let t: ReportType = report_type
        .parse()
        .map_err(|_| PyValueError::new_err(format!("unknown report type {report_type:?}")))?;
    Ok(t.category().as_str())
}

/// Category wire name to its report types, in canonical order.
#[pyfunction]
fn taxonomy() -> Vec<(&'static str, Vec<&'static str>)> {
    ReportCategory::ALL
        .into_iter()
        .map(|c| {
            (
                c.as_str(),
                c.report_types().map(ReportType::as_str).collect(),
            )
        })
        .collect()
}

#[pymodule]
pub fn consortium(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConsortiumError", m.py().get_type::<ConsortiumError>())?;
    m.add_class::<Consortium>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(classify_report_type, m)?)?;
    m.add_function(wrap_pyfunction!(taxonomy, m)?)?;
    Ok(())
}
