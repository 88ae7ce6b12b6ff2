//! Multi-tenant R&D consortium data management.
//!
//! Member institutions (CMIs) submit structured reports about their
//! programs, projects and sub-projects; a central office monitors activity
//! through a change feed and dashboard metrics and generates consolidated
//! annual or filtered report documents.
//!
//! [`Consortium`] is the entry point. It wraps a [`persistence::Store`]
//! (an append-only journal replayed into memory) together with account
//! and session state.

pub mod access;
pub mod acquisition;
pub mod analytics;
pub mod clock;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod persistence;
mod serde_util;
mod service;

pub use access::{Action, AuthConfig, NewUser, Session, UserPatch};
pub use analytics::{ExportFormat, FilterSpec, MetricsSnapshot, ReportDocument, Scope};
pub use error::{Error, Result};
pub use service::Consortium;
