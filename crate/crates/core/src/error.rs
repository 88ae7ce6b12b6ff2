use crate::acquisition::Violation;
use crate::domain::{EngagementStatus, HierarchyViolation};
use crate::persistence::EntityKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Hierarchy(#[from] HierarchyViolation),

    #[error("version conflict on {kind} {id}: expected {expected}, stored {actual}")]
    VersionConflict {
        kind: EntityKind,
        id: String,
        expected: u64,
        actual: u64,
    },

    #[error("{field} refers to unknown {kind} {id}")]
    ReferenceViolation {
        field: &'static str,
        kind: EntityKind,
        id: String,
    },

    #[error("{kind} {id} not found")]
    NotFound { kind: EntityKind, id: String },

    #[error("{kind} {id} is already deleted")]
    AlreadyDeleted { kind: EntityKind, id: String },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("validation failed: {}", join_violations(.0))]
    ValidationFailed(Vec<Violation>),

    #[error("status cannot move from {from} to {to}")]
    InvalidTransition {
        from: EngagementStatus,
        to: EngagementStatus,
    },

    #[error("CMI code {0:?} is already taken")]
    DuplicateCode(String),

    #[error("outside the session's scope: {0}")]
    ScopeViolation(String),

    #[error("forbidden: {0}")]
    Forbidden(String),

    #[error("authentication required")]
    AuthRequired,

    #[error("invalid credentials")]
    AuthFailure,

    #[error("session expired")]
    SessionExpired,

    #[error("username is already taken")]
    DuplicateUsername,

    #[error("admins must not have a CMI; focal accounts must have one")]
    InvalidPairing,

    #[error("password must be at least {min} characters")]
    WeakPassword { min: usize },

    #[error("recovery token is invalid")]
    InvalidToken,

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error("unknown CMI {0:?}")]
    UnknownCmi(String),

    #[error("inconsistent filter: {0}")]
    InconsistentFilter(String),

    #[error("store already holds data")]
    NonEmptyStore,

    #[error("storage failure: {0}")]
    Storage(String),
}

impl Error {
    /// Stable machine-readable code, used as `error_code` on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Hierarchy(_) => "HierarchyViolation",
            Error::VersionConflict { .. } => "VersionConflict",
            Error::ReferenceViolation { .. } => "ReferenceViolation",
            Error::NotFound { .. } => "NotFound",
            Error::AlreadyDeleted { .. } => "AlreadyDeleted",
            Error::InvalidFilter(_) => "InvalidFilter",
            Error::ValidationFailed(_) => "ValidationFailed",
            Error::InvalidTransition { .. } => "InvalidTransition",
            Error::DuplicateCode(_) => "DuplicateCode",
            Error::ScopeViolation(_) => "ScopeViolation",
            Error::Forbidden(_) => "Forbidden",
            Error::AuthRequired => "AuthRequired",
            Error::AuthFailure => "AuthFailure",
            Error::SessionExpired => "SessionExpired",
            Error::DuplicateUsername => "DuplicateUsername",
            Error::InvalidPairing => "InvalidPairing",
            Error::WeakPassword { .. } => "WeakPassword",
            Error::InvalidToken => "InvalidToken",
            Error::MalformedCsv(_) => "MalformedCsv",
            Error::UnknownCmi(_) => "UnknownCmi",
            Error::InconsistentFilter(_) => "InconsistentFilter",
            Error::NonEmptyStore => "NonEmptyStore",
            Error::Storage(_) => "StorageFailure",
        }
    }

    pub(crate) fn storage(err: impl std::fmt::Display) -> Self {
        Error::Storage(err.to_string())
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
