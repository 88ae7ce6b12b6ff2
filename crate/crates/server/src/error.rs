use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use consortium_core::acquisition::Violation;
use consortium_core::Error;
use serde::Serialize;

/// Wire form of every failure.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error_code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<Violation>>,
}

#[derive(Debug)]
pub enum ApiError {
    Core(Error),
    /// Request body or query string that could not be decoded.
    BadRequest {
        code: &'static str,
        message: String,
    },
    RouteNotFound,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

/// The status for each core error. Total over the enum.
pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::AuthFailure | Error::AuthRequired | Error::SessionExpired => {
            StatusCode::UNAUTHORIZED
        }
        Error::Forbidden(_) | Error::ScopeViolation(_) => StatusCode::FORBIDDEN,
        Error::NotFound { .. } | Error::UnknownCmi(_) => StatusCode::NOT_FOUND,
        Error::VersionConflict { .. }
        | Error::AlreadyDeleted { .. }
        | Error::DuplicateUsername
        | Error::DuplicateCode(_)
        | Error::NonEmptyStore => StatusCode::CONFLICT,
        Error::ValidationFailed(_)
        | Error::InvalidFilter(_)
        | Error::InconsistentFilter(_)
        | Error::Hierarchy(_)
        | Error::InvalidPairing
        | Error::ReferenceViolation { .. }
        | Error::WeakPassword { .. }
        | Error::InvalidTransition { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        Error::MalformedCsv(_) | Error::InvalidToken => StatusCode::BAD_REQUEST,
        Error::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Core(e) => {
                let status = status_for(&e);
                if status.is_server_error() {
                    tracing::error!("{e}");
                }
                let violations = match &e {
                    Error::ValidationFailed(v) => Some(v.clone()),
                    _ => None,
                };
                let body = ErrorBody {
                    error_code: e.code().to_owned(),
                    message: e.to_string(),
                    violations,
                };
                (status, body)
            }
            ApiError::BadRequest { code, message } => (
                StatusCode::BAD_REQUEST,
                ErrorBody {
                    error_code: code.to_owned(),
                    message,
                    violations: None,
                },
            ),
            ApiError::RouteNotFound => (
                StatusCode::NOT_FOUND,
                ErrorBody {
                    error_code: "RouteNotFound".into(),
                    message: "no such endpoint".into(),
                    violations: None,
                },
            ),
        };
        (status, Json(body)).into_response()
    }
}
