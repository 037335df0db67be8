use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use datavalor::{Error, ErrorKind};
use serde::Serialize;

/// Wire form of every failed request.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub path: Option<String>,
}

#[derive(Debug)]
pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Validation => StatusCode::BAD_REQUEST,
        ErrorKind::NotFound => StatusCode::NOT_FOUND,
        ErrorKind::Conflict => StatusCode::CONFLICT,
        ErrorKind::Math => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

/// 0 success, 1 bad input of any kind, 2 a formula left its domain.
pub fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Math => 2,
        _ => 1,
    }
}

pub fn body(e: &Error) -> ErrorBody {
    ErrorBody {
        code: e.code().to_string(),
        message: e.to_string(),
        path: e.path().map(str::to_string),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status(self.0.kind());
        let json = datavalor::scenario::result_json(&body(&self.0));
        (status, [("content-type", "application/json")], json).into_response()
    }
}
