//! API errors and their JSON bodies.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use uuid::Uuid;

use segsynth::contour_synth::SynthError;
use segsynth::mask_io::MaskError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("session {0} not found")]
    NotFound(Uuid),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("{0}")]
    InvalidMask(String),
    #[error("invalid parameters")]
    Validation(Vec<FieldError>),
    #[error("{message}")]
    Synthesis {
        stage: Option<&'static str>,
        message: String,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Body of every error response.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::InvalidMask(_) | ApiError::Validation(_) | ApiError::Synthesis { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn from_mask(e: MaskError) -> Self {
        match e {
            MaskError::EmptyMask => ApiError::InvalidMask("empty mask".into()),
            other => ApiError::InvalidMask(other.to_string()),
        }
    }

    pub fn from_validation(errors: Vec<SynthError>) -> Self {
        ApiError::Validation(
            errors
                .into_iter()
                .map(|e| match e {
                    SynthError::InvalidParameter { field, reason } => FieldError { field, reason },
                    other => FieldError {
                        field: String::new(),
                        reason: other.to_string(),
                    },
                })
                .collect(),
        )
    }

    pub fn from_synth(e: SynthError) -> Self {
        ApiError::Synthesis {
            stage: e.stage(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let body = ErrorBody {
            error: self.to_string(),
            stage: match &self {
                ApiError::Synthesis { stage, .. } => *stage,
                _ => None,
            },
            fields: match self {
                ApiError::Validation(fields) => fields,
                _ => Vec::new(),
            },
        };
        (status, Json(body)).into_response()
    }
}
