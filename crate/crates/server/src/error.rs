use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lia_core::engine::ErrorClass;
use lia_core::perception::GatewayError;
use lia_core::GameError;
use serde::{Deserialize, Serialize};

use crate::store::StoreError;

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub enum ApiError {
    Unauthenticated(String),
    Game(GameError),
    Gateway(GatewayError),
    BadRequest(String),
    NotFound(String),
    Conflict(String),
    Internal(String),
}

impl ApiError {
    pub fn class_name(&self) -> &'static str {
        match self {
            ApiError::Unauthenticated(_) => "unauthenticated",
            ApiError::Game(e) => class_name(e.class()),
            ApiError::Gateway(_) => class_name(ErrorClass::Unavailable),
            ApiError::BadRequest(_) => class_name(ErrorClass::BadRequest),
            ApiError::NotFound(_) => class_name(ErrorClass::NotFound),
            ApiError::Conflict(_) => class_name(ErrorClass::Conflict),
            ApiError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Unauthenticated(_) => StatusCode::UNAUTHORIZED,
            ApiError::Game(e) => status_of(e.class()),
            ApiError::Gateway(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn message(&self) -> String {
        match self {
            ApiError::Game(e) => e.to_string(),
            ApiError::Gateway(e) => e.to_string(),
            ApiError::Unauthenticated(m)
            | ApiError::BadRequest(m)
            | ApiError::NotFound(m)
            | ApiError::Conflict(m)
            | ApiError::Internal(m) => m.clone(),
        }
    }
}

pub fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::BadRequest => "bad-request",
        ErrorClass::PaymentRequired => "payment-required",
        ErrorClass::NotFound => "not-found",
        ErrorClass::Conflict => "conflict",
        ErrorClass::Unavailable => "unavailable",
    }
}

pub fn status_of(class: ErrorClass) -> StatusCode {
    match class {
        ErrorClass::BadRequest => StatusCode::BAD_REQUEST,
        ErrorClass::PaymentRequired => StatusCode::PAYMENT_REQUIRED,
        ErrorClass::NotFound => StatusCode::NOT_FOUND,
        ErrorClass::Conflict => StatusCode::CONFLICT,
        ErrorClass::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        ApiError::Game(e)
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::UnknownCamera(c) => ApiError::Game(GameError::UnknownCamera(c)),
            other => ApiError::Gateway(other),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.class_name().to_string(),
            message: self.message(),
        };
        (self.status(), Json(body)).into_response()
    }
}
