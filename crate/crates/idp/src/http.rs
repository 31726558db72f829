//! HTTP front end.
//!
//! | route              | success             | failure                                   |
//! |--------------------|---------------------|-------------------------------------------|
//! | `GET /challenge`   | 200 challenge XML   | 400 missing user                          |
//! | `POST /sso`        | 200 form grant      | 400 malformed-request, 403 reason         |
//! | `POST /register`   | 201                 | 400 invalid-pin/invalid-user-id, 409      |

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Form, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use hbe_core::mac::MacTag;
use hbe_core::saml::{decode_param, encode_param, Message};
use hbe_core::Timestamp;

use crate::provider::{AuthnError, IdentityProvider, RegisterError};
use crate::wire::{RegisterForm, SsoForm, SsoGrant, TEST_CLOCK_HEADER};

#[derive(Clone)]
pub struct AppState {
    pub idp: Arc<IdentityProvider>,
    /// When set, requests may shift the clock with [`TEST_CLOCK_HEADER`].
    pub test_clock: bool,
}

impl AppState {
    fn now(&self, headers: &HeaderMap) -> Timestamp {
        let base = self.idp.now();
        if !self.test_clock {
            return base;
        }
        headers
            .get(TEST_CLOCK_HEADER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<i64>().ok())
            .map_or(base, |skew| base.plus(skew))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/challenge", get(challenge))
        .route("/sso", post(sso))
        .route("/register", post(register))
        .with_state(state)
}

fn text(status: StatusCode, body: impl Into<String>) -> Response {
    (status, body.into()).into_response()
}

async fn challenge(
    State(st): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    let Some(user) = q.get("user").filter(|u| !u.is_empty()) else {
        return text(StatusCode::BAD_REQUEST, "missing-user");
    };
    let doc = st.idp.issue_challenge(user, st.now(&headers));
    (
        StatusCode::OK,
        [(header::CONTENT_TYPE, "application/xml")],
        doc.to_xml(),
    )
        .into_response()
}

async fn sso(
    State(st): State<AppState>,
    headers: HeaderMap,
    Form(form): Form<SsoForm>,
) -> Response {
    let now = st.now(&headers);
    let request = match decode_param(&form.saml_request) {
        Ok(Message::AuthnRequest(r)) => r,
        _ => return text(StatusCode::BAD_REQUEST, "malformed-request"),
    };
    let Some(answer) = STANDARD
        .decode(form.answer.trim())
        .ok()
        .and_then(|b| MacTag::from_slice(&b))
    else {
        return text(StatusCode::FORBIDDEN, "reject-auth");
    };
    match st
        .idp
        .handle_authn(&form.user, &request, &form.challenge_id, &answer, now)
    {
        Ok(grant) => {
            let body = SsoGrant {
                saml_response: encode_param(&grant.response.to_xml()),
                session_key: grant.wrapped_session_key.to_wire(),
            };
            match serde_urlencoded::to_string(&body) {
                Ok(s) => (
                    StatusCode::OK,
                    [(header::CONTENT_TYPE, "application/x-www-form-urlencoded")],
                    s,
                )
                    .into_response(),
                Err(e) => text(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
            }
        }
        Err(AuthnError::Internal(msg)) => {
            tracing::error!(%msg, "authentication failed internally");
            text(StatusCode::INTERNAL_SERVER_ERROR, "internal-error")
        }
        Err(e) => {
            tracing::info!(user = %form.user, reason = e.wire_reason(), "authentication rejected");
            text(StatusCode::FORBIDDEN, e.wire_reason())
        }
    }
}

async fn register(
    State(st): State<AppState>,
    headers: HeaderMap,
    Form(form): Form<RegisterForm>,
) -> Response {
    match st
        .idp
        .register_user(&form.user, form.pin.as_bytes(), st.now(&headers))
    {
        Ok(_) => text(StatusCode::CREATED, "registered"),
        Err(RegisterError::DuplicateUser) => text(StatusCode::CONFLICT, "duplicate-user"),
        Err(RegisterError::InvalidPin(_)) => text(StatusCode::BAD_REQUEST, "invalid-pin"),
        Err(RegisterError::InvalidUserId) => text(StatusCode::BAD_REQUEST, "invalid-user-id"),
        Err(RegisterError::Persist(e)) => {
            tracing::error!(error = %e, "could not persist directory");
            text(StatusCode::INTERNAL_SERVER_ERROR, "persist-failed")
        }
    }
}

/// Serves on an already-bound listener until the future is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
