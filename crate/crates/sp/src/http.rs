//! HTTP front end.
//!
//! | route            | outcome                                                   |
//! |------------------|-----------------------------------------------------------|
//! | `GET /resource`  | 302 to the IdP without `X-Session`; 200 or 401 with one    |
//! | `POST /acs`      | 200 with `X-Session`, or 403 with the reject reason       |

use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Form, Router};
use serde::Deserialize;

use hbe_core::saml::{decode_param, Message};
use hbe_core::Timestamp;

use crate::provider::{ConsumeReject, ServiceProvider};

pub const SESSION_HEADER: &str = "x-session";
/// Header carrying a clock offset in seconds; honored only in test-clock mode.
pub const TEST_CLOCK_HEADER: &str = "x-test-clock-skew";

#[derive(Clone)]
pub struct AppState {
    pub sp: Arc<ServiceProvider>,
    pub test_clock: bool,
}

impl AppState {
    fn now(&self, headers: &HeaderMap) -> Timestamp {
        let base = self.sp.now();
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

#[derive(Debug, Deserialize)]
pub struct AcsForm {
    #[serde(rename = "SAMLResponse")]
    pub saml_response: String,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/resource", get(resource))
        .route("/acs", post(acs))
        .with_state(state)
}

async fn resource(State(st): State<AppState>, headers: HeaderMap) -> Response {
    let now = st.now(&headers);
    match headers.get(SESSION_HEADER) {
        None => {
            let r = st.sp.gate_resource(now);
            tracing::info!(request = %r.request.id, "redirecting to idp");
            (StatusCode::FOUND, [(header::LOCATION, r.location)]).into_response()
        }
        Some(token) => match token
            .to_str()
            .ok()
            .and_then(|t| st.sp.serve_resource(t, now))
        {
            Some(body) => (StatusCode::OK, body).into_response(),
            None => (StatusCode::UNAUTHORIZED, "invalid-session").into_response(),
        },
    }
}

async fn acs(
    State(st): State<AppState>,
    headers: HeaderMap,
    Form(form): Form<AcsForm>,
) -> Response {
    let now = st.now(&headers);
    let outcome = match decode_param(&form.saml_response) {
        Ok(Message::Response(r)) => st.sp.consume_response(&r, now),
        _ => Err(ConsumeReject::Malformed),
    };
    match outcome {
        Ok(session) => {
            tracing::info!(subject = %session.subject, "session established");
            (
                StatusCode::OK,
                [(SESSION_HEADER, session.token)],
                format!("authenticated {}\n", session.subject),
            )
                .into_response()
        }
        Err(reject) => {
            tracing::info!(reason = reject.reason(), "response rejected");
            (StatusCode::FORBIDDEN, reject.reason()).into_response()
        }
    }
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
