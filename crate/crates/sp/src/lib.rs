//! Service Provider for PIN-pad single sign-on.
//!
//! Gates one protected resource behind an SP-initiated SSO exchange,
//! consumes encrypted assertions at the assertion consumer service and
//! mints short-lived bearer sessions.

pub mod config;
pub mod http;
pub mod provider;
pub mod state;

pub use config::SpConfig;
pub use provider::{ConsumeReject, ServiceProvider};
