//! Identity Provider for PIN-pad single sign-on.
//!
//! Users register a PIN; the IdP stores only a salt and the derived
//! long-term key sealed under its master key. Authentication is a
//! challenge/response keyed by that long-term key, after which the IdP
//! issues an encrypted assertion for the requesting SP together with a
//! session key wrapped for the user.

pub mod config;
pub mod directory;
pub mod http;
pub mod provider;
pub mod wire;

pub use config::IdpConfig;
pub use provider::IdentityProvider;
