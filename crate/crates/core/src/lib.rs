//! Building blocks for SAML single sign-on protected by the HBE block
//! cipher and a one-time polynomial MAC.
//!
//! - [`cipher`]: the 128-bit block cipher with 128/192/256-bit keys.
//! - [`mac`]: polynomial-evaluation MAC modulo 2^130 - 5.
//! - [`kex`]: PIN-derived keys, challenges, seal/open and key transport.
//! - [`saml`]: message model, canonical XML and assertion protection.

pub mod cipher;
pub mod kex;
pub mod keystore;
pub mod mac;
pub mod saml;
pub mod time;

pub use time::{Clock, ManualClock, SystemClock, Timestamp};
