//! Independent reference implementations for cross-checking the production
//! code. Nothing here depends on `hbe-core`; everything is written the slow,
//! obvious way.

pub mod bigmac;
pub mod gf;
pub mod reference;
