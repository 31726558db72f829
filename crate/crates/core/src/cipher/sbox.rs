//! Byte substitution tables.
//!
//! The forward table is the multiplicative inverse in GF(2^8) followed by a
//! fixed affine map over GF(2). Both tables are generated once on first use.

use std::sync::OnceLock;

use super::gf;

/// Forward and inverse substitution tables.
#[derive(Clone, PartialEq, Eq)]
pub struct SBoxTable {
    pub forward: [u8; 256],
    pub inverse: [u8; 256],
}

impl std::fmt::Debug for SBoxTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SBoxTable").finish_non_exhaustive()
    }
}

const AFFINE_CONSTANT: u8 = 0x63;

fn affine(b: u8) -> u8 {
    b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ AFFINE_CONSTANT
}

impl SBoxTable {
    /// Builds both tables from the field inverse and the affine map.
    pub fn generate() -> Self {
        let mut forward = [0u8; 256];
        let mut inverse = [0u8; 256];
        for x in 0..=255u8 {
            let y = affine(gf::inv(x));
            forward[x as usize] = y;
            inverse[y as usize] = x;
        }
        Self { forward, inverse }
    }

    /// The process-wide table, initialized exactly once.
    pub fn get() -> &'static SBoxTable {
        static TABLE: OnceLock<SBoxTable> = OnceLock::new();
        TABLE.get_or_init(SBoxTable::generate)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = [false; 256];
        for &y in &self.forward {
            if std::mem::replace(&mut seen[y as usize], true) {
                return false;
            }
        }
        (0..=255u8).all(|x| self.inverse[self.forward[x as usize] as usize] == x)
    }
}

#[inline]
pub(crate) fn forward(b: u8) -> u8 {
    SBoxTable::get().forward[b as usize]
}

#[inline]
pub(crate) fn inverse(b: u8) -> u8 {
    SBoxTable::get().inverse[b as usize]
}
