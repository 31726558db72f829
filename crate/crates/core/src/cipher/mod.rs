//! The HBE block cipher: a 128-bit substitution-permutation network with
//! 128, 192 and 256-bit keys (10, 12 and 14 rounds).

mod block;
pub mod gf;
mod key;
mod sbox;
mod stages;
mod state;

pub use block::{decrypt_block, encrypt_block, Hbe};
pub use key::{expand_key, CipherKey, KeySchedule, KeySize};
pub use sbox::SBoxTable;
pub use stages::{add_round_key, mix_column, mix_columns, shift_rows, sub_bytes, Direction};
pub use state::{StateBlock, BLOCK_LEN};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CipherError {
    #[error("key material must be 16, 24 or 32 octets, got {0}")]
    InvalidKeyLength(usize),
    #[error("unsupported key size: {0} bits")]
    UnsupportedKeySize(u32),
}
