use super::key::{expand_key, CipherKey, KeySchedule};
use super::stages::{add_round_key, mix_columns, shift_rows, sub_bytes, Direction};
use super::state::{StateBlock, BLOCK_LEN};

/// Initial key addition, `rounds - 1` full rounds, then a final round
/// without the column mix.
pub fn encrypt_block(plaintext: StateBlock, schedule: &KeySchedule) -> StateBlock {
    let rounds = schedule.rounds();
    let mut s = add_round_key(plaintext, &schedule.round_key(0));
    for round in 1..rounds {
        s = sub_bytes(s, Direction::Forward);
        s = shift_rows(s, Direction::Forward);
        s = mix_columns(s, Direction::Forward);
        s = add_round_key(s, &schedule.round_key(round));
    }
    s = sub_bytes(s, Direction::Forward);
    s = shift_rows(s, Direction::Forward);
    add_round_key(s, &schedule.round_key(rounds))
}

/// Exact inverse of [`encrypt_block`].
pub fn decrypt_block(ciphertext: StateBlock, schedule: &KeySchedule) -> StateBlock {
    let rounds = schedule.rounds();
    let mut s = add_round_key(ciphertext, &schedule.round_key(rounds));
    s = shift_rows(s, Direction::Inverse);
    s = sub_bytes(s, Direction::Inverse);
    for round in (1..rounds).rev() {
        s = add_round_key(s, &schedule.round_key(round));
        s = mix_columns(s, Direction::Inverse);
        s = shift_rows(s, Direction::Inverse);
        s = sub_bytes(s, Direction::Inverse);
    }
    add_round_key(s, &schedule.round_key(0))
}

/// A keyed cipher instance: the expanded schedule plus convenience methods
/// over raw byte blocks.
#[derive(Clone, Debug)]
pub struct Hbe {
    schedule: KeySchedule,
    round_keys: Vec<[u8; BLOCK_LEN]>,
}

impl Hbe {
    pub fn new(key: &CipherKey) -> Self {
        let schedule = expand_key(key);
        let round_keys = (0..=schedule.rounds())
            .map(|r| schedule.round_key(r))
            .collect();
        Self {
            schedule,
            round_keys,
        }
    }

    pub fn schedule(&self) -> &KeySchedule {
        &self.schedule
    }

    pub fn encrypt(&self, block: [u8; BLOCK_LEN]) -> [u8; BLOCK_LEN] {
        // Same sequence as `encrypt_block`, reusing precomputed round keys.
        let rounds = self.schedule.rounds();
        let mut s = add_round_key(StateBlock(block), &self.round_keys[0]);
        for rk in &self.round_keys[1..rounds] {
            s = mix_columns(
                shift_rows(sub_bytes(s, Direction::Forward), Direction::Forward),
                Direction::Forward,
            );
            s = add_round_key(s, rk);
        }
        s = shift_rows(sub_bytes(s, Direction::Forward), Direction::Forward);
        add_round_key(s, &self.round_keys[rounds]).0
    }

    pub fn decrypt(&self, block: [u8; BLOCK_LEN]) -> [u8; BLOCK_LEN] {
        decrypt_block(StateBlock(block), &self.schedule).0
    }
}
