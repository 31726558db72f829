//! The four per-round transformations.

use super::gf::{mul, xtime};
use super::sbox;
use super::state::StateBlock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub fn sub_bytes(state: StateBlock, direction: Direction) -> StateBlock {
    let map = match direction {
        Direction::Forward => sbox::forward,
        Direction::Inverse => sbox::inverse,
    };
    StateBlock(state.0.map(map))
}

/// Rotates row `r` left by `r` (forward) or right by `r` (inverse).
pub fn shift_rows(state: StateBlock, direction: Direction) -> StateBlock {
    let mut out = StateBlock::zero();
    for row in 0..4 {
        for col in 0..4 {
            let src = match direction {
                Direction::Forward => (col + row) % 4,
                Direction::Inverse => (col + 4 - row) % 4,
            };
            out.set(row, col, state.get(row, src));
        }
    }
    out
}

pub fn mix_column(col: [u8; 4], direction: Direction) -> [u8; 4] {
    let [a0, a1, a2, a3] = col;
    match direction {
        Direction::Forward => {
            // 02·x ^ 03·y = xtime(x) ^ xtime(y) ^ y
            let all = a0 ^ a1 ^ a2 ^ a3;
            [
                a0 ^ all ^ xtime(a0 ^ a1),
                a1 ^ all ^ xtime(a1 ^ a2),
                a2 ^ all ^ xtime(a2 ^ a3),
                a3 ^ all ^ xtime(a3 ^ a0),
            ]
        }
        Direction::Inverse => [
            mul(a0, 0x0e) ^ mul(a1, 0x0b) ^ mul(a2, 0x0d) ^ mul(a3, 0x09),
            mul(a0, 0x09) ^ mul(a1, 0x0e) ^ mul(a2, 0x0b) ^ mul(a3, 0x0d),
            mul(a0, 0x0d) ^ mul(a1, 0x09) ^ mul(a2, 0x0e) ^ mul(a3, 0x0b),
            mul(a0, 0x0b) ^ mul(a1, 0x0d) ^ mul(a2, 0x09) ^ mul(a3, 0x0e),
        ],
    }
}

pub fn mix_columns(state: StateBlock, direction: Direction) -> StateBlock {
    let mut out = state;
    for chunk in out.0.chunks_exact_mut(4) {
        let mixed = mix_column([chunk[0], chunk[1], chunk[2], chunk[3]], direction);
        chunk.copy_from_slice(&mixed);
    }
    out
}

pub fn add_round_key(state: StateBlock, round_key: &[u8; 16]) -> StateBlock {
    let mut out = state;
    for (b, k) in out.0.iter_mut().zip(round_key) {
        *b ^= k;
    }
    out
}
