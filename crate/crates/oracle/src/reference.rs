//! Straight-line reference for the 128-bit-block cipher, written against a
//! row/column matrix state. Validated against the published known-answer
//! vectors in this crate's tests.

use crate::gf;

type State = [[u8; 4]; 4]; // state[row][col]

pub struct ReferenceCipher {
    sbox: [u8; 256],
    inv_sbox: [u8; 256],
    round_keys: Vec<State>,
    rounds: usize,
}

fn load(block: &[u8; 16]) -> State {
    let mut s = [[0u8; 4]; 4];
    for c in 0..4 {
        for r in 0..4 {
            s[r][c] = block[4 * c + r];
        }
    }
    s
}

fn store(s: &State) -> [u8; 16] {
    let mut out = [0u8; 16];
    for c in 0..4 {
        for r in 0..4 {
            out[4 * c + r] = s[r][c];
        }
    }
    out
}

impl ReferenceCipher {
    /// Panics on key lengths other than 16, 24 or 32.
    pub fn new(key: &[u8]) -> Self {
        let nk = key.len() / 4;
        assert!(matches!(key.len(), 16 | 24 | 32), "bad key length");
        let rounds = nk + 6;
        let sbox = gf::sbox_table();
        let mut inv_sbox = [0u8; 256];
        for (x, &y) in sbox.iter().enumerate() {
            inv_sbox[y as usize] = x as u8;
        }

        // Byte-oriented schedule: w[i] is a 4-byte column.
        let total = 4 * (rounds + 1);
        let mut w: Vec<[u8; 4]> = key.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        let mut rcon = 1u8;
        while w.len() < total {
            let i = w.len();
            let mut t = w[i - 1];
            if i % nk == 0 {
                t = [t[1], t[2], t[3], t[0]];
                for b in t.iter_mut() {
                    *b = sbox[*b as usize];
                }
                t[0] ^= rcon;
                rcon = gf::mul(rcon, 2);
            } else if nk == 8 && i % nk == 4 {
                for b in t.iter_mut() {
                    *b = sbox[*b as usize];
                }
            }
            let prev = w[i - nk];
            w.push([
                prev[0] ^ t[0],
                prev[1] ^ t[1],
                prev[2] ^ t[2],
                prev[3] ^ t[3],
            ]);
        }
        let round_keys = (0..=rounds)
            .map(|r| {
                let mut k = [[0u8; 4]; 4];
                for c in 0..4 {
                    for row in 0..4 {
                        k[row][c] = w[4 * r + c][row];
                    }
                }
                k
            })
            .collect();
        Self {
            sbox,
            inv_sbox,
            round_keys,
            rounds,
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn xor_key(s: &mut State, k: &State) {
        for r in 0..4 {
            for c in 0..4 {
                s[r][c] ^= k[r][c];
            }
        }
    }

    fn mix(s: &mut State, row: [u8; 4]) {
        let m = gf::circulant(row);
        for c in 0..4 {
            let col = gf::matvec(&m, [s[0][c], s[1][c], s[2][c], s[3][c]]);
            for r in 0..4 {
                s[r][c] = col[r];
            }
        }
    }

    pub fn encrypt(&self, block: &[u8; 16]) -> [u8; 16] {
        let mut s = load(block);
        Self::xor_key(&mut s, &self.round_keys[0]);
        for round in 1..=self.rounds {
            for row in s.iter_mut() {
                for b in row.iter_mut() {
                    *b = self.sbox[*b as usize];
                }
            }
            for (r, row) in s.iter_mut().enumerate() {
                row.rotate_left(r);
            }
            if round != self.rounds {
                Self::mix(&mut s, [2, 3, 1, 1]);
            }
            Self::xor_key(&mut s, &self.round_keys[round]);
        }
        store(&s)
    }

    pub fn decrypt(&self, block: &[u8; 16]) -> [u8; 16] {
        let mut s = load(block);
        for round in (1..=self.rounds).rev() {
            Self::xor_key(&mut s, &self.round_keys[round]);
            if round != self.rounds {
                Self::mix(&mut s, [0x0e, 0x0b, 0x0d, 0x09]);
            }
            for (r, row) in s.iter_mut().enumerate() {
                row.rotate_right(r);
            }
            for row in s.iter_mut() {
                for b in row.iter_mut() {
                    *b = self.inv_sbox[*b as usize];
                }
            }
        }
        Self::xor_key(&mut s, &self.round_keys[0]);
        store(&s)
    }
}

/// Published known-answer vectors: (key hex, plaintext hex, ciphertext hex).
pub const KNOWN_ANSWERS: &[(&str, &str, &str)] = &[
    (
        "000102030405060708090a0b0c0d0e0f",
        "00112233445566778899aabbccddeeff",
        "69c4e0d86a7b0430d8cdb78070b4c55a",
    ),
    (
        "000102030405060708090a0b0c0d0e0f1011121314151617",
        "00112233445566778899aabbccddeeff",
        "dda97ca4864cdfe06eaf70a0ec0d7191",
    ),
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "00112233445566778899aabbccddeeff",
        "8ea2b7ca516745bfeafc49904b496089",
    ),
    (
        "2b7e151628aed2a6abf7158809cf4f3c",
        "3243f6a8885a308d313198a2e0370734",
        "3925841d02dc09fbdc118597196a0b32",
    ),
    (
        "00000000000000000000000000000000",
        "00000000000000000000000000000000",
        "66e94bd4ef8a2c3b884cfa59ca342b2e",
    ),
];

pub fn decode_hex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).expect("hex"))
        .collect()
}
