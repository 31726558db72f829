use std::fmt;

use super::sbox;
use super::CipherError;

/// Supported key lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeySize {
    Bits128,
    Bits192,
    Bits256,
}

impl KeySize {
    pub const ALL: [KeySize; 3] = [KeySize::Bits128, KeySize::Bits192, KeySize::Bits256];

    pub fn from_bits(bits: u32) -> Result<Self, CipherError> {
        match bits {
            128 => Ok(Self::Bits128),
            192 => Ok(Self::Bits192),
            256 => Ok(Self::Bits256),
            other => Err(CipherError::UnsupportedKeySize(other)),
        }
    }

    pub const fn bits(self) -> u32 {
        match self {
            Self::Bits128 => 128,
            Self::Bits192 => 192,
            Self::Bits256 => 256,
        }
    }

    pub const fn key_len(self) -> usize {
        self.bits() as usize / 8
    }

    /// Key length in 32-bit words.
    pub const fn key_words(self) -> usize {
        self.key_len() / 4
    }

    pub const fn rounds(self) -> usize {
        match self {
            Self::Bits128 => 10,
            Self::Bits192 => 12,
            Self::Bits256 => 14,
        }
    }

    /// Total words in the expanded schedule.
    pub const fn schedule_words(self) -> usize {
        4 * (self.rounds() + 1)
    }
}

impl fmt::Display for KeySize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// Raw key material of one of the three supported lengths.
#[derive(Clone, PartialEq, Eq)]
pub struct CipherKey {
    material: Vec<u8>,
    size: KeySize,
}

impl CipherKey {
    pub fn new(material: &[u8]) -> Result<Self, CipherError> {
        let size = match material.len() {
            16 => KeySize::Bits128,
            24 => KeySize::Bits192,
            32 => KeySize::Bits256,
            n => return Err(CipherError::InvalidKeyLength(n)),
        };
        Ok(Self {
            material: material.to_vec(),
            size,
        })
    }

    pub fn size(&self) -> KeySize {
        self.size
    }

    pub fn material(&self) -> &[u8] {
        &self.material
    }
}

impl fmt::Debug for CipherKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CipherKey({}-bit, ..)", self.size.bits())
    }
}

/// Expanded round keys as big-endian 32-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct KeySchedule {
    words: Vec<u32>,
    rounds: usize,
}

impl fmt::Debug for KeySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeySchedule")
            .field("rounds", &self.rounds)
            .field("words", &self.words.len())
            .finish()
    }
}

fn sub_word(w: u32) -> u32 {
    u32::from_be_bytes(w.to_be_bytes().map(sbox::forward))
}

/// Expands `key` into `4 × (rounds + 1)` words.
pub fn expand_key(key: &CipherKey) -> KeySchedule {
    let size = key.size();
    let nk = size.key_words();
    let total = size.schedule_words();
    let mut words = Vec::with_capacity(total);
    for chunk in key.material().chunks_exact(4) {
        words.push(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    let mut rcon = 0x01u8;
    for i in nk..total {
        let mut temp = words[i - 1];
        if i % nk == 0 {
            temp = sub_word(temp.rotate_left(8)) ^ (u32::from(rcon) << 24);
            rcon = super::gf::xtime(rcon);
        } else if nk > 6 && i % nk == 4 {
            temp = sub_word(temp);
        }
        words.push(words[i - nk] ^ temp);
    }
    KeySchedule {
        words,
        rounds: size.rounds(),
    }
}

impl KeySchedule {
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Round key `round` (0..=rounds) as 16 octets.
    pub fn round_key(&self, round: usize) -> [u8; 16] {
        let mut out = [0u8; 16];
        for (j, w) in self.words[4 * round..4 * round + 4].iter().enumerate() {
            out[4 * j..4 * j + 4].copy_from_slice(&w.to_be_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lengths() {
        for (len, words, rounds) in [(16, 44, 10), (24, 52, 12), (32, 60, 14)] {
            let ks = expand_key(&CipherKey::new(&vec![0xa5; len]).unwrap());
            assert_eq!(ks.words().len(), words);
            assert_eq!(ks.rounds(), rounds);
        }
    }

    #[test]
    fn schedule_prefix_is_key() {
        let key: Vec<u8> = (0..32u8).collect();
        for len in [16, 24, 32] {
            let ks = expand_key(&CipherKey::new(&key[..len]).unwrap());
            let prefix: Vec<u8> = ks.words()[..len / 4]
                .iter()
                .flat_map(|w| w.to_be_bytes())
                .collect();
            assert_eq!(prefix, &key[..len]);
        }
    }

    #[test]
    fn last_word_of_known_128_bit_schedule() {
        // Key 2b7e1516 28aed2a6 abf71588 09cf4f3c expands to w[43] = b6630ca6.
        let key = hex::decode("2b7e151628aed2a6abf7158809cf4f3c").unwrap();
        let ks = expand_key(&CipherKey::new(&key).unwrap());
        assert_eq!(ks.words()[4], 0xa0fafe17);
        assert_eq!(ks.words()[43], 0xb6630ca6);
    }

    #[test]
    fn rejects_bad_lengths() {
        for n in [0, 1, 15, 17, 20, 31, 33, 64] {
            assert_eq!(
                CipherKey::new(&vec![0; n]).unwrap_err(),
                CipherError::InvalidKeyLength(n)
            );
        }
    }

    #[test]
    fn key_size_from_bits() {
        assert_eq!(KeySize::from_bits(192).unwrap(), KeySize::Bits192);
        assert!(KeySize::from_bits(512).is_err());
    }
}
