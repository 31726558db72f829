//! One-time polynomial-evaluation MAC over GF(2^130 - 5).
//!
//! The message is cut into 16-octet chunks; each chunk gets a 0x01 octet
//! appended before it is read as a little-endian integer. The accumulator
//! is evaluated at the clamped point `r` and masked by adding `s` mod 2^128.
//! A key must never authenticate two different messages.

use std::fmt;

use subtle::ConstantTimeEq;

pub const MAC_KEY_LEN: usize = 32;
pub const TAG_LEN: usize = 16;

const LIMB_MASK: u32 = 0x3ff_ffff;

/// Clears the bits that must be zero in the evaluation point.
pub fn clamp(r: &mut [u8; 16]) {
    for i in [3, 7, 11, 15] {
        r[i] &= 0x0f;
    }
    for i in [4, 8, 12] {
        r[i] &= 0xfc;
    }
}

/// Evaluation point `r` (clamped) and additive mask `s`.
#[derive(Clone, PartialEq, Eq)]
pub struct MacKey {
    r: [u8; 16],
    s: [u8; 16],
}

impl MacKey {
    /// Builds a key, clamping `r`.
    pub fn new(mut r: [u8; 16], s: [u8; 16]) -> Self {
        clamp(&mut r);
        Self { r, s }
    }

    pub fn from_bytes(key: &[u8; MAC_KEY_LEN]) -> Self {
        let mut r = [0u8; 16];
        let mut s = [0u8; 16];
        r.copy_from_slice(&key[..16]);
        s.copy_from_slice(&key[16..]);
        Self::new(r, s)
    }

    pub fn r(&self) -> &[u8; 16] {
        &self.r
    }

    pub fn s(&self) -> &[u8; 16] {
        &self.s
    }
}

impl fmt::Debug for MacKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MacKey(..)")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacTag(pub [u8; TAG_LEN]);

impl MacTag {
    pub fn as_bytes(&self) -> &[u8; TAG_LEN] {
        &self.0
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        bytes.try_into().ok().map(Self)
    }
}

impl fmt::Debug for MacTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacTag({})", hex::encode(self.0))
    }
}

impl ConstantTimeEq for MacTag {
    fn ct_eq(&self, other: &Self) -> subtle::Choice {
        self.0.ct_eq(&other.0)
    }
}

#[inline]
fn le32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Radix-2^26 accumulator.
struct PolyState {
    r: [u32; 5],
    h: [u32; 5],
}

impl PolyState {
    fn new(r: &[u8; 16]) -> Self {
        Self {
            r: [
                le32(&r[0..]) & LIMB_MASK,
                (le32(&r[3..]) >> 2) & LIMB_MASK,
                (le32(&r[6..]) >> 4) & LIMB_MASK,
                (le32(&r[9..]) >> 6) & LIMB_MASK,
                le32(&r[12..]) >> 8,
            ],
            h: [0; 5],
        }
    }

    /// h = (h + chunk) · r mod p. `high_bit` is the 2^128 term for full
    /// chunks; short chunks carry their 0x01 inside `block` instead.
    fn absorb(&mut self, block: &[u8; 16], high_bit: u32) {
        let [r0, r1, r2, r3, r4] = self.r.map(u64::from);
        let (s1, s2, s3, s4) = (r1 * 5, r2 * 5, r3 * 5, r4 * 5);

        let h = &mut self.h;
        h[0] += le32(&block[0..]) & LIMB_MASK;
        h[1] += (le32(&block[3..]) >> 2) & LIMB_MASK;
        h[2] += (le32(&block[6..]) >> 4) & LIMB_MASK;
        h[3] += (le32(&block[9..]) >> 6) & LIMB_MASK;
        h[4] += (le32(&block[12..]) >> 8) | high_bit;

        let [h0, h1, h2, h3, h4] = h.map(u64::from);
        let d0 = h0 * r0 + h1 * s4 + h2 * s3 + h3 * s2 + h4 * s1;
        let mut d1 = h0 * r1 + h1 * r0 + h2 * s4 + h3 * s3 + h4 * s2;
        let mut d2 = h0 * r2 + h1 * r1 + h2 * r0 + h3 * s4 + h4 * s3;
        let mut d3 = h0 * r3 + h1 * r2 + h2 * r1 + h3 * r0 + h4 * s4;
        let mut d4 = h0 * r4 + h1 * r3 + h2 * r2 + h3 * r1 + h4 * r0;

        let mask = u64::from(LIMB_MASK);
        d1 += d0 >> 26;
        d2 += d1 >> 26;
        d3 += d2 >> 26;
        d4 += d3 >> 26;
        let mut c = d4 >> 26;
        let mut t0 = (d0 & mask) + c * 5;
        c = t0 >> 26;
        t0 &= mask;
        h[0] = t0 as u32;
        h[1] = ((d1 & mask) + c) as u32;
        h[2] = (d2 & mask) as u32;
        h[3] = (d3 & mask) as u32;
        h[4] = (d4 & mask) as u32;
    }

    fn finish(mut self, s: &[u8; 16]) -> [u8; 16] {
        let h = &mut self.h;
        // Full carry.
        let mut c = h[1] >> 26;
        h[1] &= LIMB_MASK;
        for i in 2..5 {
            h[i] += c;
            c = h[i] >> 26;
            h[i] &= LIMB_MASK;
        }
        h[0] += c * 5;
        c = h[0] >> 26;
        h[0] &= LIMB_MASK;
        h[1] += c;

        // g = h + 5 - 2^130; keep g if it did not underflow.
        let mut g = [0u32; 5];
        g[0] = h[0].wrapping_add(5);
        c = g[0] >> 26;
        g[0] &= LIMB_MASK;
        for i in 1..4 {
            g[i] = h[i].wrapping_add(c);
            c = g[i] >> 26;
            g[i] &= LIMB_MASK;
        }
        g[4] = h[4].wrapping_add(c).wrapping_sub(1 << 26);

        let select_g = (g[4] >> 31).wrapping_sub(1);
        for i in 0..5 {
            h[i] = (h[i] & !select_g) | (g[i] & select_g);
        }

        let words = [
            h[0] | (h[1] << 26),
            (h[1] >> 6) | (h[2] << 20),
            (h[2] >> 12) | (h[3] << 14),
            (h[3] >> 18) | (h[4] << 8),
        ];
        let mut out = [0u8; 16];
        let mut carry = 0u64;
        for (i, w) in words.iter().enumerate() {
            let f = u64::from(*w) + u64::from(le32(&s[4 * i..])) + carry;
            out[4 * i..4 * i + 4].copy_from_slice(&(f as u32).to_le_bytes());
            carry = f >> 32;
        }
        out
    }
}

pub fn mac_compute(key: &MacKey, message: &[u8]) -> MacTag {
    let mut state = PolyState::new(&key.r);
    let mut chunks = message.chunks_exact(16);
    for chunk in &mut chunks {
        let block: &[u8; 16] = chunk.try_into().expect("exact chunk");
        state.absorb(block, 1 << 24);
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut block = [0u8; 16];
        block[..rest.len()].copy_from_slice(rest);
        block[rest.len()] = 1;
        state.absorb(&block, 0);
    }
    MacTag(state.finish(&key.s))
}

/// Recomputes and compares in constant time.
pub fn mac_verify(key: &MacKey, message: &[u8], tag: &MacTag) -> bool {
    bool::from(mac_compute(key, message).ct_eq(tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_masks_expected_bits() {
        let key = MacKey::new([0xff; 16], [0; 16]);
        for (i, &b) in key.r().iter().enumerate() {
            let expected = match i {
                3 | 7 | 11 | 15 => 0x0f,
                4 | 8 | 12 => 0xfc,
                _ => 0xff,
            };
            assert_eq!(b, expected, "octet {i}");
        }
    }

    #[test]
    fn zero_point_yields_mask() {
        let s = [0x5a; 16];
        let key = MacKey::new([0; 16], s);
        assert_eq!(mac_compute(&key, b"anything at all, of any length...").0, s);
    }

    #[test]
    fn empty_message_yields_mask() {
        let s: [u8; 16] = core::array::from_fn(|i| i as u8);
        let key = MacKey::new([0x77; 16], s);
        assert_eq!(mac_compute(&key, b"").0, s);
    }

    #[test]
    fn published_vector() {
        let key = hex::decode("85d6be7857556d337f4452fe42d506a80103808afb0db2fd4abff6af4149f51b")
            .unwrap();
        let key = MacKey::from_bytes(key.as_slice().try_into().unwrap());
        let tag = mac_compute(&key, b"Cryptographic Forum Research Group");
        assert_eq!(hex::encode(tag.0), "a8061dc1305136c6c22b8baf0c0127a9");
    }

    #[test]
    fn verify_round_trip_and_tag_flip() {
        let key = MacKey::new([3; 16], [4; 16]);
        let msg = b"transfer session key";
        let tag = mac_compute(&key, msg);
        assert!(mac_verify(&key, msg, &tag));
        for bit in 0..128 {
            let mut bad = tag;
            bad.0[bit / 8] ^= 1 << (bit % 8);
            assert!(!mac_verify(&key, msg, &bad));
        }
    }

    #[test]
    fn padding_delimits_length() {
        let key = MacKey::new([0x11; 16], [0x22; 16]);
        // Without the 0x01 delimiter these would embed to the same chunk.
        let a = mac_compute(&key, &[0xab]);
        let b = mac_compute(&key, &[0xab, 0x00]);
        let c = mac_compute(&key, &[0xab, 0x01]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }
}
