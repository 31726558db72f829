//! Big-integer evaluation of the polynomial MAC, straight from the
//! definition: tag = ((Σ c_i · r^(n-i+1)) mod (2^130 - 5) + s) mod 2^128.

use num_bigint::BigUint;

/// Clamp applied to `r` before use.
pub fn clamp(mut r: [u8; 16]) -> [u8; 16] {
    for i in [3, 7, 11, 15] {
        r[i] &= 0x0f;
    }
    for i in [4, 8, 12] {
        r[i] &= 0xfc;
    }
    r
}

pub fn tag(r: [u8; 16], s: [u8; 16], message: &[u8]) -> [u8; 16] {
    let p = (BigUint::from(1u8) << 130u32) - BigUint::from(5u8);
    let r = BigUint::from_bytes_le(&clamp(r));
    let chunks: Vec<BigUint> = message
        .chunks(16)
        .map(|chunk| {
            let mut bytes = chunk.to_vec();
            bytes.push(1);
            BigUint::from_bytes_le(&bytes)
        })
        .collect();
    let n = chunks.len();
    let mut sum = BigUint::from(0u8);
    for (i, c) in chunks.iter().enumerate() {
        // Chunk i (1-based) is multiplied by r^(n - i + 1).
        let power = r.modpow(&BigUint::from((n - i) as u64), &p);
        sum = (sum + c * power) % &p;
    }
    let total = (sum + BigUint::from_bytes_le(&s)) % (BigUint::from(1u8) << 128u32);
    let mut out = total.to_bytes_le();
    out.resize(16, 0);
    out.try_into().expect("16 octets")
}
