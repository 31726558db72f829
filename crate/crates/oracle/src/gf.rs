//! Schoolbook GF(2^8) arithmetic: carry-less polynomial product, then
//! explicit long-division reduction by x^8 + x^4 + x^3 + x + 1.

pub const MODULUS: u16 = 0x11b;

pub fn clmul(a: u8, b: u8) -> u16 {
    let mut product = 0u16;
    for bit in 0..8 {
        if (b >> bit) & 1 == 1 {
            product ^= (a as u16) << bit;
        }
    }
    product
}

pub fn reduce(mut p: u16) -> u8 {
    for degree in (8..16).rev() {
        if (p >> degree) & 1 == 1 {
            p ^= MODULUS << (degree - 8);
        }
    }
    p as u8
}

pub fn mul(a: u8, b: u8) -> u8 {
    reduce(clmul(a, b))
}

/// Inverse by exhaustive search; 0 maps to 0.
pub fn inv(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    (1..=255u8)
        .find(|&b| mul(a, b) == 1)
        .expect("field element has an inverse")
}

/// Bitwise affine transform: b'_i = b_i ⊕ b_(i+4) ⊕ b_(i+5) ⊕ b_(i+6) ⊕ b_(i+7) ⊕ c_i.
pub fn affine(b: u8) -> u8 {
    let c = 0x63u8;
    let bit = |x: u8, i: usize| (x >> (i % 8)) & 1;
    let mut out = 0u8;
    for i in 0..8 {
        let v =
            bit(b, i) ^ bit(b, i + 4) ^ bit(b, i + 5) ^ bit(b, i + 6) ^ bit(b, i + 7) ^ bit(c, i);
        out |= v << i;
    }
    out
}

pub fn sbox_table() -> [u8; 256] {
    let mut t = [0u8; 256];
    for (x, slot) in t.iter_mut().enumerate() {
        *slot = affine(inv(x as u8));
    }
    t
}

/// Row-by-column product of two 4×4 matrices over GF(2^8).
pub fn matmul(a: &[[u8; 4]; 4], b: &[[u8; 4]; 4]) -> [[u8; 4]; 4] {
    let mut out = [[0u8; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).fold(0, |acc, k| acc ^ mul(a[i][k], b[k][j]));
        }
    }
    out
}

pub fn circulant(row: [u8; 4]) -> [[u8; 4]; 4] {
    let mut m = [[0u8; 4]; 4];
    for (i, line) in m.iter_mut().enumerate() {
        for (j, cell) in line.iter_mut().enumerate() {
            *cell = row[(j + 4 - i) % 4];
        }
    }
    m
}

pub fn matvec(m: &[[u8; 4]; 4], v: [u8; 4]) -> [u8; 4] {
    let mut out = [0u8; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).fold(0, |acc, k| acc ^ mul(m[i][k], v[k]));
    }
    out
}
