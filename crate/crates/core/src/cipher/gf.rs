//! Arithmetic in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.

/// Low byte of the reducing polynomial (the x^8 term is implicit).
pub const REDUCTION: u8 = 0x1b;

/// Multiply by x.
#[inline]
pub const fn xtime(a: u8) -> u8 {
    (a << 1) ^ if a & 0x80 != 0 { REDUCTION } else { 0 }
}

/// Field multiplication (shift-and-add).
#[inline]
pub const fn mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    acc
}

/// Multiplicative inverse, with 0 mapped to 0.
///
/// Computed as a^254, since the multiplicative group has order 255.
pub const fn inv(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    let mut result = 1u8;
    let mut base = a;
    let mut exp = 254u8;
    while exp != 0 {
        if exp & 1 != 0 {
            result = mul(result, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_products() {
        // Worked example from the field's standard literature: {57}·{83} = {c1}.
        assert_eq!(mul(0x57, 0x83), 0xc1);
        assert_eq!(mul(0x57, 0x13), 0xfe);
        assert_eq!(xtime(0x80), 0x1b);
    }

    #[test]
    fn inverse_is_inverse() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1, "a = {a:#04x}");
        }
        assert_eq!(inv(0), 0);
    }

    #[test]
    fn multiplication_commutes() {
        for a in 0..=255u8 {
            for b in [0u8, 1, 2, 3, 0x0e, 0x53, 0xff] {
                assert_eq!(mul(a, b), mul(b, a));
            }
        }
    }
}
