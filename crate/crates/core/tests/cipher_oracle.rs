use hbe_core::cipher::{
    decrypt_block, encrypt_block, expand_key, gf, mix_column, mix_columns, shift_rows, sub_bytes,
    CipherKey, Direction, Hbe, KeySize, SBoxTable, StateBlock,
};
use hbe_oracle::gf as school;
use hbe_oracle::reference::{decode_hex, ReferenceCipher, KNOWN_ANSWERS};
use proptest::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn field_multiplication_matches_schoolbook() {
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            assert_eq!(gf::mul(a, b), school::mul(a, b));
        }
    }
}

#[test]
fn sbox_matches_independent_generator() {
    assert_eq!(SBoxTable::get().forward, school::sbox_table());
}

#[test]
fn zero_state_substitution() {
    let out = sub_bytes(StateBlock::zero(), Direction::Forward);
    let expected = school::sbox_table()[0];
    assert!(out.0.iter().all(|&b| b == expected));
}

#[test]
fn mix_matrices_are_inverse() {
    let fwd = school::circulant([2, 3, 1, 1]);
    let inv = school::circulant([0x0e, 0x0b, 0x0d, 0x09]);
    let identity = school::circulant([1, 0, 0, 0]);
    assert_eq!(school::matmul(&fwd, &inv), identity);
    assert_eq!(school::matmul(&inv, &fwd), identity);
}

#[test]
fn mix_columns_exhaustive_single_byte_columns() {
    let fwd = school::circulant([2, 3, 1, 1]);
    let inv = school::circulant([0x0e, 0x0b, 0x0d, 0x09]);
    for pos in 0..4 {
        for v in 0..=255u8 {
            let mut col = [0u8; 4];
            col[pos] = v;
            let mixed = mix_column(col, Direction::Forward);
            assert_eq!(mixed, school::matvec(&fwd, col));
            assert_eq!(mix_column(mixed, Direction::Inverse), col);
            assert_eq!(
                mix_column(col, Direction::Inverse),
                school::matvec(&inv, col)
            );
        }
    }
}

#[test]
fn shift_rows_matches_index_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        let s = StateBlock(bytes);
        let out = shift_rows(s, Direction::Forward);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(out.0[4 * c + r], bytes[4 * ((c + r) % 4) + r]);
            }
        }
        assert_eq!(shift_rows(out, Direction::Inverse), s);
    }
}

#[test]
fn known_answers_match_reference_and_published() {
    for (key, pt, ct) in KNOWN_ANSWERS {
        let key = decode_hex(key);
        let pt: [u8; 16] = decode_hex(pt).try_into().unwrap();
        let ct: [u8; 16] = decode_hex(ct).try_into().unwrap();
        let ks = expand_key(&CipherKey::new(&key).unwrap());
        let out = encrypt_block(StateBlock(pt), &ks);
        assert_eq!(out.0, ReferenceCipher::new(&key).encrypt(&pt));
        assert_eq!(out.0, ct);
        assert_eq!(decrypt_block(StateBlock(ct), &ks).0, pt);
    }
}

#[test]
fn random_blocks_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for size in KeySize::ALL {
        for _ in 0..200 {
            let mut key = vec![0u8; size.key_len()];
            rng.fill_bytes(&mut key);
            let mut pt = [0u8; 16];
            rng.fill_bytes(&mut pt);
            let hbe = Hbe::new(&CipherKey::new(&key).unwrap());
            let reference = ReferenceCipher::new(&key);
            assert_eq!(hbe.encrypt(pt), reference.encrypt(&pt));
            assert_eq!(hbe.decrypt(pt), reference.decrypt(&pt));
        }
    }
}

#[test]
fn single_bit_flip_changes_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut key = [0u8; 16];
    rng.fill_bytes(&mut key);
    let hbe = Hbe::new(&CipherKey::new(&key).unwrap());
    let mut flipped_bits = 0u32;
    let trials = 1000;
    for _ in 0..trials {
        let mut pt = [0u8; 16];
        rng.fill_bytes(&mut pt);
        let bit = rng.random_range(0..128);
        let mut pt2 = pt;
        pt2[bit / 8] ^= 1 << (bit % 8);
        let (a, b) = (hbe.encrypt(pt), hbe.encrypt(pt2));
        assert_ne!(a, b);
        flipped_bits += a
            .iter()
            .zip(b)
            .map(|(x, y)| (x ^ y).count_ones())
            .sum::<u32>();
    }
    let mean = f64::from(flipped_bits) / f64::from(trials);
    assert!((48.0..80.0).contains(&mean), "mean flipped bits {mean}");
}

#[test]
fn wrong_key_never_recovers_plaintext() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (mut k1, mut k2, mut pt) = ([0u8; 16], [0u8; 16], [0u8; 16]);
        rng.fill_bytes(&mut k1);
        rng.fill_bytes(&mut k2);
        rng.fill_bytes(&mut pt);
        let ct = Hbe::new(&CipherKey::new(&k1).unwrap()).encrypt(pt);
        assert_ne!(Hbe::new(&CipherKey::new(&k2).unwrap()).decrypt(ct), pt);
    }
}

fn key_strategy() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        proptest::collection::vec(any::<u8>(), 16),
        proptest::collection::vec(any::<u8>(), 24),
        proptest::collection::vec(any::<u8>(), 32),
    ]
}

proptest! {
    #[test]
    fn stage_inverses(bytes in any::<[u8; 16]>()) {
        let s = StateBlock(bytes);
        prop_assert_eq!(sub_bytes(sub_bytes(s, Direction::Forward), Direction::Inverse), s);
        prop_assert_eq!(shift_rows(shift_rows(s, Direction::Forward), Direction::Inverse), s);
        prop_assert_eq!(mix_columns(mix_columns(s, Direction::Forward), Direction::Inverse), s);
    }

    #[test]
    fn matrix_round_trip(bytes in any::<[u8; 16]>()) {
        let s = StateBlock(bytes);
        prop_assert_eq!(StateBlock::from_matrix(&s.to_matrix()), s);
    }

    #[test]
    fn encrypt_decrypt_identity(key in key_strategy(), pt in any::<[u8; 16]>()) {
        let ks = expand_key(&CipherKey::new(&key).unwrap());
        prop_assert_eq!(ks.words().len(), 4 * (ks.rounds() + 1));
        let ct = encrypt_block(StateBlock(pt), &ks);
        prop_assert_eq!(decrypt_block(ct, &ks), StateBlock(pt));
        prop_assert_eq!(encrypt_block(decrypt_block(StateBlock(pt), &ks), &ks), StateBlock(pt));
    }
}
