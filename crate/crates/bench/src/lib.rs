//! Desk-scale timing harness.
//!
//! `throughput` runs counter-mode encryption over a random buffer.
//! `comparison` times three pipelines on one payload: raw block
//! encryption, sealing (encrypt-then-MAC) and full encrypted-assertion
//! issuance. Every figure is the median of several repetitions.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use hbe_core::cipher::{CipherKey, Hbe, KeySize};
use hbe_core::kex::{apply_keystream, open, random_nonce, seal, SealingKey};
use hbe_core::saml::{build_assertion, decrypt_validate, encrypt_assertion};
use hbe_core::Timestamp;

pub mod table;

pub use table::{emit, emit_csv, emit_text, parse_csv, Format};

/// 1 MB = 2^20 octets throughout.
pub const MEGABYTE: usize = 1 << 20;
pub const DEFAULT_MEGABYTES: usize = 64;
pub const DEFAULT_REPS: usize = 5;
pub const MIN_REPS: usize = 3;
pub const DEFAULT_PAYLOAD_BYTES: usize = 1024;
pub const DEFAULT_OPERATIONS: u64 = 200;

pub const CIPHER_ONLY: &str = "cipher-only";
pub const CIPHER_MAC: &str = "cipher+mac";
pub const SAML_HBE: &str = "saml+hbe";
pub const CONFIGURATIONS: [&str; 3] = [CIPHER_ONLY, CIPHER_MAC, SAML_HBE];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("megabytes must be at least 1")]
    TooSmall,
    #[error("at least {MIN_REPS} repetitions are required, got {0}")]
    TooFewReps(usize),
    #[error("payload must be at least one octet")]
    EmptyPayload,
    #[error("operations must be at least 1")]
    NoOperations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub configuration: String,
    pub key_bits: u32,
    pub megabytes: f64,
    /// Median wall time, rounded to microseconds.
    pub seconds: f64,
    /// `megabytes / seconds`, rounded to 3 decimals.
    pub mb_per_s: f64,
    /// Operations timed per repetition (1 for throughput rows).
    pub operations: u64,
}

impl BenchRow {
    pub fn new(
        configuration: &str,
        key_bits: u32,
        megabytes: f64,
        seconds: f64,
        operations: u64,
    ) -> Self {
        let seconds = round_to(seconds, 6).max(1e-6);
        Self {
            configuration: configuration.to_owned(),
            key_bits,
            megabytes,
            seconds,
            mb_per_s: round_to(megabytes / seconds, 3),
            operations,
        }
    }

    /// Milliseconds per operation.
    pub fn millis_per_op(&self) -> f64 {
        self.seconds * 1000.0 / self.operations as f64
    }

    pub fn is_consistent(&self) -> bool {
        round_to(self.megabytes / self.seconds, 3) == self.mb_per_s
    }
}

/// Which table layout a report renders as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportKind {
    #[default]
    Throughput,
    Comparison,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub kind: ReportKind,
    pub rows: Vec<BenchRow>,
    pub machine: String,
    pub repetitions: usize,
}

impl BenchReport {
    /// For each configuration, whether median time is non-decreasing in
    /// key size. Advisory only: scheduler noise can flip close pairs.
    pub fn monotonicity(&self) -> Vec<(String, bool)> {
        let mut labels: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !labels.contains(&r.configuration.as_str()) {
                labels.push(&r.configuration);
            }
        }
        labels
            .into_iter()
            .map(|label| {
                let mut rows: Vec<&BenchRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.configuration == label)
                    .collect();
                rows.sort_by_key(|r| r.key_bits);
                let ok = rows.windows(2).all(|w| w[0].seconds <= w[1].seconds);
                (label.to_owned(), ok)
            })
            .collect()
    }
}

pub fn round_to(x: f64, decimals: i32) -> f64 {
    let m = 10f64.powi(decimals);
    (x * m).round() / m
}

/// Median; the mean of the middle pair for even lengths.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of nothing");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn machine_descriptor() -> String {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{}-{} ({threads} hardware threads)",
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

fn time_reps(reps: usize, mut f: impl FnMut()) -> f64 {
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    median(&samples)
}

fn random_key(size: KeySize, rng: &mut ChaCha20Rng) -> Vec<u8> {
    let mut k = vec![0u8; size.key_len()];
    rng.fill_bytes(&mut k);
    k
}

/// Counter-mode encryption of `megabytes` MB of random data. With
/// `round_trip` each repetition also decrypts.
pub fn bench_throughput(
    size: KeySize,
    megabytes: usize,
    reps: usize,
    round_trip: bool,
    seed: u64,
) -> Result<BenchRow, BenchError> {
    if megabytes < 1 {
        return Err(BenchError::TooSmall);
    }
    if reps < MIN_REPS {
        return Err(BenchError::TooFewReps(reps));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = CipherKey::new(&random_key(size, &mut rng)).expect("length from KeySize");
    let cipher = Hbe::new(&key);
    let nonce = random_nonce(&mut rng);
    let mut buf = vec![0u8; megabytes * MEGABYTE];
    rng.fill_bytes(&mut buf);
    let secs = time_reps(reps, || {
        apply_keystream(&cipher, &nonce, &mut buf);
        if round_trip {
            apply_keystream(&cipher, &nonce, &mut buf);
        }
    });
    Ok(BenchRow::new(
        "hbe-ctr",
        size.bits(),
        megabytes as f64,
        secs,
        1,
    ))
}

pub fn throughput_report(
    sizes: &[KeySize],
    megabytes: usize,
    reps: usize,
    round_trip: bool,
    seed: u64,
) -> Result<BenchReport, BenchError> {
    let rows = sizes
        .iter()
        .map(|&s| bench_throughput(s, megabytes, reps, round_trip, seed))
        .collect::<Result<_, _>>()?;
    Ok(BenchReport {
        kind: ReportKind::Throughput,
        rows,
        machine: machine_descriptor(),
        repetitions: reps,
    })
}

/// One timed pipeline for one key size. Each repetition performs
/// `operations` runs over a payload of `payload_bytes`.
pub fn bench_pipeline(
    configuration: &str,
    size: KeySize,
    payload_bytes: usize,
    operations: u64,
    reps: usize,
    round_trip: bool,
    seed: u64,
) -> Result<BenchRow, BenchError> {
    if payload_bytes == 0 {
        return Err(BenchError::EmptyPayload);
    }
    if operations == 0 {
        return Err(BenchError::NoOperations);
    }
    if reps < MIN_REPS {
        return Err(BenchError::TooFewReps(reps));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let material = random_key(size, &mut rng);
    let mut payload = vec![0u8; payload_bytes];
    rng.fill_bytes(&mut payload);
    let now = Timestamp(1_700_000_000);

    let secs = match configuration {
        CIPHER_ONLY => {
            let cipher = Hbe::new(&CipherKey::new(&material).expect("length from KeySize"));
            let mut data = payload.clone();
            data.resize(payload_bytes.div_ceil(16) * 16, 0);
            time_reps(reps, || {
                for _ in 0..operations {
                    for block in data.chunks_exact_mut(16) {
                        let b: [u8; 16] = (&*block).try_into().expect("16-octet chunk");
                        let c = cipher.encrypt(b);
                        let out = if round_trip { cipher.decrypt(c) } else { c };
                        block.copy_from_slice(&out);
                    }
                }
            })
        }
        CIPHER_MAC => {
            let key = SealingKey::new("bench", &material).expect("length from KeySize");
            time_reps(reps, || {
                for _ in 0..operations {
                    let sealed = seal(&key, random_nonce(&mut rng), &payload, b"");
                    if round_trip {
                        open(&key, &sealed, b"").expect("fresh seal opens");
                    }
                    std::hint::black_box(sealed);
                }
            })
        }
        SAML_HBE => {
            let key = SealingKey::new("bench", &material).expect("length from KeySize");
            // The payload rides in the subject so all pipelines carry the
            // same amount of caller data.
            let subject: String = payload.iter().map(|b| char::from(b'a' + b % 26)).collect();
            time_reps(reps, || {
                for _ in 0..operations {
                    let a = build_assertion("idp", &subject, "sp", now, 120, &mut rng)
                        .expect("positive lifetime");
                    let ea = encrypt_assertion(&a, &key, &mut rng);
                    if round_trip {
                        decrypt_validate(&ea, &key, now, 0, "sp").expect("fresh assertion opens");
                    }
                    std::hint::black_box(ea);
                }
            })
        }
        other => panic!("unknown configuration {other}"),
    };
    let megabytes = (payload_bytes as u64 * operations) as f64 / MEGABYTE as f64;
    Ok(BenchRow::new(
        configuration,
        size.bits(),
        megabytes,
        secs,
        operations,
    ))
}

/// All three pipelines across all three key sizes, grouped by pipeline.
pub fn bench_comparison(
    payload_bytes: usize,
    operations: u64,
    reps: usize,
    round_trip: bool,
    seed: u64,
) -> Result<BenchReport, BenchError> {
    let mut rows = Vec::with_capacity(9);
    for configuration in CONFIGURATIONS {
        for size in KeySize::ALL {
            rows.push(bench_pipeline(
                configuration,
                size,
                payload_bytes,
                operations,
                reps,
                round_trip,
                seed,
            )?);
        }
    }
    Ok(BenchReport {
        kind: ReportKind::Comparison,
        rows,
        machine: machine_descriptor(),
        repetitions: reps,
    })
}
