//! Rendering reports as aligned text tables or CSV.

use std::fmt::Write as _;

use crate::{BenchReport, BenchRow, ReportKind, CONFIGURATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

pub fn emit(report: &BenchReport, format: Format) -> Vec<u8> {
    match format {
        Format::Text => emit_text(report).into_bytes(),
        Format::Csv => emit_csv(report),
    }
}

pub fn emit_text(report: &BenchReport) -> String {
    match report.kind {
        ReportKind::Throughput => throughput_table(&report.rows),
        ReportKind::Comparison => comparison_table(&report.rows),
    }
}

fn throughput_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<24}{:>20}{:>14}{:>14}\n",
        "HBE with different key", "Megabyte processed", "Time taken", "MB/second"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<24}{:>20}{:>14.6}{:>14.3}",
            r.key_bits, r.megabytes, r.seconds, r.mb_per_s
        );
    }
    out
}

const GROUP_TITLES: [&str; 3] = [
    "Encryption without hash function",
    "Encryption with hash function",
    "SAML with HBE",
];

/// Three column groups side by side, one line per key size.
fn comparison_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    for title in GROUP_TITLES {
        let _ = write!(out, "{title:<34}");
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for _ in GROUP_TITLES {
        let _ = write!(out, "{:<10}{:<24}", "Key Size", "Execution time(ms)");
    }
    out.truncate(out.trim_end().len());
    out.push('\n');

    let mut bits: Vec<u32> = rows.iter().map(|r| r.key_bits).collect();
    bits.sort_unstable();
    bits.dedup();
    for b in bits {
        let mut line = String::new();
        for config in CONFIGURATIONS {
            match rows
                .iter()
                .find(|r| r.key_bits == b && r.configuration == config)
            {
                Some(r) => {
                    let _ = write!(line, "{:<10}{:<24.3}", b, r.millis_per_op());
                }
                None => {
                    let _ = write!(line, "{:<10}{:<24}", b, "-");
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn emit_csv(report: &BenchReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record([
        "configuration",
        "key_bits",
        "megabytes",
        "seconds",
        "mb_per_s",
        "operations",
    ])
    .expect("in-memory write");
    for row in &report.rows {
        w.serialize(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<BenchRow>, csv::Error> {
    csv::Reader::from_reader(bytes).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BenchReport {
        BenchReport {
            kind: ReportKind::Throughput,
            rows: vec![
                BenchRow::new("hbe-ctr", 128, 256.0, 2.976, 1),
                BenchRow::new("hbe-ctr", 192, 256.0, 3.196, 1),
                BenchRow::new("hbe-ctr", 256, 256.0, 3.817, 1),
            ],
            machine: "test".into(),
            repetitions: 5,
        }
    }

    #[test]
    fn text_has_header_plus_one_line_per_row() {
        let text = emit_text(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("HBE with different key"));
        assert!(lines[1].contains("2.976000") && lines[1].contains("86.022"));
        assert!(lines[3].starts_with("256"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut r = sample();
        r.rows.clear();
        assert_eq!(emit_text(&r).lines().count(), 1);
        assert_eq!(parse_csv(&emit_csv(&r)).unwrap(), vec![]);
        assert_eq!(String::from_utf8(emit_csv(&r)).unwrap().lines().count(), 1);
        r.kind = ReportKind::Comparison;
        assert_eq!(emit_text(&r).lines().count(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        assert_eq!(parse_csv(&emit_csv(&r)).unwrap(), r.rows);
    }

    #[test]
    fn comparison_layout() {
        let mut rows = Vec::new();
        for (i, c) in CONFIGURATIONS.iter().enumerate() {
            for (j, b) in [128, 192, 256].into_iter().enumerate() {
                rows.push(BenchRow::new(c, b, 1.0, 0.001 * (1 + i + j) as f64, 1));
            }
        }
        let text = emit_text(&BenchReport {
            kind: ReportKind::Comparison,
            rows,
            ..Default::default()
        });
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("Encryption without hash function"));
        assert!(lines[0].ends_with("SAML with HBE"));
        assert_eq!(lines[1].matches("Key Size").count(), 3);
        let cells: Vec<&str> = lines[4].split_whitespace().collect();
        assert_eq!(cells, ["256", "3.000", "256", "4.000", "256", "5.000"]);
    }
}
