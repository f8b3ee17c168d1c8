use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sourcecount::report::{read_stats_csv, ErrorRateReport, StatsRow, SWEEP_HEADER};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sourcecount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// `detector=… k_hat=… selected_index=…`, dropping the float trace.
fn estimate_summary(text: &str) -> String {
    text.lines()
        .map(|l| l.split(" trace=").next().unwrap())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn estimate_matches_golden_fixture() {
    let out = bin(&[
        "estimate",
        "--elements",
        "8",
        "--samples",
        "1024",
        "--sources",
        "2",
        "--snr",
        "0",
        "--seed",
        "7",
    ]);
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/estimate_m8_k2_snr0_seed7.txt"),
    )
    .unwrap();
    assert_eq!(estimate_summary(&stdout(&out)), golden.trim_end());
}

#[test]
fn estimate_is_reproducible_for_a_seed() {
    let args = [
        "estimate",
        "--snr",
        "-5",
        "--seed",
        "99",
        "--detectors",
        "all",
        "--rho",
        "1",
        "--signal-power",
        "1",
    ];
    assert_eq!(stdout(&bin(&args)), stdout(&bin(&args)));
    let other = ["estimate", "--snr", "-5", "--seed", "100"];
    assert_ne!(stdout(&bin(&args[..5])), stdout(&bin(&other)));
}

#[test]
fn noiseless_three_sources_found_by_moving_increment() {
    let text = stdout(&bin(&[
        "estimate",
        "--sources",
        "3",
        "--snr",
        "inf",
        "--detectors",
        "mi,ms",
    ]));
    assert!(
        text.contains("detector=moving_increment k_hat=3 "),
        "{text}"
    );
    assert!(text.contains("detector=moving_std k_hat=3 "), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["estimate", "--sources", "8"]).status.code(), Some(1));
    assert_eq!(bin(&["sweep", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(
        bin(&["sweep", "--axis", "sources", "--values", "0", "--trials", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bin(&["estimate", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["estimate", "--snr", "nan"]).status.code(), Some(1));
    let out = bin(&["estimate", "--out", "/nonexistent-dir/x/out.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/x/out.txt"));
}

#[test]
fn sweep_writes_readable_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let text = stdout(&bin(&[
        "sweep",
        "--snr",
        "-10:0:5",
        "--trials",
        "40",
        "--samples",
        "256",
        "--out",
        path.to_str().unwrap(),
    ]));
    assert!(text.is_empty());
    let raw = fs::read_to_string(&path).unwrap();
    assert_eq!(raw.lines().next().unwrap(), SWEEP_HEADER.join(","));
    let report = ErrorRateReport::read_csv(raw.as_bytes()).unwrap();
    assert_eq!(report.rows.len(), 4 * 3);
    assert!(report.rows.iter().all(|r| r.trials == 40));
    let mut again = Vec::new();
    report.write_csv(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), raw);
}

fn stats(snr: f64, seed: u64) -> Vec<StatsRow> {
    let out = bin(&[
        "stats",
        "--snr",
        &snr.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    read_stats_csv(stdout(&out).as_bytes()).unwrap()
}

fn argmax_delta_corr(rows: &[StatsRow]) -> usize {
    rows.iter()
        .filter_map(|r| r.delta_corr.map(|d| (r.index, d)))
        .fold((0, f64::NEG_INFINITY), |best, (i, d)| {
            if d > best.1 {
                (i, d)
            } else {
                best
            }
        })
        .0
}

#[test]
fn stats_peak_sits_at_the_signal_boundary() {
    for snr in [-7.0, -3.0, 0.0] {
        let hits = (0..40)
            .filter(|&s| argmax_delta_corr(&stats(snr, s)) == 7)
            .count();
        assert!(hits >= 38, "snr {snr}: {hits}/40");
    }
}

#[test]
fn stats_noiseless_interior_increments_vanish() {
    let rows = stats(f64::INFINITY, 3);
    assert_eq!(rows.len(), 8);
    assert!(rows[0].delta_corr.is_none() && rows[1].alpha_corr.is_none());
    for r in &rows[1..6] {
        assert!(r.delta_corr.unwrap().abs() <= 1e-12, "{r:?}");
    }
    assert_eq!(argmax_delta_corr(&rows), 7);
}
