//! End-to-end tests driving the built binary through temp files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lci")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("failed to spawn lci")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lci_cli_{name}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_text_keys(path: &Path, keys: &[u64]) {
    let mut s = String::new();
    for k in keys {
        s.push_str(&k.to_string());
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

fn write_u32_keys(path: &Path, keys: &[u64]) {
    let mut bytes = Vec::with_capacity(keys.len() * 4);
    for &k in keys {
        bytes.extend_from_slice(&(k as u32).to_le_bytes());
    }
    std::fs::write(path, bytes).unwrap();
}

fn gapped(seed: u64, n: usize, max_gap: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key = 0u64;
    (0..n)
        .map(|_| {
            key += rng.gen_range(1..=max_gap);
            key
        })
        .collect()
}

#[test]
fn compress_reference_list_reports_three_segments() {
    let dir = tmpdir("fig");
    let input = dir.join("keys.txt");
    write_text_keys(
        &input,
        &[
            1, 3, 5, 7, 9, 11, 25, 38, 51, 64, 65, 66, 67, 68, 69, 70, 71, 73, 74, 76, 77,
        ],
    );
    let lci = dir.join("keys.lci");
    let out = run(&[
        "compress",
        input.to_str().unwrap(),
        lci.to_str().unwrap(),
        "--epsilon",
        "4",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("segments:    3"), "{text}");
    assert!(text.contains("(4 residual bits/key)"), "{text}");
}

#[test]
fn file_roundtrip_at_three_scales() {
    let dir = tmpdir("roundtrip");
    for (name, n) in [("s", 100usize), ("m", 10_000), ("l", 1_000_000)] {
        let keys = gapped(7 + n as u64, n, 90);
        let input = dir.join(format!("{name}.bin"));
        write_u32_keys(&input, &keys);
        let lci = dir.join(format!("{name}.lci"));
        let back = dir.join(format!("{name}_back.bin"));
        let out = run(&[
            "compress",
            input.to_str().unwrap(),
            lci.to_str().unwrap(),
            "--epsilon",
            "16",
        ]);
        assert!(out.status.success());
        let out = run(&[
            "decompress",
            lci.to_str().unwrap(),
            back.to_str().unwrap(),
            "--format",
            "u32",
        ]);
        assert!(out.status.success());
        assert_eq!(
            std::fs::read(&input).unwrap(),
            std::fs::read(&back).unwrap(),
            "byte-identical round trip at n={n}"
        );
    }
}

#[test]
fn zero_epsilon_file_roundtrip() {
    let dir = tmpdir("eps0");
    let keys: Vec<u64> = (1..=500).map(|i| i * 3).collect();
    let input = dir.join("lin.txt");
    write_text_keys(&input, &keys);
    let lci = dir.join("lin.lci");
    assert!(run(&[
        "compress",
        input.to_str().unwrap(),
        lci.to_str().unwrap(),
        "--epsilon",
        "0"
    ])
    .status
    .success());
    let back = dir.join("lin_back.txt");
    assert!(run(&[
        "decompress",
        lci.to_str().unwrap(),
        back.to_str().unwrap(),
        "--format",
        "text"
    ])
    .status
    .success());
    assert_eq!(
        std::fs::read(&input).unwrap(),
        std::fs::read(&back).unwrap()
    );
}

#[test]
fn corrupted_file_exits_with_format_code() {
    let dir = tmpdir("corrupt");
    let keys = gapped(3, 500, 50);
    let input = dir.join("k.bin");
    write_u32_keys(&input, &keys);
    let lci = dir.join("k.lci");
    assert!(run(&[
        "compress",
        input.to_str().unwrap(),
        lci.to_str().unwrap(),
        "--epsilon",
        "8"
    ])
    .status
    .success());

    let mut bytes = std::fs::read(&lci).unwrap();
    bytes[0] = b'Z';
    std::fs::write(&lci, &bytes).unwrap();
    let out = run(&[
        "decompress",
        lci.to_str().unwrap(),
        dir.join("x.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "bad magic should exit 3");

    let out = run(&["decompress", dir.join("missing.lci").to_str().unwrap(), "x"]);
    assert_eq!(out.status.code(), Some(5), "missing file should exit 5");

    let unsorted = dir.join("unsorted.txt");
    std::fs::write(&unsorted, "9\n5\n").unwrap();
    let out = run(&[
        "compress",
        unsorted.to_str().unwrap(),
        lci.to_str().unwrap(),
        "--epsilon",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(4), "unsorted input should exit 4");
}

#[test]
fn sweep_on_linear_data_picks_epsilon_one() {
    let dir = tmpdir("sweeplin");
    let keys: Vec<u64> = (1..=2000).map(|i| i * 10).collect();
    let input = dir.join("lin.txt");
    write_text_keys(&input, &keys);
    let out = run(&[
        "compress",
        input.to_str().unwrap(),
        dir.join("lin.lci").to_str().unwrap(),
        "--sweep",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("sweep chose epsilon 1"), "{text}");
    assert!(text.contains("segments:    1"), "{text}");
}

#[test]
fn tuned_epsilon_close_to_sweep_argmin() {
    let dir = tmpdir("tunevsweep");
    let keys = gapped(11, 80_000, 9);
    let input = dir.join("k.bin");
    write_u32_keys(&input, &keys);

    let tuned = run(&[
        "compress",
        input.to_str().unwrap(),
        dir.join("t.lci").to_str().unwrap(),
        "--tune",
    ]);
    assert!(tuned.status.success());
    let ttext = stdout(&tuned);
    let teps: u32 = ttext
        .lines()
        .find(|l| l.starts_with("tuned epsilon"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();

    let swept = run(&[
        "compress",
        input.to_str().unwrap(),
        dir.join("s.lci").to_str().unwrap(),
        "--sweep",
    ]);
    assert!(swept.status.success());
    let stext = stdout(&swept);
    let seps: u32 = stext
        .lines()
        .find(|l| l.starts_with("sweep chose epsilon"))
        .and_then(|l| l.split_whitespace().nth(3))
        .unwrap()
        .parse()
        .unwrap();

    // Within one power of two of the measured argmin.
    assert!(
        teps.max(seps) / teps.min(seps).max(1) <= 2,
        "tuned {teps} vs sweep {seps}"
    );
}

#[test]
fn query_commands_match_oracles() {
    let dir = tmpdir("query");
    let a_keys = gapped(21, 900, 25);
    let b_keys = gapped(22, 700, 30);
    let (a_txt, b_txt) = (dir.join("a.txt"), dir.join("b.txt"));
    write_text_keys(&a_txt, &a_keys);
    write_text_keys(&b_txt, &b_keys);
    let (a_lci, b_lci) = (dir.join("a.lci"), dir.join("b.lci"));
    for (t, l) in [(&a_txt, &a_lci), (&b_txt, &b_lci)] {
        assert!(run(&[
            "compress",
            t.to_str().unwrap(),
            l.to_str().unwrap(),
            "--epsilon",
            "8"
        ])
        .status
        .success());
    }

    let sa: std::collections::BTreeSet<u64> = a_keys.iter().copied().collect();
    let sb: std::collections::BTreeSet<u64> = b_keys.iter().copied().collect();

    let out = run(&["query", "intersect", a_lci.to_str().unwrap(), b_lci.to_str().unwrap()]);
    assert!(out.status.success());
    let got: Vec<u64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let expect: Vec<u64> = sa.intersection(&sb).copied().collect();
    assert_eq!(got, expect);

    let out = run(&["query", "union", a_lci.to_str().unwrap(), b_lci.to_str().unwrap()]);
    let got: Vec<u64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let expect: Vec<u64> = sa.union(&sb).copied().collect();
    assert_eq!(got, expect);

    // Self-intersection equals decompression.
    let out = run(&["query", "intersect", a_lci.to_str().unwrap(), a_lci.to_str().unwrap()]);
    let got: Vec<u64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(got, a_keys);

    // Quantile k=q returns the maximum; approx stays within epsilon.
    let out = run(&["query", "quantile", a_lci.to_str().unwrap(), "7", "7"]);
    assert_eq!(
        stdout(&out).trim().parse::<u64>().unwrap(),
        *a_keys.last().unwrap()
    );
    let exact: u64 = stdout(&run(&["query", "quantile", a_lci.to_str().unwrap(), "3", "4"]))
        .trim()
        .parse()
        .unwrap();
    let approx: i64 = stdout(&run(&[
        "query",
        "quantile",
        a_lci.to_str().unwrap(),
        "3",
        "4",
        "--approx",
    ]))
    .trim()
    .parse()
    .unwrap();
    assert!((exact as i64 - approx).unsigned_abs() <= 8);

    // next_geq matches a binary-search oracle on a few probes.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let x = rng.gen_range(0..=a_keys.last().unwrap() + 10);
        let out = run(&["query", "nextgeq", a_lci.to_str().unwrap(), &x.to_string()]);
        let text = stdout(&out);
        let idx = a_keys.partition_point(|&v| v < x);
        if idx == a_keys.len() {
            assert_eq!(text.trim(), "NOT_FOUND");
        } else {
            assert_eq!(text.trim(), format!("{} {}", idx, a_keys[idx]));
        }
    }
}

#[test]
fn segments_only_file_supports_approx_quantiles_only() {
    let dir = tmpdir("segonly");
    let keys = gapped(31, 400, 20);
    let input = dir.join("k.txt");
    write_text_keys(&input, &keys);
    let lci = dir.join("k.slci");
    assert!(run(&[
        "compress",
        input.to_str().unwrap(),
        lci.to_str().unwrap(),
        "--epsilon",
        "8",
        "--segments-only"
    ])
    .status
    .success());
    let out = run(&["query", "quantile", lci.to_str().unwrap(), "1", "2", "--approx"]);
    assert!(out.status.success());
    let approx: i64 = stdout(&out).trim().parse().unwrap();
    let exact = keys[keys.len() / 2] as i64;
    assert!((exact - approx).unsigned_abs() <= 8);
    // Exact decode of a segments-only file must fail cleanly.
    let out = run(&["decompress", lci.to_str().unwrap(), dir.join("x.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn partition_command_orders_costs() {
    let dir = tmpdir("partition");
    let mut keys = Vec::new();
    let mut key = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..120 {
        key += rng.gen_range(1..=40);
        keys.push(key);
    }
    for _ in 0..120 {
        key += 500_000;
        keys.push(key);
    }
    let input = dir.join("k.txt");
    write_text_keys(&input, &keys);

    let exact = run(&["partition", input.to_str().unwrap(), "--exact"]);
    assert!(exact.status.success());
    let etext = stdout(&exact);
    let ebits: u64 = etext
        .lines()
        .find(|l| l.starts_with("total bits:"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();

    let plan_path = dir.join("k.lcp");
    let greedy = run(&[
        "partition",
        input.to_str().unwrap(),
        "--greedy",
        "--granularity",
        "8",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    assert!(greedy.status.success());
    let gtext = stdout(&greedy);
    let gbits: u64 = gtext
        .lines()
        .find(|l| l.starts_with("total bits:"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ebits <= gbits, "exact {ebits} > greedy {gbits}");
    assert!(plan_path.exists());

    // Linear data: one partition either way.
    let lin = dir.join("lin.txt");
    write_text_keys(&lin, &(1..=300).map(|i| i * 9).collect::<Vec<_>>());
    let out = run(&["partition", lin.to_str().unwrap(), "--exact"]);
    assert!(stdout(&out).contains("partitions:  1"));
}

#[test]
fn bench_smoke_and_bits_consistency() {
    let dir = tmpdir("bench");
    let keys = gapped(41, 200_000, 100);
    let input = dir.join("k.bin");
    write_u32_keys(&input, &keys);

    let compressed = run(&[
        "compress",
        input.to_str().unwrap(),
        dir.join("k.lci").to_str().unwrap(),
        "--epsilon",
        "64",
    ]);
    let ctext = stdout(&compressed);
    let cbits: f64 = ctext
        .lines()
        .find(|l| l.starts_with("bits/int:"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();

    let out = run(&[
        "bench",
        input.to_str().unwrap(),
        "--epsilon",
        "64",
        "--repeat",
        "3",
        "--machine",
    ]);
    assert!(out.status.success());
    let row = stdout(&out);
    let bbits: f64 = row
        .split_whitespace()
        .find(|f| f.starts_with("bits_per_int="))
        .and_then(|f| f.split('=').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (cbits - bbits).abs() < 0.01,
        "compress reports {cbits} bits/int, bench {bbits}"
    );
    assert!(row.contains("checksum="));

    // Parallel corpus mode.
    let corpus = dir.join("corpus.bin");
    let mut bytes = Vec::new();
    for seed in 0..4u64 {
        let lk = gapped(seed, 50_000, 60);
        bytes.extend_from_slice(&(lk.len() as u32).to_le_bytes());
        for k in &lk {
            bytes.extend_from_slice(&(*k as u32).to_le_bytes());
        }
    }
    std::fs::write(&corpus, bytes).unwrap();
    let out = Command::new(bin())
        .args([
            "bench",
            corpus.to_str().unwrap(),
            "--corpus",
            "--lists-parallel",
            "--repeat",
            "2",
            "--machine",
        ])
        .env("LC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("threads=2"));

    // External baseline rows appear in the table.
    let out = run(&[
        "bench",
        input.to_str().unwrap(),
        "--epsilon",
        "64",
        "--repeat",
        "1",
        "--baseline",
        "extcodec=7.384,10.410,0.358",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("extcodec") && text.contains("7.384"), "{text}");
}
