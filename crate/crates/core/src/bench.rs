//! Decompression benchmark harness: median-of-repeats wall-clock timing
//! over preallocated reused buffers, reporting bits/int, ns/int and GiB/s.
//! A checksum of the decoded output is folded into every timed pass so the
//! decode loop cannot be optimized away.

use std::time::Instant;

use crate::codec::{decode_into_blocked, decode_into_scalar, space_report};
use crate::types::CompressedList;

/// Which decode kernel to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Scalar,
    Blocked,
}

impl DecodeMode {
    pub fn name(self) -> &'static str {
        match self {
            DecodeMode::Scalar => "scalar",
            DecodeMode::Blocked => "blocked",
        }
    }
}

/// One benchmark measurement in the bits/int, ns/int, GiB/s schema.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub dataset: String,
    /// Compressed size on disk (serialized bytes).
    pub total_size_bytes: u64,
    pub bits_per_int: f64,
    pub decode_ns_per_int: f64,
    /// Decoded raw bytes per second of wall time, in GiB/s.
    pub throughput_gib_s: f64,
    pub mode: DecodeMode,
    /// Wrapping sum of every decoded key; printed to pin the decode loop.
    pub checksum: u64,
    pub total_ints: u64,
    pub repeats: u32,
    pub threads: usize,
}

fn decode_lists(lists: &[CompressedList], mode: DecodeMode, buf: &mut Vec<u64>) -> u64 {
    let mut checksum = 0u64;
    for c in lists {
        buf.resize(c.n, 0);
        match mode {
            DecodeMode::Scalar => decode_into_scalar(c, buf),
            DecodeMode::Blocked => decode_into_blocked(c, buf),
        }
        let buf = std::hint::black_box(&*buf);
        checksum = buf
            .iter()
            .fold(checksum, |acc, &k| acc.wrapping_add(k));
    }
    checksum
}

/// Splits `lists` into `threads` contiguous groups of roughly equal total
/// key count.
fn balanced_chunks(lists: &[CompressedList], threads: usize) -> Vec<&[CompressedList]> {
    let total: usize = lists.iter().map(|c| c.n).sum();
    let target = total.div_ceil(threads.max(1));
    let mut chunks = Vec::new();
    let mut begin = 0;
    let mut acc = 0usize;
    for (i, c) in lists.iter().enumerate() {
        acc += c.n;
        if acc >= target && i + 1 < lists.len() {
            chunks.push(&lists[begin..=i]);
            begin = i + 1;
            acc = 0;
        }
    }
    if begin < lists.len() {
        chunks.push(&lists[begin..]);
    }
    chunks
}

/// Runs the decode benchmark: one warm-up pass, then `repeats` timed passes
/// over all lists; the median pass defines the report. With `threads > 1`
/// the lists are decoded concurrently on scoped worker threads, each with
/// its own output buffer (the compressed lists are shared read-only).
pub fn run_decode_bench(
    dataset: &str,
    lists: &[CompressedList],
    mode: DecodeMode,
    repeats: u32,
    threads: usize,
) -> BenchReport {
    assert!(!lists.is_empty());
    let threads = threads.clamp(1, lists.len());
    let total_ints: u64 = lists.iter().map(|c| c.n as u64).sum();
    let raw_bytes: u64 = lists
        .iter()
        .map(|c| c.n as u64 * c.key_width.bits() as u64 / 8)
        .sum();
    let total_bits: u64 = lists.iter().map(|c| space_report(c).total_bits).sum();
    let chunks = balanced_chunks(lists, threads);

    let run = |bufs: &mut [Vec<u64>]| -> u64 {
        if chunks.len() == 1 {
            decode_lists(chunks[0], mode, &mut bufs[0])
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .iter()
                    .zip(bufs.iter_mut())
                    .map(|(chunk, buf)| scope.spawn(move || decode_lists(chunk, mode, buf)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("bench worker panicked"))
                    .fold(0u64, u64::wrapping_add)
            })
        }
    };

    let mut bufs: Vec<Vec<u64>> = vec![Vec::new(); chunks.len()];
    let checksum = run(&mut bufs); // warm cache, size buffers
    let mut times = Vec::with_capacity(repeats as usize);
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let c = run(&mut bufs);
        times.push(t0.elapsed());
        assert_eq!(c, checksum, "checksum drift across passes");
    }
    times.sort();
    let median = times[times.len() / 2];
    let secs = median.as_secs_f64();

    BenchReport {
        dataset: dataset.to_string(),
        total_size_bytes: total_bits.div_ceil(8),
        bits_per_int: total_bits as f64 / total_ints as f64,
        decode_ns_per_int: secs * 1e9 / total_ints as f64,
        throughput_gib_s: raw_bytes as f64 / (1u64 << 30) as f64 / secs,
        mode,
        checksum,
        total_ints,
        repeats: repeats.max(1),
        threads,
    }
}

impl BenchReport {
    /// Fig-style aligned table header.
    pub fn table_header() -> String {
        format!(
            "{:<16} {:>8} {:>14} {:>12} {:>12} {:>12}",
            "Dataset", "Mode", "Size bits/int", "Dec ns/int", "GiB/s", "Checksum"
        )
    }

    pub fn table_row(&self) -> String {
        format!(
            "{:<16} {:>8} {:>14.3} {:>12.3} {:>12.3} {:>12x}",
            self.dataset,
            self.mode.name(),
            self.bits_per_int,
            self.decode_ns_per_int,
            self.throughput_gib_s,
            self.checksum
        )
    }

    /// Machine-readable single line.
    pub fn machine_row(&self) -> String {
        format!(
            "dataset={} mode={} ints={} bits_per_int={:.6} ns_per_int={:.6} gib_s={:.6} checksum={:x} repeats={} threads={}",
            self.dataset,
            self.mode.name(),
            self.total_ints,
            self.bits_per_int,
            self.decode_ns_per_int,
            self.throughput_gib_s,
            self.checksum,
            self.repeats,
            self.threads
        )
    }
}
