//! Generates synthetic sorted-key datasets for exercising the CLI.
//!
//! Usage: gen_corpus <out-path> <n> [mean-gap] [seed] [--u64|--text]
//!
//! Keys are cumulative sums of uniform gaps in [1, 2*mean-gap - 1].

use std::path::PathBuf;

use lci_core::format::{write_keys, InputFormat};
use lci_core::SortedKeyList;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        eprintln!("usage: gen_corpus <out-path> <n> [mean-gap] [seed] [--u64|--text]");
        std::process::exit(2);
    }
    let path = PathBuf::from(&args[0]);
    let n: usize = args.get(1).map_or(1_000_000, |s| s.parse().expect("bad n"));
    let mean_gap: u64 = args.get(2).map_or(50, |s| s.parse().expect("bad gap"));
    let seed: u64 = args.get(3).map_or(42, |s| s.parse().unwrap_or(42));
    let format = if args.iter().any(|a| a == "--u64") {
        InputFormat::BinaryU64
    } else if args.iter().any(|a| a == "--text") {
        InputFormat::TextLines
    } else {
        InputFormat::BinaryU32
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = (2 * mean_gap).saturating_sub(1).max(1);
    let mut key = 0u64;
    let keys: Vec<u64> = (0..n)
        .map(|_| {
            key += rng.gen_range(1..=hi);
            key
        })
        .collect();
    let list = SortedKeyList::from_keys(keys).expect("generator produced invalid keys");
    write_keys(&path, &list, format).expect("write failed");
    eprintln!("wrote {} keys to {}", n, path.display());
}
