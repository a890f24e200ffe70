//! Shared oracles and corpus generators for the integration suites.
//!
//! The segment-count oracle is a dynamic program over the exact
//! single-segment feasibility decision; it never looks at the streaming
//! fitter's internals, so agreement between the two is a real check.

#![allow(dead_code)]

use lci_core::fitter::feasible;
use lci_core::{KeyWidth, SortedKeyList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum number of segments covering `keys` at `epsilon`, by dynamic
/// programming over every contiguous split.
pub fn dp_min_segments(keys: &SortedKeyList, epsilon: u32) -> usize {
    let n = keys.len();
    let mut dp = vec![usize::MAX; n + 1];
    dp[0] = 0;
    for end in 1..=n {
        for start in 0..end {
            if dp[start] != usize::MAX && feasible(keys, start, end - 1, epsilon).unwrap() {
                dp[end] = dp[end].min(dp[start] + 1);
            }
        }
    }
    dp[n]
}

/// The frozen 21-key reference list: three linear regimes (slopes ~2.5, 13,
/// ~0.94) whose minimal cover at epsilon = 4 is exactly three segments over
/// index ranges [0,5], [6,9], [10,20]. First keys 1 and 3, last key 77.
pub fn reference_21_keys() -> SortedKeyList {
    SortedKeyList::from_keys(vec![
        1, 3, 5, 7, 9, 11, // slope ~2.5 regime
        25, 38, 51, 64, // slope 13 regime
        65, 66, 67, 68, 69, 70, 71, 73, 74, 76, 77, // slope ~0.94 regime
    ])
    .unwrap()
}

const GAP_DISTRIBUTIONS: usize = 6;

fn draw_gap(rng: &mut ChaCha8Rng, dist: usize, i: usize) -> u64 {
    match dist {
        0 => rng.gen_range(1..=64),
        1 => rng.gen_range(1..=1024),
        // geometric-ish small gaps with occasional runs
        2 => 1 + (-(rng.gen::<f64>().max(1e-12).ln()) * 20.0) as u64,
        // bursty: mostly dense, rare large jumps
        3 => {
            if rng.gen::<f64>() < 0.95 {
                rng.gen_range(1..=4)
            } else {
                rng.gen_range(10_000..=20_000)
            }
        }
        // constant gap (exactly linear)
        4 => 7,
        // slowly growing gaps (curved index->key mapping)
        _ => 1 + (i as u64 / 50),
    }
}

/// One randomized corpus instance: key count log-uniform in [1, 1e5], a
/// mixed gap distribution, and an error bound in [0, 256]. The universe is
/// capped at 2^22 * max(1, eps) so the f32 segment parameters can always
/// honor the bound (see `types::MAX_KEY` discussion).
pub fn random_corpus(seed: u64) -> (SortedKeyList, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = match rng.gen_range(0..3) {
        0 => *[0u32, 1, 2, 4, 8, 16, 32, 64, 128, 256]
            .get(rng.gen_range(0..10))
            .unwrap(),
        1 => rng.gen_range(0..=256),
        _ => rng.gen_range(0..=8),
    };
    let n_target = 10f64.powf(rng.gen_range(0.0..5.0)) as usize + 1;
    let cap = (eps.max(1) as u64) << 22;
    let dist = rng.gen_range(0..GAP_DISTRIBUTIONS);
    let mut key = 0u64;
    let mut keys = Vec::with_capacity(n_target.min(100_001));
    for i in 0..n_target.min(100_000) {
        key += draw_gap(&mut rng, dist, i);
        if key > cap {
            break;
        }
        keys.push(key);
    }
    if keys.is_empty() {
        keys.push(1 + seed % 100);
    }
    // Occasionally declare 64-bit storage width for small keys.
    let width = if rng.gen_range(0..8) == 0 {
        KeyWidth::W64
    } else {
        KeyWidth::infer(&keys)
    };
    (SortedKeyList::new(keys, width).unwrap(), eps)
}

/// Cumulative sums of uniform gaps in [lo, hi].
pub fn uniform_gap_list(seed: u64, n: usize, lo: u64, hi: u64) -> SortedKeyList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key = 0u64;
    let keys = (0..n)
        .map(|_| {
            key += rng.gen_range(lo..=hi);
            key
        })
        .collect();
    SortedKeyList::from_keys(keys).unwrap()
}

/// Small random instance for minimality checks: modest gaps keep the f32
/// quantization far from the error bound, so the streamed fit is never
/// forced to split beyond the mathematical optimum.
pub fn small_instance(seed: u64, max_n: usize) -> SortedKeyList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let mut key = rng.gen_range(0..64);
    let keys = (0..n)
        .map(|_| {
            key += rng.gen_range(1..=100);
            key
        })
        .collect();
    SortedKeyList::from_keys(keys).unwrap()
}
