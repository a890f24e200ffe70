//! Key-list partitioning: split a list into consecutive disjoint ranges,
//! each compressed at its own error bound, minimizing total bits.
//!
//! The search space is a DAG whose nodes are cut positions 0..=N and whose
//! edge (i, j) carries the full compressed size of keys[i..j) at the best
//! candidate error bound. All edges point forward, so a single relaxation
//! pass in index order replaces Dijkstra. The exact solver considers every
//! edge (quadratic; fine up to a few thousand keys); the greedy variant
//! restricts each node's outgoing edges to geometrically spaced lengths.

use std::collections::HashMap;

use crate::codec::{compress, space_report};
use crate::error::{Error, Result};
use crate::types::{CompressedList, SortedKeyList};

/// Candidate error bounds tried per edge. Partitions are small and sit at
/// exactly the distribution breaks the closed-form tuner assumes away, so a
/// direct sweep is used instead.
pub const EDGE_EPSILONS: [u32; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

/// Bits of the partition-plan file header (magic, version, width, part
/// count, total n). Per-part blob length prefixes and padding are excluded,
/// like residual padding in the single-list accounting.
pub const PLAN_HEADER_BITS: u64 = 22 * 8;

/// A partitioning decision: cut positions (including 0 and N), the error
/// bound chosen for each partition, and the modeled total size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub cuts: Vec<usize>,
    pub per_part_epsilon: Vec<u32>,
    pub total_bits: u64,
}

impl PartitionPlan {
    pub fn part_count(&self) -> usize {
        self.cuts.len() - 1
    }
}

/// Cost in bits of storing keys[i..j) as one partition: the smallest
/// space_report total over the candidate error bounds (header included).
/// Also returns the bound achieving it.
pub fn edge_cost_with_epsilon(keys: &SortedKeyList, i: usize, j: usize) -> Result<(u64, u32)> {
    if i >= j || j > keys.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: keys.len(),
        });
    }
    let slice = keys.slice(i, j);
    let mut best = (u64::MAX, EDGE_EPSILONS[0]);
    for &eps in &EDGE_EPSILONS {
        // A bound the f32 parameters cannot honor for this key magnitude is
        // simply not a candidate; other errors are real.
        let c = match compress(&slice, eps) {
            Ok(c) => c,
            Err(Error::EpsilonInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        let bits = space_report(&c).total_bits;
        if bits < best.0 {
            best = (bits, eps);
        }
    }
    if best.0 == u64::MAX {
        return Err(Error::EpsilonInfeasible {
            epsilon: *EDGE_EPSILONS.last().unwrap(),
        });
    }
    Ok(best)
}

/// Cost in bits of storing keys[i..j) as one partition.
pub fn edge_cost(keys: &SortedKeyList, i: usize, j: usize) -> Result<u64> {
    edge_cost_with_epsilon(keys, i, j).map(|(bits, _)| bits)
}

type EdgeMemo = HashMap<(usize, usize), (u64, u32)>;

struct Relaxation<'a> {
    keys: &'a SortedKeyList,
    memo: EdgeMemo,
    best: Vec<u64>,
    parent: Vec<usize>,
    eps: Vec<u32>,
}

impl<'a> Relaxation<'a> {
    fn new(keys: &'a SortedKeyList) -> Self {
        let n = keys.len();
        let mut best = vec![u64::MAX; n + 1];
        best[0] = 0;
        Self {
            keys,
            memo: HashMap::new(),
            best,
            parent: vec![0; n + 1],
            eps: vec![1; n + 1],
        }
    }

    fn relax(&mut self, i: usize, j: usize) -> Result<()> {
        let (bits, eps) = match self.memo.get(&(i, j)) {
            Some(&v) => v,
            None => {
                let v = edge_cost_with_epsilon(self.keys, i, j)?;
                self.memo.insert((i, j), v);
                v
            }
        };
        let cand = self.best[i] + bits;
        if cand < self.best[j] {
            self.best[j] = cand;
            self.parent[j] = i;
            self.eps[j] = eps;
        }
        Ok(())
    }

    fn into_plan(self) -> (PartitionPlan, EdgeMemo) {
        let n = self.keys.len();
        let mut cuts = vec![n];
        let mut eps_rev = Vec::new();
        let mut at = n;
        while at > 0 {
            eps_rev.push(self.eps[at]);
            at = self.parent[at];
            cuts.push(at);
        }
        cuts.reverse();
        eps_rev.reverse();
        let plan = PartitionPlan {
            cuts,
            per_part_epsilon: eps_rev,
            total_bits: self.best[n] + PLAN_HEADER_BITS,
        };
        (plan, self.memo)
    }
}

/// Minimum-total-bits partitioning over all contiguous cuts, by shortest
/// path over the full quadratic edge set. Intended for lists up to a few
/// thousand keys; beyond that use `greedy_partition`.
pub fn optimal_partition(keys: &SortedKeyList) -> Result<PartitionPlan> {
    if keys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = keys.len();
    let mut rx = Relaxation::new(keys);
    for i in 0..n {
        for j in i + 1..=n {
            rx.relax(i, j)?;
        }
    }
    Ok(rx.into_plan().0)
}

/// Approximate partitioning: each node only considers jumps of length
/// `granularity * 2^t` (plus the final node), giving O(N log N) edges. The
/// geometric jumps leave cut positions power-of-two coarse, so a local
/// refinement pass then slides each interior cut along the granularity
/// lattice to the cheapest nearby position.
pub fn greedy_partition(keys: &SortedKeyList, granularity: usize) -> Result<PartitionPlan> {
    if keys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let g = granularity.max(1);
    let n = keys.len();
    let mut rx = Relaxation::new(keys);
    for i in 0..n {
        if rx.best[i] == u64::MAX {
            continue;
        }
        let mut step = g;
        loop {
            let j = i + step;
            if j >= n {
                break;
            }
            rx.relax(i, j)?;
            step *= 2;
        }
        rx.relax(i, n)?;
    }
    let (plan, mut memo) = rx.into_plan();
    refine_cuts(keys, plan, g, &mut memo)
}

/// Slides each interior cut within +-REFINE_RADIUS granules to the cheapest
/// position for its two adjacent partitions, repeating until stable.
fn refine_cuts(
    keys: &SortedKeyList,
    plan: PartitionPlan,
    g: usize,
    memo: &mut EdgeMemo,
) -> Result<PartitionPlan> {
    const REFINE_RADIUS: isize = 8;
    const MAX_ROUNDS: usize = 4;

    let mut cost = |i: usize, j: usize| -> Result<(u64, u32)> {
        if let Some(&v) = memo.get(&(i, j)) {
            return Ok(v);
        }
        let v = edge_cost_with_epsilon(keys, i, j)?;
        memo.insert((i, j), v);
        Ok(v)
    };

    let mut cuts = plan.cuts;
    for _ in 0..MAX_ROUNDS {
        let mut moved = false;
        for ci in 1..cuts.len() - 1 {
            let (a, c, b) = (cuts[ci - 1], cuts[ci], cuts[ci + 1]);
            let mut best_pos = c;
            let mut best_bits = cost(a, c)?.0 + cost(c, b)?.0;
            for k in -REFINE_RADIUS..=REFINE_RADIUS {
                let p = c as isize + k * g as isize;
                if k == 0 || p <= a as isize || p >= b as isize {
                    continue;
                }
                let p = p as usize;
                let bits = cost(a, p)?.0 + cost(p, b)?.0;
                if bits < best_bits {
                    best_bits = bits;
                    best_pos = p;
                }
            }
            if best_pos != c {
                cuts[ci] = best_pos;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let mut eps = Vec::with_capacity(cuts.len() - 1);
    let mut total = PLAN_HEADER_BITS;
    for w in cuts.windows(2) {
        let (bits, e) = cost(w[0], w[1])?;
        total += bits;
        eps.push(e);
    }
    Ok(PartitionPlan {
        cuts,
        per_part_epsilon: eps,
        total_bits: total,
    })
}

/// Materializes a plan: compresses each partition at its chosen bound.
pub fn compress_partitions(
    keys: &SortedKeyList,
    plan: &PartitionPlan,
) -> Result<Vec<CompressedList>> {
    plan.cuts
        .windows(2)
        .zip(&plan.per_part_epsilon)
        .map(|(w, &eps)| compress(&keys.slice(w[0], w[1]), eps))
        .collect()
}
