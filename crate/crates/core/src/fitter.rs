//! Optimal online error-bounded piecewise linear fitting.
//!
//! A segment may cover positions `[s, e]` iff some line `f(x) = a*x + b`
//! satisfies `floor(f(i - s))` within epsilon of every key, i.e. the real
//! value lies in the half-open tube `[key - eps, key + eps + 1)`. The fitter
//! streams points and maintains the feasible (slope, intercept) region
//! through two convex hulls and two extreme support lines; when the region
//! empties, the segment is closed and a new one starts at the first
//! infeasible index (greedy longest prefix, which is optimal for this
//! problem). All feasibility predicates are exact integer comparisons in
//! i128; no floating point is consulted until a segment's concrete
//! parameters are chosen.
//!
//! `feasible` is a separate, non-streaming decision procedure over the same
//! tube geometry (envelope separation). It shares no state with the fitter
//! and serves as the exactness oracle for tests and the partitioner.

use crate::error::{Error, Result};
use crate::types::{predict, Segment, SortedKeyList};

/// Result of fitting one key list at a fixed error bound.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub segments: Vec<Segment>,
    pub epsilon: u32,
    pub max_abs_residual: u64,
}

type Pt = (i64, i128); // (relative index, tube bound)

#[inline]
fn cross(o: Pt, p: Pt, q: Pt) -> i128 {
    (p.0 - o.0) as i128 * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0) as i128
}

/// Line through two points, evaluated at `x`, compared against `y`:
/// returns sign of `line(x) - y` scaled by the positive run `p2.0 - p1.0`.
#[inline]
fn line_cmp(p1: Pt, p2: Pt, x: i64, y: i128) -> i128 {
    debug_assert!(p2.0 > p1.0);
    (p2.1 - p1.1) * (x - p1.0) as i128 - (y - p1.1) * (p2.0 - p1.0) as i128
}

/// Streaming state for the segment currently being grown.
struct Wedge {
    // Upper convex hull of lower tube corners (key - eps).
    lo_hull: Vec<Pt>,
    lo_start: usize,
    // Lower convex hull of upper tube corners (key + eps + 1).
    hi_hull: Vec<Pt>,
    hi_start: usize,
    // Max-slope support: lower corner on the left, upper corner on the right.
    max_line: Option<(Pt, Pt)>,
    // Min-slope support: upper corner on the left, lower corner on the right.
    min_line: Option<(Pt, Pt)>,
    count: usize,
}

impl Wedge {
    fn new() -> Self {
        Self {
            lo_hull: Vec::new(),
            lo_start: 0,
            hi_hull: Vec::new(),
            hi_start: 0,
            max_line: None,
            min_line: None,
            count: 0,
        }
    }

    fn clear(&mut self) {
        self.lo_hull.clear();
        self.hi_hull.clear();
        self.lo_start = 0;
        self.hi_start = 0;
        self.max_line = None;
        self.min_line = None;
        self.count = 0;
    }

    /// Tries to extend the current segment with the point at relative index
    /// `x` and tube `[lo, hi)`. Returns false when infeasible (the caller
    /// closes the segment; the state is left untouched in that case).
    fn add(&mut self, x: i64, lo: i128, hi: i128) -> bool {
        if self.count >= 2 {
            // A feasible line's achievable values at x form the open
            // interval (min_line(x), max_line(x)); the new tube [lo, hi)
            // must intersect it.
            let (u, l) = self.min_line.unwrap();
            if line_cmp(u, l, x, hi) >= 0 {
                return false; // min_line(x) >= hi: every line overshoots
            }
            let (l2, u2) = self.max_line.unwrap();
            if line_cmp(l2, u2, x, lo) <= 0 {
                return false; // max_line(x) <= lo: every line undershoots
            }
        }

        let p_lo = (x, lo);
        let p_hi = (x, hi);
        match self.count {
            0 => {
                self.lo_hull.push(p_lo);
                self.hi_hull.push(p_hi);
            }
            1 => {
                let first_lo = self.lo_hull[0];
                let first_hi = self.hi_hull[0];
                self.max_line = Some((first_lo, p_hi));
                self.min_line = Some((first_hi, p_lo));
                self.push_hulls(p_lo, p_hi);
            }
            _ => {
                // Does the new upper corner cut the max-slope line?
                let (l2, u2) = self.max_line.unwrap();
                if line_cmp(l2, u2, x, hi) > 0 {
                    // New support: tangent from (x, hi) to the lower hull,
                    // minimizing the slope of hull-vertex -> (x, hi).
                    let i = Self::tangent(
                        &self.lo_hull,
                        &mut self.lo_start,
                        |a: Pt, b: Pt| {
                            // slope(a->p_hi) <= slope(b->p_hi) ?
                            (hi - a.1) * (x - b.0) as i128 <= (hi - b.1) * (x - a.0) as i128
                        },
                    );
                    self.max_line = Some((self.lo_hull[i], p_hi));
                }
                // Does the new lower corner cut the min-slope line?
                let (u, l) = self.min_line.unwrap();
                if line_cmp(u, l, x, lo) < 0 {
                    let i = Self::tangent(
                        &self.hi_hull,
                        &mut self.hi_start,
                        |a: Pt, b: Pt| {
                            // slope(a->p_lo) >= slope(b->p_lo) ?
                            (lo - a.1) * (x - b.0) as i128 >= (lo - b.1) * (x - a.0) as i128
                        },
                    );
                    self.min_line = Some((self.hi_hull[i], p_lo));
                }
                self.push_hulls(p_lo, p_hi);
            }
        }
        self.count += 1;
        true
    }

    /// Walks `hull[*start..]` while `better(next, current)` holds, advancing
    /// `*start`; returns the index of the tangent vertex. Supports only ever
    /// move right, so the walk is amortized O(1) per point.
    fn tangent<F: Fn(Pt, Pt) -> bool>(hull: &[Pt], start: &mut usize, better: F) -> usize {
        let mut i = *start;
        while i + 1 < hull.len() && better(hull[i + 1], hull[i]) {
            i += 1;
        }
        *start = i;
        i
    }

    fn push_hulls(&mut self, p_lo: Pt, p_hi: Pt) {
        // Upper hull of lower corners: pop while the turn is not clockwise.
        while self.lo_hull.len() >= self.lo_start + 2 {
            let n = self.lo_hull.len();
            if cross(self.lo_hull[n - 2], self.lo_hull[n - 1], p_lo) >= 0 {
                self.lo_hull.pop();
            } else {
                break;
            }
        }
        self.lo_hull.push(p_lo);
        // Lower hull of upper corners: pop while not counterclockwise.
        while self.hi_hull.len() >= self.hi_start + 2 {
            let n = self.hi_hull.len();
            if cross(self.hi_hull[n - 2], self.hi_hull[n - 1], p_hi) <= 0 {
                self.hi_hull.pop();
            } else {
                break;
            }
        }
        self.hi_hull.push(p_hi);
    }

    /// Picks a concrete real-valued slope from the middle of the feasible
    /// slope window (or 0 for a single point).
    fn pick_slope(&self) -> f64 {
        match (self.min_line, self.max_line) {
            (Some((u, l)), Some((l2, u2))) => {
                let s_min = (l.1 - u.1) as f64 / (l.0 - u.0) as f64;
                let s_max = (u2.1 - l2.1) as f64 / (u2.0 - l2.0) as f64;
                0.5 * (s_min + s_max)
            }
            _ => 0.0,
        }
    }
}

/// Fits `keys` with the minimum number of segments such that every floored
/// prediction is within `epsilon` of its key, then quantizes parameters to
/// f32 and re-verifies. A segment whose residuals are pushed out of bounds
/// by quantization is refitted with a shrunk internal budget (splitting in
/// half once the budget is exhausted).
pub fn fit(keys: &SortedKeyList, epsilon: u32) -> Result<FitResult> {
    if keys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ks = keys.keys();
    let mut segments = Vec::new();
    fit_range(ks, 0, epsilon, epsilon, &mut segments)?;

    let mut max_abs = 0u64;
    for (j, seg) in segments.iter().enumerate() {
        let end = segments.get(j + 1).map_or(ks.len(), |s| s.start);
        for i in seg.start..end {
            let delta = ks[i] as i64 - predict(seg, i);
            max_abs = max_abs.max(delta.unsigned_abs());
        }
    }
    debug_assert!(max_abs <= epsilon as u64);
    Ok(FitResult {
        segments,
        epsilon,
        max_abs_residual: max_abs,
    })
}

/// Fits `keys[base..]` (relative coordinates handled internally) with tube
/// half-width `budget`, verifying each closed segment against `epsilon`.
fn fit_range(
    keys: &[u64],
    base: usize,
    budget: u32,
    epsilon: u32,
    out: &mut Vec<Segment>,
) -> Result<()> {
    let slice = &keys[base..];
    let mut wedge = Wedge::new();
    let mut seg_start = 0usize; // relative to base

    let mut i = 0usize;
    while i < slice.len() {
        let key = slice[i] as i128;
        let x = (i - seg_start) as i64;
        let lo = key - budget as i128;
        let hi = key + budget as i128 + 1;
        if wedge.add(x, lo, hi) {
            i += 1;
            continue;
        }
        emit(keys, base + seg_start, base + i, &wedge, budget, epsilon, out)?;
        wedge.clear();
        seg_start = i;
    }
    emit(
        keys,
        base + seg_start,
        base + slice.len(),
        &wedge,
        budget,
        epsilon,
        out,
    )
}

/// Chooses concrete f32 parameters for the closed segment covering
/// `[start, end)` (absolute indices), verifies the floored residuals at
/// `epsilon`, and falls back to shrink-or-split on quantization failure.
fn emit(
    keys: &[u64],
    start: usize,
    end: usize,
    wedge: &Wedge,
    budget: u32,
    epsilon: u32,
    out: &mut Vec<Segment>,
) -> Result<()> {
    debug_assert!(end > start);
    if end - start == 1 {
        return emit_single(keys, start, epsilon, out);
    }

    let slope = wedge.pick_slope();
    // Feasible intercept window at this slope, scanned over the segment.
    let mut b_lo = f64::NEG_INFINITY;
    let mut b_hi = f64::INFINITY;
    for i in start..end {
        let x = (i - start) as f64;
        let key = keys[i] as f64;
        b_lo = b_lo.max(key - budget as f64 - slope * x);
        b_hi = b_hi.min(key + budget as f64 + 1.0 - slope * x);
    }
    let intercept = 0.5 * (b_lo + b_hi);

    let seg = Segment::new(start, slope as f32, intercept as f32);
    if verify(keys, start, end, &seg, epsilon) {
        out.push(seg);
        return Ok(());
    }

    if budget > 0 {
        // Quantization broke the bound: refit this span with a tighter
        // internal tube, giving back at least twice the overshoot so the
        // retry ladder converges in a handful of rounds at any scale.
        let worst = (start..end)
            .map(|i| (keys[i] as i64 - predict(&seg, i)).unsigned_abs())
            .max()
            .unwrap();
        let overshoot = worst.saturating_sub(epsilon as u64).max(1);
        let shrink = u32::try_from(2 * overshoot).unwrap_or(u32::MAX).max(1);
        return fit_range(&keys[..end], start, budget.saturating_sub(shrink), epsilon, out);
    }
    // No budget left to give back; halve the span so shorter segments (and
    // finally singletons) absorb the rounding.
    let mid = start + (end - start) / 2;
    fit_range(&keys[..mid], start, 0, epsilon, out)?;
    fit_range(&keys[..end], mid, 0, epsilon, out)
}

fn emit_single(keys: &[u64], i: usize, epsilon: u32, out: &mut Vec<Segment>) -> Result<()> {
    // A flat segment through the key; key + 0.5 floors to the key itself
    // whenever it is representable. Nudge through neighboring f32s if not.
    let key = keys[i];
    let mut cand = (key as f64 + 0.5) as f32;
    for _ in 0..4 {
        let seg = Segment::new(i, 0.0, cand);
        if verify(keys, i, i + 1, &seg, epsilon) {
            out.push(seg);
            return Ok(());
        }
        cand = if (f64::from(cand) as i64) > key as i64 {
            f32::from_bits(cand.to_bits() - 1)
        } else {
            f32::from_bits(cand.to_bits() + 1)
        };
    }
    Err(Error::EpsilonInfeasible { epsilon })
}

fn verify(keys: &[u64], start: usize, end: usize, seg: &Segment, epsilon: u32) -> bool {
    (start..end).all(|i| {
        let delta = keys[i] as i64 - predict(seg, i);
        delta.unsigned_abs() <= epsilon as u64
    })
}

/// Exact decision: does one line fit `keys[lo..=hi]` at `epsilon` under the
/// floored-prediction semantics? Decided by envelope separation: a line
/// exists iff the upper hull of the lower tube corners stays strictly below
/// the lower hull of the upper tube corners at every hull vertex.
pub fn feasible(keys: &SortedKeyList, lo: usize, hi: usize, epsilon: u32) -> Result<bool> {
    let ks = keys.keys();
    if lo > hi || hi >= ks.len() {
        return Err(Error::IndexOutOfRange {
            index: hi,
            len: ks.len(),
        });
    }
    let n = hi - lo + 1;
    if n <= 2 {
        return Ok(true); // two tubes of positive height always admit a line
    }

    let mut lo_hull: Vec<Pt> = Vec::new(); // upper hull of lower corners
    let mut hi_hull: Vec<Pt> = Vec::new(); // lower hull of upper corners
    for i in 0..n {
        let key = ks[lo + i] as i128;
        let x = i as i64;
        let p_lo = (x, key - epsilon as i128);
        let p_hi = (x, key + epsilon as i128 + 1);
        while lo_hull.len() >= 2
            && cross(lo_hull[lo_hull.len() - 2], lo_hull[lo_hull.len() - 1], p_lo) >= 0
        {
            lo_hull.pop();
        }
        lo_hull.push(p_lo);
        while hi_hull.len() >= 2
            && cross(hi_hull[hi_hull.len() - 2], hi_hull[hi_hull.len() - 1], p_hi) <= 0
        {
            hi_hull.pop();
        }
        hi_hull.push(p_hi);
    }

    // Lower envelope (of upper corners) evaluated at x, strict comparison
    // against y: envelope(x) > y required everywhere on the lower hull.
    let above = |env: &[Pt], x: i64, y: i128| -> bool {
        let j = env.partition_point(|p| p.0 <= x);
        if j == 0 {
            return env[0].1 > y; // x == env[0].0 handled by j >= 1 otherwise
        }
        if j == env.len() {
            return env[env.len() - 1].1 > y;
        }
        line_cmp(env[j - 1], env[j], x, y) > 0
    };
    let below = |env: &[Pt], x: i64, y: i128| -> bool {
        let j = env.partition_point(|p| p.0 <= x);
        if j == 0 {
            return env[0].1 < y;
        }
        if j == env.len() {
            return env[env.len() - 1].1 < y;
        }
        line_cmp(env[j - 1], env[j], x, y) < 0
    };

    for &(x, y) in &lo_hull {
        if !above(&hi_hull, x, y) {
            return Ok(false);
        }
    }
    for &(x, y) in &hi_hull {
        if !below(&lo_hull, x, y) {
            return Ok(false);
        }
    }
    Ok(true)
}
