//! Query processing directly over compressed lists: quantile lookups
//! (exact and segments-only approximate), next-greater-or-equal probes, and
//! posting-list intersection/union with segment-range pruning.
//!
//! Every segment spans a known key range derived from its endpoint
//! predictions widened by epsilon, so whole segments can be skipped without
//! touching residual data; `QueryStats` counts the residual words an
//! operation actually reads, which tests use to assert pruning.

use crate::codec::access;
use crate::error::{Error, Result};
use crate::types::{predict, CompressedList, KeyWidth, Segment, SortedKeyList};

/// Residual-free view of a compressed list: the model half only.
#[derive(Debug, Clone, Copy)]
pub struct ModelView<'a> {
    pub segments: &'a [Segment],
    pub epsilon: u32,
    pub n: usize,
}

impl CompressedList {
    /// Borrow the segments-only model (drops the residual array).
    pub fn model(&self) -> ModelView<'_> {
        ModelView {
            segments: &self.segments,
            epsilon: self.epsilon,
            n: self.n,
        }
    }
}

impl<'a> ModelView<'a> {
    #[inline]
    fn segment_span(&self, j: usize) -> (usize, usize) {
        let start = self.segments[j].start;
        let end = self.segments.get(j + 1).map_or(self.n, |s| s.start);
        (start, end)
    }

    #[inline]
    fn segment_index(&self, i: usize) -> usize {
        self.segments.partition_point(|s| s.start <= i) - 1
    }
}

/// Key range guaranteed to contain every key stored in one segment's span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentKeyRange {
    pub lo_key: i64,
    pub hi_key: i64,
    pub lo_idx: usize,
    pub hi_idx: usize,
}

/// Computes the key range of segment `j` from the model alone.
pub fn segment_key_range(m: ModelView<'_>, j: usize) -> SegmentKeyRange {
    let (start, end) = m.segment_span(j);
    let seg = &m.segments[j];
    SegmentKeyRange {
        lo_key: predict(seg, start) - m.epsilon as i64,
        hi_key: predict(seg, end - 1) + m.epsilon as i64,
        lo_idx: start,
        hi_idx: end - 1,
    }
}

/// Residual-read instrumentation for one query invocation.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct QueryStats {
    /// Residual words touched (one per residual value read).
    pub residual_words_read: u64,
    /// Segments skipped purely from their key range.
    pub segments_skipped: u64,
    /// Segments whose contents were actually visited.
    pub segments_visited: u64,
}

#[inline]
fn access_counted(c: &CompressedList, i: usize, stats: &mut QueryStats) -> u64 {
    if c.residuals.bit_width() > 0 {
        stats.residual_words_read += 1;
    }
    (predict(&c.segments[c.segment_index(i)], i) + c.residual(i)) as u64
}

fn quantile_index(n: usize, k: u64, q: u64) -> Result<usize> {
    if q == 0 || k < 1 || k > q {
        return Err(Error::InvalidQuantile { k, q });
    }
    let idx = (n as u128 * k as u128 / q as u128) as usize;
    Ok(idx.min(n - 1))
}

/// Exact k-th q-quantile: the key at index floor(N*k/q), clamped to N-1.
pub fn quantile_exact(c: &CompressedList, k: u64, q: u64) -> Result<u64> {
    access(c, quantile_index(c.n, k, q)?)
}

/// Approximate quantile from the segments-only model; the result is within
/// epsilon of the exact quantile.
pub fn quantile_approx(m: ModelView<'_>, k: u64, q: u64) -> Result<i64> {
    let idx = quantile_index(m.n, k, q)?;
    let seg = &m.segments[m.segment_index(idx)];
    Ok(predict(seg, idx))
}

/// Smallest index whose key is >= `x`, with the key; `None` when `x`
/// exceeds the last key.
pub fn next_geq(c: &CompressedList, x: u64) -> Option<(usize, u64)> {
    next_geq_from(c, x, 0, &mut QueryStats::default())
}

/// As `next_geq`, restricted to positions >= `from` and instrumented.
pub fn next_geq_from(
    c: &CompressedList,
    x: u64,
    from: usize,
    stats: &mut QueryStats,
) -> Option<(usize, u64)> {
    if from >= c.n {
        return None;
    }
    let first_seg = c.segment_index(from);
    let n_seg = c.segments.len();
    // Find the first segment (at or after `from`) whose last key is >= x.
    // Segment last keys are exact and strictly increasing.
    let mut lo = first_seg;
    let mut hi = n_seg; // exclusive
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let (_, end) = c.segment_span(mid);
        let last = access_counted(c, end - 1, stats);
        if last < x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if lo == n_seg {
        return None;
    }
    stats.segments_visited += 1;

    let (span_lo, span_hi) = c.segment_span(lo);
    let lo_bound = span_lo.max(from);
    let (mut w_lo, mut w_hi) = invert_window(&c.segments[lo], span_lo, span_hi, c.epsilon, x);
    w_lo = w_lo.max(lo_bound);
    w_hi = w_hi.min(span_hi - 1);
    if w_lo > w_hi {
        w_lo = lo_bound;
        w_hi = span_hi - 1;
    }
    // Keys are sorted, so binary search the window for the first >= x.
    let mut a = w_lo;
    let mut b = w_hi + 1;
    while a < b {
        let mid = a + (b - a) / 2;
        if access_counted(c, mid, stats) < x {
            a = mid + 1;
        } else {
            b = mid;
        }
    }
    if a == w_lo && a > lo_bound && access_counted(c, a - 1, stats) >= x {
        // Window missed on the low side; re-search the full remaining span.
        a = lo_bound;
        b = w_lo;
        while a < b {
            let mid = a + (b - a) / 2;
            if access_counted(c, mid, stats) < x {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        return Some((a, access_counted(c, a, stats)));
    }
    if a > w_hi {
        // The window under-covered (possible only if its math was too
        // tight); fall back to the full remaining span.
        a = lo_bound;
        b = span_hi;
        while a < b {
            let mid = a + (b - a) / 2;
            if access_counted(c, mid, stats) < x {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        if a >= span_hi {
            // Last key of this segment was >= x, so this cannot happen with
            // a consistent list; play it safe for corrupt inputs.
            return None;
        }
    }
    Some((a, access_counted(c, a, stats)))
}

/// Index window within one segment that provably brackets the smallest
/// position with key >= x, from inverting the linear model. Positions below
/// the window have prediction + eps < x; positions above have
/// prediction - eps - 1 >= x. Flat or negative slopes fall back to the
/// whole span.
fn invert_window(
    seg: &Segment,
    span_lo: usize,
    span_hi: usize,
    epsilon: u32,
    x: u64,
) -> (usize, usize) {
    let a = f64::from(seg.slope);
    if a <= 1e-9 {
        return (span_lo, span_hi - 1);
    }
    let b = f64::from(seg.intercept);
    let xf = x as f64;
    let eps = epsilon as f64;
    // Absolute f64 slop of (x - b) scaled into index units, plus floor guard.
    let slack = ((xf.abs() + b.abs()) * 1e-15 + 1.0) / a + 2.0;
    let lo = ((xf - b - eps) / a - slack).floor();
    let hi = ((xf - b + eps + 1.0) / a + slack).ceil();
    let lo = if lo <= 0.0 { 0 } else { lo as usize };
    let hi = if hi <= 0.0 { 0 } else { hi as usize };
    (
        span_lo.saturating_add(lo).min(span_hi - 1),
        span_lo.saturating_add(hi).min(span_hi - 1),
    )
}

fn output_width(a: &CompressedList, b: &CompressedList) -> KeyWidth {
    if a.key_width == KeyWidth::W64 || b.key_width == KeyWidth::W64 {
        KeyWidth::W64
    } else {
        KeyWidth::W32
    }
}

/// Keys present in both lists.
pub fn intersect(a: &CompressedList, b: &CompressedList) -> Result<SortedKeyList> {
    intersect_with_stats(a, b, &mut QueryStats::default())
}

/// Intersection with instrumentation. Iterates the shorter list's segments,
/// skipping any whose key range cannot overlap the longer list's remaining
/// keys, and gallops via `next_geq_from` inside overlapping regions.
pub fn intersect_with_stats(
    a: &CompressedList,
    b: &CompressedList,
    stats: &mut QueryStats,
) -> Result<SortedKeyList> {
    let (s, l) = if a.n <= b.n { (a, b) } else { (b, a) };
    let width = output_width(a, b);
    let mut out = Vec::new();

    let l_first = segment_key_range(l.model(), 0);
    let l_last = segment_key_range(l.model(), l.segments.len() - 1);
    let s_first = segment_key_range(s.model(), 0);
    let s_last = segment_key_range(s.model(), s.segments.len() - 1);
    if s_last.hi_key < l_first.lo_key || l_last.hi_key < s_first.lo_key {
        stats.segments_skipped += s.segments.len() as u64;
        return SortedKeyList::new(out, width);
    }

    let mut cursor = 0usize; // position in l
    'outer: for j in 0..s.segments.len() {
        let r = segment_key_range(s.model(), j);
        // Lower bound on every remaining key of l, from its segment table.
        let l_seg = l.segment_index(cursor);
        let l_lower = segment_key_range(l.model(), l_seg).lo_key;
        if r.hi_key < l_lower {
            stats.segments_skipped += 1;
            continue;
        }
        if r.lo_key > l_last.hi_key {
            stats.segments_skipped += (s.segments.len() - j) as u64;
            break;
        }
        stats.segments_visited += 1;
        for i in r.lo_idx..=r.hi_idx {
            let key = access_counted(s, i, stats);
            match next_geq_from(l, key, cursor, stats) {
                Some((idx, found)) => {
                    if found == key {
                        out.push(key);
                        cursor = idx + 1;
                        if cursor >= l.n {
                            break 'outer;
                        }
                    } else {
                        cursor = idx;
                    }
                }
                None => break 'outer,
            }
        }
    }
    SortedKeyList::new(out, width)
}

/// Keys present in either list.
pub fn union(a: &CompressedList, b: &CompressedList) -> Result<SortedKeyList> {
    union_with_stats(a, b, &mut QueryStats::default())
}

/// Union with instrumentation. When the current segment of one list lies
/// entirely below every remaining key of the other, its tail is copied
/// wholesale; otherwise the lists are merged key by key.
pub fn union_with_stats(
    a: &CompressedList,
    b: &CompressedList,
    stats: &mut QueryStats,
) -> Result<SortedKeyList> {
    let width = output_width(a, b);
    let mut out = Vec::with_capacity(a.n + b.n);
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.n && j < b.n {
        let a_seg = a.segment_index(i);
        let b_seg = b.segment_index(j);
        let ra = segment_key_range(a.model(), a_seg);
        let rb = segment_key_range(b.model(), b_seg);
        if ra.hi_key < rb.lo_key {
            stats.segments_visited += 1;
            for p in i..=ra.hi_idx {
                out.push(access_counted(a, p, stats));
            }
            i = ra.hi_idx + 1;
            continue;
        }
        if rb.hi_key < ra.lo_key {
            stats.segments_visited += 1;
            for p in j..=rb.hi_idx {
                out.push(access_counted(b, p, stats));
            }
            j = rb.hi_idx + 1;
            continue;
        }
        let ka = access_counted(a, i, stats);
        let kb = access_counted(b, j, stats);
        if ka < kb {
            out.push(ka);
            i += 1;
        } else if kb < ka {
            out.push(kb);
            j += 1;
        } else {
            out.push(ka);
            i += 1;
            j += 1;
        }
    }
    while i < a.n {
        out.push(access_counted(a, i, stats));
        i += 1;
    }
    while j < b.n {
        out.push(access_counted(b, j, stats));
        j += 1;
    }
    SortedKeyList::new(out, width)
}
