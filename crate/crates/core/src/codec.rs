//! Encode a key list into a compressed form and decode it back.
//!
//! Decoding reconstructs `key[i] = floor(f(i)) + delta[i]` per segment. The
//! blocked kernel processes fixed chunks of eight positions with hoisted
//! segment parameters and branch-free residual unpacking so the inner loop
//! carries no dependency between lanes; the scalar kernel is the
//! straightforward element-at-a-time reference.

use crate::error::{Error, Result};
use crate::fitter;
use crate::types::{
    decode_bias, encode_bias, predict, residual_bit_width, CompressedList, ResidualArray,
    SortedKeyList,
};

/// Width of one decode block; fits common SIMD lane counts.
pub const BLOCK: usize = 8;

/// Bits used by one serialized segment record.
pub const SEGMENT_BITS: u64 = 96;

/// Bits used by the fixed file header (see `format`).
pub const HEADER_BITS: u64 = 27 * 8;

/// Exact bit accounting for a compressed list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceReport {
    pub segment_bits: u64,
    pub residual_bits: u64,
    pub header_bits: u64,
    pub total_bits: u64,
    pub bits_per_int: f64,
    pub ratio: f64,
}

/// Compresses `keys` at error bound `epsilon`.
pub fn compress(keys: &SortedKeyList, epsilon: u32) -> Result<CompressedList> {
    let fit = fitter::fit(keys, epsilon)?;
    let width = residual_bit_width(epsilon);
    let ks = keys.keys();
    let mut biased = Vec::with_capacity(ks.len());
    for (j, seg) in fit.segments.iter().enumerate() {
        let end = fit.segments.get(j + 1).map_or(ks.len(), |s| s.start);
        for i in seg.start..end {
            let delta = ks[i] as i64 - predict(seg, i);
            biased.push(encode_bias(delta, epsilon));
        }
    }
    Ok(CompressedList {
        epsilon,
        n: ks.len(),
        key_width: keys.width(),
        segments: fit.segments,
        residuals: ResidualArray::pack(&biased, width),
    })
}

/// Validates structural invariants shared by the decode paths.
fn validate(c: &CompressedList) -> Result<()> {
    if c.n == 0 || c.segments.is_empty() {
        return Err(Error::CorruptPayload("empty list or segment table"));
    }
    if c.segments[0].start != 0 {
        return Err(Error::CorruptPayload("first segment does not start at 0"));
    }
    for w in c.segments.windows(2) {
        if w[1].start <= w[0].start || w[1].start >= c.n {
            return Err(Error::CorruptPayload("segment starts non-monotone"));
        }
    }
    if c.residuals.len() != c.n || c.residuals.bit_width() != residual_bit_width(c.epsilon) {
        return Err(Error::CorruptPayload("residual array shape mismatch"));
    }
    Ok(())
}

/// Fully decodes `c`, verifying the output is a strictly sorted key list.
pub fn decompress(c: &CompressedList) -> Result<SortedKeyList> {
    validate(c)?;
    let mut out = vec![0u64; c.n];
    decode_into_blocked(c, &mut out);
    SortedKeyList::new(out, c.key_width)
        .map_err(|_| Error::CorruptPayload("decoded keys are not strictly sorted"))
}

/// Blocked decode kernel. `out` must hold exactly `c.n` values. Performs no
/// validation; `decompress` is the checked entry point.
pub fn decode_into_blocked(c: &CompressedList, out: &mut [u64]) {
    debug_assert_eq!(out.len(), c.n);
    let eps = c.epsilon as i64;
    let bw = c.residuals.bit_width();
    let mask = ResidualArray::mask(bw);
    let words = c.residuals.words();

    // Branch-free 64-bit window starting at `bit`; valid while the bits of
    // interest fit in 64 (callers guarantee that via the lane grouping).
    // Safety: for any in-range residual bit, bit/64 + 1 is within the word
    // buffer because packing keeps a sentinel word past the payload.
    let window = |bit: usize| -> u64 {
        let (w, off) = (bit / 64, (bit % 64) as u32);
        debug_assert!(w + 1 < words.len());
        unsafe {
            (words.get_unchecked(w) >> off) | (words.get_unchecked(w + 1) << 1 << (63 - off))
        }
    };

    for j in 0..c.segments.len() {
        let (start, end) = c.segment_span(j);
        let slope = f64::from(c.segments[j].slope);
        let intercept = f64::from(c.segments[j].intercept);
        if bw == 0 {
            // epsilon = 0: every residual is zero, pure model evaluation.
            for idx in start..end {
                out[idx] = (slope * (idx - start) as f64 + intercept).floor() as u64;
            }
            continue;
        }
        let mut i = start;
        // Two independent streams per block: predictions (pure float lanes)
        // and residuals (wide-window bit extraction), fused only at the
        // final add/store.
        while i + BLOCK <= end {
            let x0 = (i - start) as f64;
            let mut preds = [0i64; BLOCK];
            for lane in 0..BLOCK {
                preds[lane] = (slope * (x0 + lane as f64) + intercept).floor() as i64;
            }
            let mut res = [0u64; BLOCK];
            if bw <= 16 {
                // Half-block windows: 4 lanes of <= 16 bits fit in 64.
                for half in 0..2 {
                    let win = window((i + 4 * half) * bw as usize);
                    for lane in 0..4 {
                        res[4 * half + lane] = (win >> (lane as u32 * bw)) & mask;
                    }
                }
            } else {
                for lane in 0..BLOCK {
                    res[lane] = window((i + lane) * bw as usize) & mask;
                }
            }
            let chunk: &mut [u64] = &mut out[i..i + BLOCK];
            for lane in 0..BLOCK {
                chunk[lane] = (preds[lane] + (res[lane] as i64 - eps)) as u64;
            }
            i += BLOCK;
        }
        while i < end {
            let pred = (slope * (i - start) as f64 + intercept).floor() as i64;
            out[i] = (pred + decode_bias(c.residuals.get(i), c.epsilon)) as u64;
            i += 1;
        }
    }
}

/// Scalar decode kernel: per-element prediction and bit extraction.
pub fn decode_into_scalar(c: &CompressedList, out: &mut [u64]) {
    debug_assert_eq!(out.len(), c.n);
    for j in 0..c.segments.len() {
        let (start, end) = c.segment_span(j);
        let seg = &c.segments[j];
        for i in start..end {
            let pred = predict(seg, i);
            out[i] = (pred + c.residual(i)) as u64;
        }
    }
}

/// Reconstructs the single key at position `i` without decoding the rest:
/// binary search over segment starts, one prediction, one residual read.
pub fn access(c: &CompressedList, i: usize) -> Result<u64> {
    if i >= c.n {
        return Err(Error::IndexOutOfRange { index: i, len: c.n });
    }
    let seg = &c.segments[c.segment_index(i)];
    Ok((predict(seg, i) + c.residual(i)) as u64)
}

/// Exact bit accounting per the compressed layout.
pub fn space_report(c: &CompressedList) -> SpaceReport {
    let segment_bits = SEGMENT_BITS * c.segments.len() as u64;
    let residual_bits = c.n as u64 * residual_bit_width(c.epsilon) as u64;
    let total_bits = segment_bits + residual_bits + HEADER_BITS;
    let raw_bits = c.n as u64 * c.key_width.bits() as u64;
    SpaceReport {
        segment_bits,
        residual_bits,
        header_bits: HEADER_BITS,
        total_bits,
        bits_per_int: total_bits as f64 / c.n as f64,
        ratio: total_bits as f64 / raw_bits as f64,
    }
}
