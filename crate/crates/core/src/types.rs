//! Shared domain types and the arithmetic conventions every other module
//! relies on: floor semantics, 0-based indexing, and biased residual storage.
//!
//! A compressed list is a piecewise linear model plus a bit-packed residual
//! array. Predictions are made from 32-bit stored parameters widened to f64,
//! then floored toward negative infinity; residuals are the (signed) gap
//! between the true key and that floored prediction.

use crate::error::{Error, Result};

/// Largest supported key value (exclusive). Predictions are evaluated in
/// f64 and floored into i64; capping keys below 2^62 leaves headroom for
/// the +-epsilon band around the top of the universe.
pub const MAX_KEY: u64 = 1 << 62;

/// Key width of the uncompressed input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyWidth {
    W32,
    W64,
}

impl KeyWidth {
    pub fn bits(self) -> u32 {
        match self {
            KeyWidth::W32 => 32,
            KeyWidth::W64 => 64,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            32 => Some(KeyWidth::W32),
            64 => Some(KeyWidth::W64),
            _ => None,
        }
    }

    /// Narrowest width that can hold every key in `keys`.
    pub fn infer(keys: &[u64]) -> Self {
        if keys.last().is_some_and(|&k| k > u32::MAX as u64) {
            KeyWidth::W64
        } else {
            KeyWidth::W32
        }
    }
}

/// A strictly increasing list of unsigned integer keys.
///
/// Construction validates strict monotonicity; duplicates and out-of-range
/// keys are rejected rather than silently fixed. An empty list is a valid
/// value (query results may be empty) but cannot be compressed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedKeyList {
    keys: Vec<u64>,
    width: KeyWidth,
}

impl SortedKeyList {
    pub fn new(keys: Vec<u64>, width: KeyWidth) -> Result<Self> {
        for (pos, pair) in keys.windows(2).enumerate() {
            if pair[1] == pair[0] {
                return Err(Error::DuplicateKey { pos: pos + 1 });
            }
            if pair[1] < pair[0] {
                return Err(Error::UnsortedInput { pos: pos + 1 });
            }
        }
        for (pos, &key) in keys.iter().enumerate() {
            if key >= MAX_KEY {
                return Err(Error::KeyOutOfRange { pos, key });
            }
            if width == KeyWidth::W32 && key > u32::MAX as u64 {
                return Err(Error::KeyWidthMismatch { pos, key });
            }
        }
        Ok(Self { keys, width })
    }

    /// Builds a list inferring the narrowest width.
    pub fn from_keys(keys: Vec<u64>) -> Result<Self> {
        let width = KeyWidth::infer(&keys);
        Self::new(keys, width)
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn width(&self) -> KeyWidth {
        self.width
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn into_keys(self) -> Vec<u64> {
        self.keys
    }

    /// Copies out the sub-list covering positions `[lo, hi)`. A sub-range
    /// of a valid list needs no re-validation.
    pub fn slice(&self, lo: usize, hi: usize) -> SortedKeyList {
        SortedKeyList {
            keys: self.keys[lo..hi].to_vec(),
            width: self.width,
        }
    }
}

/// One linear piece of the model: starting index `start` (0-based, into the
/// key list), slope and intercept stored as f32 per the 12-byte layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub slope: f32,
    pub intercept: f32,
}

impl Segment {
    pub fn new(start: usize, slope: f32, intercept: f32) -> Self {
        Self {
            start,
            slope,
            intercept,
        }
    }
}

/// Floored model prediction at index `i`.
///
/// The stored f32 parameters are widened to f64, the product and sum are
/// evaluated in f64, and the result is floored toward negative infinity.
/// May be negative or exceed the key universe; callers clamp where needed.
#[inline]
pub fn predict(seg: &Segment, i: usize) -> i64 {
    debug_assert!(i >= seg.start);
    let x = (i - seg.start) as f64;
    (f64::from(seg.slope) * x + f64::from(seg.intercept)).floor() as i64
}

/// Bits needed to store one residual at error bound `epsilon`:
/// ceil(log2(2*epsilon + 1)). Zero when epsilon is zero.
#[inline]
pub fn residual_bit_width(epsilon: u32) -> u32 {
    let span = 2 * epsilon as u64 + 1;
    u64::BITS - (span - 1).leading_zeros()
}

/// Biased residual encoding: delta in [-epsilon, +epsilon] stored as the
/// unsigned value delta + epsilon in [0, 2*epsilon].
#[inline]
pub fn encode_bias(delta: i64, epsilon: u32) -> u64 {
    debug_assert!(delta.unsigned_abs() <= epsilon as u64);
    (delta + epsilon as i64) as u64
}

#[inline]
pub fn decode_bias(value: u64, epsilon: u32) -> i64 {
    value as i64 - epsilon as i64
}

/// Fixed-width bit-packed residuals, little-endian bit order.
///
/// Bit `i*b + j` of the stream lives in 64-bit word `(i*b + j) / 64` at bit
/// offset `(i*b + j) % 64`; words serialize little-endian, which makes the
/// byte-level order little-endian as well. One zero sentinel word is kept
/// past the payload so reads never branch on the word boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualArray {
    bit_width: u32,
    count: usize,
    words: Vec<u64>,
}

impl ResidualArray {
    /// Packs `values[i]` (already bias-encoded, each < 2^bit_width).
    pub fn pack(values: &[u64], bit_width: u32) -> Self {
        assert!(bit_width <= 64);
        let n_words = Self::payload_words(values.len(), bit_width);
        let mut words = vec![0u64; n_words + 1];
        if bit_width > 0 {
            debug_assert!(
                bit_width == 64 || values.iter().all(|&v| v < 1u64 << bit_width)
            );
            for (i, &v) in values.iter().enumerate() {
                let bit = i * bit_width as usize;
                let (w, off) = (bit / 64, (bit % 64) as u32);
                words[w] |= v << off;
                if off + bit_width > 64 {
                    words[w + 1] = v >> (64 - off);
                }
            }
        }
        Self {
            bit_width,
            count: values.len(),
            words,
        }
    }

    /// Rebuilds from serialized payload words (sentinel re-appended here).
    pub fn from_words(mut words: Vec<u64>, bit_width: u32, count: usize) -> Result<Self> {
        if bit_width > 64 || words.len() != Self::payload_words(count, bit_width) {
            return Err(Error::CorruptPayload("residual payload length mismatch"));
        }
        words.push(0);
        Ok(Self {
            bit_width,
            count,
            words,
        })
    }

    /// Unpacks the biased value at position `i`. Branch-free two-word read.
    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.count);
        if self.bit_width == 0 {
            return 0;
        }
        let bit = i * self.bit_width as usize;
        let (w, off) = (bit / 64, (bit % 64) as u32);
        // `<< 1 << (63 - off)` realizes `<< (64 - off)` without the
        // undefined shift at off == 0.
        let raw = (self.words[w] >> off) | (self.words[w + 1] << 1 << (63 - off));
        raw & Self::mask(self.bit_width)
    }

    #[inline]
    pub fn mask(bit_width: u32) -> u64 {
        if bit_width == 64 {
            u64::MAX
        } else {
            (1u64 << bit_width) - 1
        }
    }

    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Payload words excluding the sentinel.
    pub fn payload(&self) -> &[u64] {
        &self.words[..self.words.len() - 1]
    }

    /// Full word buffer including the zero sentinel, for unchecked kernels.
    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Logical payload size in bytes: ceil(count * bit_width / 8).
    pub fn payload_bytes(&self) -> usize {
        (self.count * self.bit_width as usize).div_ceil(8)
    }

    fn payload_words(count: usize, bit_width: u32) -> usize {
        (count * bit_width as usize).div_ceil(64)
    }
}

/// A compressed sorted key list: the piecewise linear model plus the
/// bit-packed residuals that make decoding exact.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedList {
    pub epsilon: u32,
    pub n: usize,
    pub key_width: KeyWidth,
    pub segments: Vec<Segment>,
    pub residuals: ResidualArray,
}

impl CompressedList {
    /// Index of the segment covering key position `i` (binary search over
    /// segment starts).
    #[inline]
    pub fn segment_index(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        self.segments.partition_point(|s| s.start <= i) - 1
    }

    /// Half-open index span `[start, end)` covered by segment `j`.
    #[inline]
    pub fn segment_span(&self, j: usize) -> (usize, usize) {
        let start = self.segments[j].start;
        let end = self
            .segments
            .get(j + 1)
            .map_or(self.n, |next| next.start);
        (start, end)
    }

    /// Signed residual at position `i`.
    #[inline]
    pub fn residual(&self, i: usize) -> i64 {
        decode_bias(self.residuals.get(i), self.epsilon)
    }
}
