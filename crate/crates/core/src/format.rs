//! Bit-exact serialization of compressed lists and partition plans, plus
//! corpus ingestion for benchmark datasets.
//!
//! Single-list layout ("LCI1", little-endian throughout):
//!
//! | field         | size | notes                                   |
//! |---------------|------|-----------------------------------------|
//! | magic         | 4    | `LCI1`                                  |
//! | version       | 1    | currently 1                             |
//! | key_width     | 1    | 32 or 64                                |
//! | epsilon       | 4    | u32                                     |
//! | n             | 8    | u64 key count                           |
//! | segment_count | 8    | u64                                     |
//! | flags         | 1    | bit0: residuals present                 |
//!
//! followed by `segment_count` records of exactly 12 bytes (start u32,
//! slope f32, intercept f32) and, when flags bit0 is set, the residual
//! bitstream padded to an 8-byte boundary. Clearing bit0 yields the
//! segments-only file used for approximate query processing.
//!
//! Plan files ("LCP1") hold a part count and the concatenated length-
//! prefixed LCI1 blobs of each partition.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{
    residual_bit_width, CompressedList, KeyWidth, ResidualArray, Segment, SortedKeyList,
};

pub const MAGIC: &[u8; 4] = b"LCI1";
pub const PLAN_MAGIC: &[u8; 4] = b"LCP1";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 27;
pub const SEGMENT_BYTES: usize = 12;
const FLAG_RESIDUALS: u8 = 1;

/// Segments-only counterpart of a compressed list: decodes approximately
/// (within epsilon) but stores no residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentsOnlyList {
    pub epsilon: u32,
    pub n: usize,
    pub key_width: KeyWidth,
    pub segments: Vec<Segment>,
}

/// Contents of an LCI1 file.
#[derive(Debug, Clone, PartialEq)]
pub enum LciFile {
    Full(CompressedList),
    SegmentsOnly(SegmentsOnlyList),
}

/// Declared padding: bits that align the residual section to 8 bytes.
pub fn padding_bits(c: &CompressedList) -> u64 {
    let logical = c.n as u64 * residual_bit_width(c.epsilon) as u64;
    c.residuals.payload().len() as u64 * 64 - logical
}

fn push_header(out: &mut Vec<u8>, c: &CompressedList, flags: u8) {
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(c.key_width.bits() as u8);
    out.extend_from_slice(&c.epsilon.to_le_bytes());
    out.extend_from_slice(&(c.n as u64).to_le_bytes());
    out.extend_from_slice(&(c.segments.len() as u64).to_le_bytes());
    out.push(flags);
}

fn push_segments(out: &mut Vec<u8>, segments: &[Segment]) -> Result<()> {
    for seg in segments {
        let start = u32::try_from(seg.start)
            .map_err(|_| Error::SegmentStartOverflow(seg.start))?;
        out.extend_from_slice(&start.to_le_bytes());
        out.extend_from_slice(&seg.slope.to_le_bytes());
        out.extend_from_slice(&seg.intercept.to_le_bytes());
    }
    Ok(())
}

/// Serializes a full compressed list, byte-for-byte deterministic.
pub fn serialize(c: &CompressedList) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(
        HEADER_BYTES + SEGMENT_BYTES * c.segments.len() + c.residuals.payload().len() * 8,
    );
    push_header(&mut out, c, FLAG_RESIDUALS);
    push_segments(&mut out, &c.segments)?;
    for &w in c.residuals.payload() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}

/// Serializes the segments-only form (flags bit0 cleared, no residuals).
pub fn serialize_segments_only(c: &CompressedList) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_BYTES + SEGMENT_BYTES * c.segments.len());
    push_header(&mut out, c, 0);
    push_segments(&mut out, &c.segments)?;
    Ok(out)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::TruncatedPayload);
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn read_u32(bytes: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, 4)?.try_into().unwrap()))
}

fn read_u64(bytes: &mut &[u8]) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8)?.try_into().unwrap()))
}

/// Parses an LCI1 file, full or segments-only. Rejects trailing bytes.
pub fn read_list(mut bytes: &[u8]) -> Result<LciFile> {
    let b = &mut bytes;
    if take(b, 4)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = take(b, 1)?[0];
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let key_width = KeyWidth::from_bits(take(b, 1)?[0])
        .ok_or(Error::CorruptPayload("key width must be 32 or 64"))?;
    let epsilon = read_u32(b)?;
    let n = read_u64(b)? as usize;
    let segment_count = read_u64(b)? as usize;
    let flags = take(b, 1)?[0];
    if n == 0 || segment_count == 0 {
        return Err(Error::CorruptPayload("empty list or segment table"));
    }
    // Length sanity before any allocation sized from header fields.
    if segment_count > b.len() / SEGMENT_BYTES {
        return Err(Error::TruncatedPayload);
    }

    let mut segments = Vec::with_capacity(segment_count);
    for _ in 0..segment_count {
        let rec = take(b, SEGMENT_BYTES)?;
        segments.push(Segment::new(
            u32::from_le_bytes(rec[0..4].try_into().unwrap()) as usize,
            f32::from_le_bytes(rec[4..8].try_into().unwrap()),
            f32::from_le_bytes(rec[8..12].try_into().unwrap()),
        ));
    }
    if segments[0].start != 0
        || segments.windows(2).any(|w| w[1].start <= w[0].start)
        || segments.last().unwrap().start >= n
    {
        return Err(Error::NonMonotoneSegments);
    }

    if flags & FLAG_RESIDUALS == 0 {
        if !b.is_empty() {
            return Err(Error::TruncatedPayload);
        }
        return Ok(LciFile::SegmentsOnly(SegmentsOnlyList {
            epsilon,
            n,
            key_width,
            segments,
        }));
    }

    let bw = residual_bit_width(epsilon);
    let n_words = n
        .checked_mul(bw as usize)
        .ok_or(Error::TruncatedPayload)?
        .div_ceil(64);
    if n_words > b.len() / 8 {
        return Err(Error::TruncatedPayload);
    }
    let mut words = Vec::with_capacity(n_words);
    for _ in 0..n_words {
        words.push(read_u64(b)?);
    }
    if !b.is_empty() {
        return Err(Error::TruncatedPayload);
    }
    Ok(LciFile::Full(CompressedList {
        epsilon,
        n,
        key_width,
        segments,
        residuals: ResidualArray::from_words(words, bw, n)?,
    }))
}

/// Parses a full LCI1 file; segments-only input is an error here.
pub fn deserialize(bytes: &[u8]) -> Result<CompressedList> {
    match read_list(bytes)? {
        LciFile::Full(c) => Ok(c),
        LciFile::SegmentsOnly(_) => Err(Error::CorruptPayload(
            "file is segments-only (no residuals); cannot decode losslessly",
        )),
    }
}

/// Serializes a partition plan as length-prefixed LCI1 blobs.
pub fn serialize_plan(parts: &[CompressedList]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(PLAN_MAGIC);
    out.push(VERSION);
    let width = parts
        .first()
        .map_or(32, |p| p.key_width.bits() as u8);
    out.push(width);
    out.extend_from_slice(&(parts.len() as u64).to_le_bytes());
    let total: u64 = parts.iter().map(|p| p.n as u64).sum();
    out.extend_from_slice(&total.to_le_bytes());
    for p in parts {
        let blob = serialize(p)?;
        out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
        out.extend_from_slice(&blob);
    }
    Ok(out)
}

/// Parses a partition-plan file back into its per-partition lists.
pub fn deserialize_plan(mut bytes: &[u8]) -> Result<Vec<CompressedList>> {
    let b = &mut bytes;
    if take(b, 4)? != PLAN_MAGIC {
        return Err(Error::BadMagic);
    }
    let version = take(b, 1)?[0];
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let _width = take(b, 1)?[0];
    let part_count = read_u64(b)? as usize;
    let total = read_u64(b)? as usize;
    if part_count > b.len() / 8 {
        return Err(Error::TruncatedPayload);
    }
    let mut parts = Vec::with_capacity(part_count);
    for _ in 0..part_count {
        let len = read_u64(b)? as usize;
        parts.push(deserialize(take(b, len)?)?);
    }
    if !b.is_empty() || parts.iter().map(|p| p.n).sum::<usize>() != total {
        return Err(Error::TruncatedPayload);
    }
    Ok(parts)
}

/// On-disk representations accepted for raw key lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One decimal integer per line.
    TextLines,
    /// Little-endian u32 array.
    BinaryU32,
    /// Little-endian u64 array.
    BinaryU64,
}

impl InputFormat {
    /// Guesses from the file extension: `.txt` means text, anything else
    /// 32-bit binary.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") => InputFormat::TextLines,
            Some("u64") => InputFormat::BinaryU64,
            _ => InputFormat::BinaryU32,
        }
    }
}

fn parse_keys(bytes: &[u8], format: InputFormat) -> Result<Vec<u64>> {
    match format {
        InputFormat::TextLines => {
            let text = std::str::from_utf8(bytes)
                .map_err(|_| Error::ParseError("input is not valid UTF-8".into()))?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| {
                    l.parse::<u64>()
                        .map_err(|e| Error::ParseError(format!("bad integer {l:?}: {e}")))
                })
                .collect()
        }
        InputFormat::BinaryU32 => {
            if !bytes.len().is_multiple_of(4) {
                return Err(Error::ParseError("file size is not a multiple of 4".into()));
            }
            Ok(bytes
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as u64)
                .collect())
        }
        InputFormat::BinaryU64 => {
            if !bytes.len().is_multiple_of(8) {
                return Err(Error::ParseError("file size is not a multiple of 8".into()));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        }
    }
}

/// Reads a key list from disk. Sortedness is verified, never repaired.
pub fn ingest_keys(path: &Path, format: InputFormat) -> Result<SortedKeyList> {
    let keys = parse_keys(&fs::read(path)?, format)?;
    SortedKeyList::from_keys(keys)
}

/// Writes raw keys in the given format (inverse of `ingest_keys`).
pub fn write_keys(path: &Path, keys: &SortedKeyList, format: InputFormat) -> Result<()> {
    let mut out = Vec::new();
    match format {
        InputFormat::TextLines => {
            for k in keys.keys() {
                out.extend_from_slice(k.to_string().as_bytes());
                out.push(b'\n');
            }
        }
        InputFormat::BinaryU32 => {
            for &k in keys.keys() {
                let v = u32::try_from(k)
                    .map_err(|_| Error::ParseError(format!("key {k} exceeds u32")))?;
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        InputFormat::BinaryU64 => {
            for &k in keys.keys() {
                out.extend_from_slice(&k.to_le_bytes());
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a count-prefixed multi-list corpus: repeated records of a u32
/// length followed by that many u32 keys, all little-endian.
pub fn ingest_corpus_u32(path: &Path) -> Result<Vec<SortedKeyList>> {
    let bytes = fs::read(path)?;
    let mut rest: &[u8] = &bytes;
    let mut lists = Vec::new();
    while !rest.is_empty() {
        let len = read_u32(&mut rest)? as usize;
        let body = take(&mut rest, len * 4)?;
        let keys: Vec<u64> = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as u64)
            .collect();
        lists.push(SortedKeyList::new(keys, KeyWidth::W32)?);
    }
    Ok(lists)
}

/// Writes a count-prefixed multi-list corpus (inverse of `ingest_corpus_u32`).
pub fn write_corpus_u32(path: &Path, lists: &[SortedKeyList]) -> Result<()> {
    let mut out = Vec::new();
    for l in lists {
        out.extend_from_slice(&(l.len() as u32).to_le_bytes());
        for &k in l.keys() {
            let v = u32::try_from(k)
                .map_err(|_| Error::ParseError(format!("key {k} exceeds u32")))?;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}
