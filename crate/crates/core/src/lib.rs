//! Lossless learned compression for sorted integer lists.
//!
//! Keys are approximated by an error-bounded piecewise linear model; the
//! signed gap between each key and its floored prediction is bit-packed at
//! a fixed width derived from the error bound. The pair (model, residuals)
//! reproduces the input exactly, supports random access and quantile
//! queries directly, and lets list intersection skip whole segments from
//! their key ranges alone.
//!
//! ```
//! use lci_core::{codec, SortedKeyList};
//!
//! let keys = SortedKeyList::from_keys((1..=1000).map(|i| i + i * i / 7).collect())?;
//! let compressed = codec::compress(&keys, 8)?;
//! assert_eq!(codec::decompress(&compressed)?, keys);
//! assert_eq!(codec::access(&compressed, 123)?, keys.keys()[123]);
//! # Ok::<(), lci_core::Error>(())
//! ```

// Predictions are functions of the key index; range loops keep that math
// visible in the kernels.
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod codec;
pub mod error;
pub mod fitter;
pub mod format;
pub mod partition;
pub mod query;
pub mod tuner;
pub mod types;

pub use error::{Error, Result};
pub use types::{CompressedList, KeyWidth, ResidualArray, Segment, SortedKeyList};
