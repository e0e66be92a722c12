//! Dominance products via fast matrix multiplication, and their use for the
//! exact L-infinity closest pair problem.
//!
//! * [`geometry`]: point sets, distances, rank tables, point files.
//! * [`matmul`]: Boolean and integer matrix products (naive, bit-packed, Strassen).
//! * [`dominance`]: blocked dominance products and the exponent predictor.
//! * [`linf`]: the threshold decision procedure and closest-pair searches.
//! * [`distance_product`]: (min,+)/(max,+) products for bounded integer inputs.
//! * [`format`]: CSV and binary matrix output.

pub mod distance_product;
pub mod dominance;
pub mod error;
pub mod format;
pub mod geometry;
pub mod linf;
pub mod matmul;

pub use error::{Error, Result};
