//! Dominance products.
//!
//! For points `p_0 .. p_{n-1}` the dominance matrix counts, for every ordered
//! pair `(i, j)`, the coordinates where `p_i` is below `p_j`:
//!
//! * [`Mode::Le`]: `#{k : p_i[k] <= p_j[k]}`
//! * [`Mode::Lt`]: `#{k : p_i[k] <  p_j[k]}`
//! * [`Mode::Eq`]: `#{k : p_i[k] == p_j[k]}`
//!
//! [`dominance_naive`] is the `O(d n^2)` definition. [`dominance_blocked`]
//! sorts every coordinate, groups consecutive ranks into blocks of size `s`,
//! counts cross-block dominances with one Boolean matrix product over the
//! concatenated block layout, and counts same-block dominances by scanning
//! backwards inside each block. Both run on the tie-broken rank order; a
//! separate pass over runs of equal values turns the strict rank counts into
//! the requested mode.

mod exponent;

pub use exponent::{
    huang_pan_exponents, predict_exponent, Anchor, ExponentModel, LinearBound, PredictedExponent,
    Regime, MAX_SUPPORTED_ZETA, SMALL_DIMENSION_LIMIT,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{PointSet, RankTable};
use crate::matmul::{count_product, BitMatrix, KernelChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Le,
    Lt,
    Eq,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Le => "le",
            Mode::Lt => "lt",
            Mode::Eq => "eq",
        }
    }

    #[inline]
    fn holds(&self, a: f64, b: f64) -> bool {
        match self {
            Mode::Le => a <= b,
            Mode::Lt => a < b,
            Mode::Eq => a == b,
        }
    }
}

/// Largest supported dimension; counts are stored in 32 bits.
pub const MAX_DIMENSION: usize = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceMatrix {
    n: usize,
    d: usize,
    mode: Mode,
    counts: Vec<u32>,
}

impl DominanceMatrix {
    pub fn from_counts(n: usize, d: usize, mode: Mode, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: counts.len(),
            });
        }
        if let Some(&c) = counts.iter().find(|&&c| c as usize > d) {
            return Err(Error::InvalidParameter(format!(
                "count {c} exceeds dimension {d}"
            )));
        }
        Ok(Self { n, d, mode, counts })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.counts[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }
}

/// Rank-block layout for [`dominance_blocked`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPlan {
    block_size: usize,
    blocks: usize,
    columns: usize,
}

impl BlockPlan {
    pub fn new(n: usize, d: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 || block_size > n {
            return Err(Error::InvalidParameter(format!(
                "block size must lie in [1, {n}], got {block_size}"
            )));
        }
        let blocks = n.div_ceil(block_size);
        Ok(Self {
            block_size,
            blocks,
            columns: d * blocks,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// `ceil(n / s)`; the last block may be short.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Width of the concatenated Boolean layout, `d * blocks`.
    pub fn columns(&self) -> usize {
        self.columns
    }
}

/// How [`dominance_blocked`] picks its block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockSize {
    /// [`choose_block_size`] for the kernel in use.
    #[default]
    Auto,
    Fixed(usize),
}

/// Balances the Boolean product (`d n^w / s` with `w` the kernel's effective
/// exponent) against the in-block scan (`n d s`): `s = n^((w - 1) / 2)`,
/// rounded and clamped to `[1, n]`.
pub fn choose_block_size(n: usize, d: usize, kernel: &KernelChoice) -> BlockPlan {
    let n = n.max(1);
    let exponent = (kernel.effective_exponent() - 1.0) / 2.0;
    let s = (n as f64).powf(exponent).round().clamp(1.0, n as f64) as usize;
    BlockPlan::new(n, d, s).expect("clamped block size is valid")
}

fn check_dimension(d: usize) -> Result<()> {
    if d > MAX_DIMENSION {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} exceeds 2^31 - 1"
        )));
    }
    Ok(())
}

pub fn dominance_naive(points: &PointSet, mode: Mode) -> DominanceMatrix {
    naive_from_coords(points.coords(), points.len(), points.dim(), mode)
}

pub(crate) fn naive_from_coords(coords: &[f64], n: usize, d: usize, mode: Mode) -> DominanceMatrix {
    let mut counts = vec![0u32; n * n];
    if n > 0 {
        counts.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let p = &coords[i * d..(i + 1) * d];
            for (j, slot) in row.iter_mut().enumerate() {
                let q = &coords[j * d..(j + 1) * d];
                *slot = p
                    .iter()
                    .zip(q)
                    .filter(|(a, b)| mode.holds(**a, **b))
                    .count() as u32;
            }
        });
    }
    DominanceMatrix { n, d, mode, counts }
}

pub fn dominance_blocked(
    points: &PointSet,
    block_size: BlockSize,
    kernel: &KernelChoice,
    mode: Mode,
) -> Result<DominanceMatrix> {
    blocked_from_coords(
        points.coords(),
        points.len(),
        points.dim(),
        block_size,
        kernel,
        mode,
    )
}

/// Blocked dominance on a raw row-major buffer (infinite values allowed).
pub(crate) fn blocked_from_coords(
    coords: &[f64],
    n: usize,
    d: usize,
    block_size: BlockSize,
    kernel: &KernelChoice,
    mode: Mode,
) -> Result<DominanceMatrix> {
    check_dimension(d)?;
    let plan = match block_size {
        BlockSize::Auto => choose_block_size(n, d, kernel),
        BlockSize::Fixed(s) => BlockPlan::new(n, d, s)?,
    };
    let ranks = RankTable::from_coords(coords, n, d);
    let s = plan.block_size();

    // Concatenated layout: column `b * d + k` belongs to block `b`.
    // above[i] marks rank blocks equal to b, below[j] marks blocks strictly after b.
    let mut above = BitMatrix::zeros(n, plan.columns());
    let mut below = BitMatrix::zeros(n, plan.columns());
    for k in 0..d {
        for (i, &r) in ranks.ranks(k).iter().enumerate() {
            let block = r / s;
            above.set(i, block * d + k);
            for b in 0..block {
                below.set(i, b * d + k);
            }
        }
    }
    let cross = count_product(&above, &below, kernel)?;

    // Per target j: predecessors in the same block (in_block[j][x]) and
    // predecessors carrying an equal value (equal_before[j][x]).
    let mut in_block = vec![0u32; n * n];
    let mut equal_before = vec![0u32; n * n];
    in_block
        .par_chunks_mut(n)
        .zip(equal_before.par_chunks_mut(n))
        .enumerate()
        .for_each(|(j, (block_row, equal_row))| {
            for k in 0..d {
                let order = ranks.order(k);
                let pos = ranks.rank(k, j);
                let start = pos / s * s;
                for &x in &order[start..pos] {
                    block_row[x] += 1;
                }
                let value = coords[j * d + k];
                for &x in order[..pos].iter().rev() {
                    if coords[x * d + k] != value {
                        break;
                    }
                    equal_row[x] += 1;
                }
            }
        });

    let mut counts = vec![0u32; n * n];
    counts.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            // #{k : rank_k(i) < rank_k(j)}
            let strict_rank = *cross.get(i, j) as u32 + in_block[j * n + i];
            let diag = if i == j { d as u32 } else { 0 };
            *slot = match mode {
                Mode::Le => strict_rank + equal_before[i * n + j] + diag,
                Mode::Lt => strict_rank - equal_before[j * n + i],
                Mode::Eq => equal_before[j * n + i] + equal_before[i * n + j] + diag,
            };
        }
    });
    debug_assert!(counts.iter().all(|&c| c as usize <= d));
    Ok(DominanceMatrix { n, d, mode, counts })
}
