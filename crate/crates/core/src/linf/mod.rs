//! Exact L-infinity closest pair.
//!
//! `|p_i - p_j|_inf <= delta` holds exactly when `p_i[k] <= p_j[k] + delta`
//! and `p_j[k] <= p_i[k] + delta` for every `k`. [`pairs_within`] appends a
//! shifted copy of every point and reads all close pairs off one dominance
//! matrix of the `2n` points. The optimizers search for the smallest feasible
//! threshold with that decision procedure.

mod deterministic;
mod randomized;

pub use deterministic::{
    closest_pair_deterministic, closest_pair_deterministic_traced, DeterministicOptions,
    RoundStats, SearchTrace,
};
pub use randomized::{closest_pair_randomized, closest_pair_randomized_traced, RandomizedTrace};

use std::cell::Cell;

use rayon::prelude::*;

use crate::dominance::{blocked_from_coords, BlockSize, Mode};
use crate::error::{Error, Result};
use crate::geometry::{linf, PairDistance, PointSet};
use crate::matmul::KernelChoice;

/// Kernel and block size used for every dominance computation of a solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecisionConfig {
    pub kernel: KernelChoice,
    pub block_size: BlockSize,
}

impl DecisionConfig {
    pub fn new(kernel: KernelChoice, block_size: BlockSize) -> Self {
        Self { kernel, block_size }
    }
}

/// All pairs `(i, j)`, `i < j`, within distance `delta` (strictly below it
/// when `strict`), in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub delta: f64,
    pub strict: bool,
    pub pairs: Vec<(usize, usize)>,
}

impl ThresholdReport {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Maps finite floats (and `+inf`) onto integers preserving numeric order.
fn ordered(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        bits ^ i64::MAX
    } else {
        bits
    }
}

fn from_ordered(o: i64) -> f64 {
    f64::from_bits((if o < 0 { o ^ i64::MAX } else { o }) as u64)
}

/// First position (in [`ordered`] space, `+inf` included) where `pred` turns
/// false. `pred` must hold on a numeric prefix of the finite floats; `+inf`
/// counts as false. Gallops outwards from `guess`, then bisects.
fn boundary(guess: f64, pred: impl Fn(f64) -> bool) -> i64 {
    let lowest = ordered(-f64::MAX);
    let end = ordered(f64::INFINITY);
    let test = |o: i64| o < end && pred(from_ordered(o));
    let start = ordered(guess).clamp(lowest, end);
    let (mut lo, mut hi);
    let mut step = 1i64;
    if test(start) {
        lo = start;
        loop {
            let cand = lo.saturating_add(step).min(end);
            if test(cand) {
                lo = cand;
                step = step.saturating_mul(2);
            } else {
                hi = cand;
                break;
            }
        }
    } else {
        hi = start;
        loop {
            let cand = hi.saturating_sub(step);
            if cand < lowest {
                lo = lowest - 1;
                break;
            }
            if test(cand) {
                lo = cand;
                break;
            }
            hi = cand;
            step = step.saturating_mul(2);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if test(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest `x` with `x - y <= delta` as computed in `f64` (`delta >= 0`).
/// Every `x` at or below the result satisfies the inequality, every `x`
/// above fails it.
fn le_key(y: f64, delta: f64) -> f64 {
    from_ordered(boundary(y + delta, |x| x - y <= delta) - 1)
}

/// Smallest `x` with `x - y >= delta` as computed in `f64`, or `+inf` when no
/// finite `x` reaches it. `x < key` is equivalent to `x - y < delta`.
fn lt_key(y: f64, delta: f64) -> f64 {
    from_ordered(boundary(y + delta, |x| x - y < delta))
}

/// Decision procedure: every pair at L-infinity distance `<= delta`
/// (`< delta` when `strict`), via one dominance product of `2n` points.
pub fn pairs_within(
    points: &PointSet,
    delta: f64,
    strict: bool,
    config: &DecisionConfig,
) -> Result<ThresholdReport> {
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite, got {delta}"
        )));
    }
    let (n, d) = (points.len(), points.dim());
    if delta < 0.0 {
        return Ok(ThresholdReport {
            delta,
            strict,
            pairs: Vec::new(),
        });
    }

    let mut coords = Vec::with_capacity(2 * n * d);
    coords.extend_from_slice(points.coords());
    let key = if strict { lt_key } else { le_key };
    coords.extend(points.coords().iter().map(|&y| key(y, delta)));
    let mode = if strict { Mode::Lt } else { Mode::Le };
    let dom = blocked_from_coords(&coords, 2 * n, d, config.block_size, &config.kernel, mode)?;

    let full = d as u32;
    let pairs = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let dom = &dom;
            (i + 1..n)
                .filter(move |&j| dom.get(i, n + j) == full && dom.get(j, n + i) == full)
                .map(move |j| (i, j))
        })
        .collect();
    Ok(ThresholdReport {
        delta,
        strict,
        pairs,
    })
}

/// `O(n^2 d)` threshold filter with the same semantics as [`pairs_within`].
pub fn pairs_within_bruteforce(points: &PointSet, delta: f64, strict: bool) -> ThresholdReport {
    let n = points.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dist = linf(points.point(i), points.point(j));
            if if strict { dist < delta } else { dist <= delta } {
                pairs.push((i, j));
            }
        }
    }
    ThresholdReport {
        delta,
        strict,
        pairs,
    }
}

/// Smallest distance over all pairs; ties go to the lexicographically
/// smallest `(i, j)`.
pub fn closest_pair_bruteforce(points: &PointSet) -> Result<PairDistance> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let mut best = PairDistance::new(0, 1, linf(points.point(0), points.point(1)));
    for i in 0..n {
        for j in i + 1..n {
            let dist = linf(points.point(i), points.point(j));
            if dist < best.dist {
                best = PairDistance::new(i, j, dist);
            }
        }
    }
    Ok(best)
}

/// Decision procedure bound to one point set, counting its invocations.
pub(crate) struct Decider<'a> {
    points: &'a PointSet,
    config: &'a DecisionConfig,
    calls: Cell<usize>,
}

impl<'a> Decider<'a> {
    pub(crate) fn new(points: &'a PointSet, config: &'a DecisionConfig) -> Self {
        Self {
            points,
            config,
            calls: Cell::new(0),
        }
    }

    pub(crate) fn decide(&self, delta: f64, strict: bool) -> Result<ThresholdReport> {
        self.calls.set(self.calls.get() + 1);
        pairs_within(self.points, delta, strict, self.config)
    }

    pub(crate) fn calls(&self) -> usize {
        self.calls.get()
    }

    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        linf(self.points.point(i), self.points.point(j))
    }
}
