//! (min,+) and (max,+) products of bounded integer matrices, computed with a
//! single exact algebraic product over big integers.
//!
//! For entries in `[-M, M]` and inner dimension `m`, each entry `a` becomes
//! `(m+1)^(M - a)`. An entry of the algebraic product is then a sum of at most
//! `m` powers of `m+1`, so its leading base-`(m+1)` digit sits at exponent
//! `2M - min_k(a_ik + b_kj)`, somewhere in `[0, 4M]`. The (max,+) product
//! uses `(m+1)^(M + a)` instead.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::One;

use crate::dominance::predict_exponent;
use crate::error::{Error, Result};
use crate::geometry::{PairDistance, PointSet};
use crate::linf::{closest_pair_deterministic_traced, DecisionConfig, DeterministicOptions};
use crate::linf::{pairs_within, ThresholdReport};
use crate::matmul::{rect_via_square, Kernel, Matrix};

/// Default refusal threshold for the coordinate bound of encoded products.
pub const DEFAULT_BOUND_GUARD: u64 = 1 << 20;

/// Integer matrix with every entry in `[-bound, bound]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    bound: u64,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, bound: u64, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if bound > i64::MAX as u64 / 4 {
            return Err(Error::InvalidParameter(format!(
                "bound {bound} is too large"
            )));
        }
        if let Some(v) = data.iter().find(|v| v.unsigned_abs() > bound) {
            return Err(Error::InvalidParameter(format!(
                "entry {v} lies outside [-{bound}, {bound}]"
            )));
        }
        Ok(Self {
            rows,
            cols,
            bound,
            data,
        })
    }

    /// Builds a matrix whose bound is the largest absolute entry.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        let data = rows.concat();
        let bound = data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        Self::new(rows.len(), cols, bound, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn negated(&self) -> Self {
        Self {
            data: self.data.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn transposed(&self) -> Self {
        let data = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            bound: self.bound,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    MinPlus,
    MaxPlus,
    /// All-pairs L-infinity distances.
    Linf,
}

impl ProductKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProductKind::MinPlus => "minplus",
            ProductKind::MaxPlus => "maxplus",
            ProductKind::Linf => "linf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    kind: ProductKind,
    data: Vec<i64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, kind: ProductKind, data: Vec<i64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, kind, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn negated(&self) -> Self {
        Self {
            data: self.data.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

fn check_shapes(a: &IntMatrix, b: &IntMatrix) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            expected: a.cols,
            found: b.rows,
        });
    }
    if b.cols != a.rows {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: b.cols,
        });
    }
    if a.cols == 0 {
        return Err(Error::InvalidParameter(
            "inner dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

fn naive_product(a: &IntMatrix, b: &IntMatrix, kind: ProductKind) -> Result<DistanceMatrix> {
    check_shapes(a, b)?;
    let n = a.rows;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let sums = (0..a.cols).map(|k| a.get(i, k) + b.get(k, j));
            let v = match kind {
                ProductKind::MinPlus => sums.min(),
                _ => sums.max(),
            };
            data.push(v.expect("inner dimension is positive"));
        }
    }
    DistanceMatrix::new(n, kind, data)
}

/// Triple-loop `c_ij = min_k (a_ik + b_kj)`.
pub fn minplus_naive(a: &IntMatrix, b: &IntMatrix) -> Result<DistanceMatrix> {
    naive_product(a, b, ProductKind::MinPlus)
}

/// Triple-loop `c_ij = max_k (a_ik + b_kj)`.
pub fn maxplus_naive(a: &IntMatrix, b: &IntMatrix) -> Result<DistanceMatrix> {
    naive_product(a, b, ProductKind::MaxPlus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedOptions {
    /// Square kernel for the big-integer product; bitpack is rejected.
    pub kernel: Kernel,
    pub bound_guard: u64,
}

impl Default for EncodedOptions {
    fn default() -> Self {
        Self {
            kernel: Kernel::Naive,
            bound_guard: DEFAULT_BOUND_GUARD,
        }
    }
}

/// Lazily filled table of `base^e` for `e` in `[0, len)`.
struct Powers {
    base: BigInt,
    log2_base: f64,
    table: Vec<OnceLock<BigInt>>,
}

impl Powers {
    fn new(base: u64, max_exponent: u64) -> Self {
        Self {
            base: BigInt::from(base),
            log2_base: (base as f64).log2(),
            table: (0..=max_exponent + 1).map(|_| OnceLock::new()).collect(),
        }
    }

    fn get(&self, e: u64) -> &BigInt {
        self.table[e as usize].get_or_init(|| num_traits::pow(self.base.clone(), e as usize))
    }

    /// Largest `e <= max` with `base^e <= value` (`value >= 1`): a bisection
    /// over exponents, started from the window the bit length allows.
    fn floor_log(&self, value: &BigInt, max: u64) -> u64 {
        let bits = value.bits() as f64;
        let guess_lo = ((bits - 1.0) / self.log2_base - 2.0).floor().max(0.0) as u64;
        let guess_hi = ((bits / self.log2_base).ceil() as u64 + 1).min(max);
        let search = |mut lo: u64, mut hi: u64| {
            // Invariant: base^lo <= value, and base^(hi + 1) > value or hi == max.
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if self.get(mid) <= value {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        };
        let window_ok = guess_lo <= guess_hi
            && self.get(guess_lo.min(max)) <= value
            && (guess_hi == max || self.get(guess_hi + 1) > value);
        if window_ok {
            search(guess_lo.min(max), guess_hi)
        } else {
            search(0, max)
        }
    }
}

fn encoded_product(
    a: &IntMatrix,
    b: &IntMatrix,
    kind: ProductKind,
    options: &EncodedOptions,
) -> Result<DistanceMatrix> {
    check_shapes(a, b)?;
    if options.kernel == Kernel::Bitpack {
        return Err(Error::InapplicableKernel("bitpack"));
    }
    let bound = a.bound.max(b.bound);
    if bound > options.bound_guard {
        return Err(Error::BoundTooLarge {
            bound,
            guard: options.bound_guard,
        });
    }
    let m = a.cols as u64;
    // Encoded exponents lie in [0, 2M]; product exponents in [0, 4M].
    let max_exponent = 4 * bound;
    let powers = Powers::new(m + 1, max_exponent);
    let exponent = |v: i64| -> u64 {
        match kind {
            ProductKind::MinPlus => (bound as i64 - v) as u64,
            _ => (bound as i64 + v) as u64,
        }
    };
    let encode = |x: &IntMatrix| {
        Matrix::from_fn(x.rows, x.cols, |i, j| {
            powers.get(exponent(x.get(i, j))).clone()
        })
    };
    let product = rect_via_square(&encode(a), &encode(b), options.kernel)?;

    let n = a.rows;
    let mut data = Vec::with_capacity(n * n);
    for value in product.as_slice() {
        debug_assert!(*value >= BigInt::one());
        let e = powers.floor_log(value, max_exponent) as i64;
        data.push(match kind {
            ProductKind::MinPlus => 2 * bound as i64 - e,
            _ => e - 2 * bound as i64,
        });
    }
    DistanceMatrix::new(n, kind, data)
}

/// (min,+) product via one big-integer algebraic product.
pub fn minplus_encoded(
    a: &IntMatrix,
    b: &IntMatrix,
    options: &EncodedOptions,
) -> Result<DistanceMatrix> {
    encoded_product(a, b, ProductKind::MinPlus, options)
}

/// (max,+) product via one big-integer algebraic product.
pub fn maxplus_encoded(
    a: &IntMatrix,
    b: &IntMatrix,
    options: &EncodedOptions,
) -> Result<DistanceMatrix> {
    encoded_product(a, b, ProductKind::MaxPlus, options)
}

fn integer_bound(points: &PointSet) -> Result<u64> {
    points
        .domain()
        .integer_bound()
        .ok_or(Error::NotIntegerDomain)
}

fn coordinate_matrix(points: &PointSet) -> Result<IntMatrix> {
    let bound = integer_bound(points)?;
    let data = points.coords().iter().map(|&v| v as i64).collect();
    IntMatrix::new(points.len(), points.dim(), bound, data)
}

/// All-pairs L-infinity distances of an integer point set: with
/// `C = A (max,+) (-A)^T`, `L[i][j] = max(C[i][j], C[j][i])`.
pub fn allpairs_linf_integer(
    points: &PointSet,
    options: &EncodedOptions,
) -> Result<DistanceMatrix> {
    let a = coordinate_matrix(points)?;
    let c = maxplus_encoded(&a, &a.negated().transposed(), options)?;
    let n = points.len();
    let data = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| c.get(i, j).max(c.get(j, i)))
        .collect();
    DistanceMatrix::new(n, ProductKind::Linf, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegerStrategy {
    /// Pick minplus or dominance by the cost model.
    Auto,
    /// Smallest off-diagonal entry of the all-pairs distance matrix.
    MinPlus,
    /// The strongly polynomial deterministic search.
    Dominance,
    /// Bisection over the integer thresholds `[0, 2M]`.
    Bisect,
}

impl IntegerStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            IntegerStrategy::Auto => "auto",
            IntegerStrategy::MinPlus => "minplus",
            IntegerStrategy::Dominance => "dominance",
            IntegerStrategy::Bisect => "bisect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerOptions {
    pub decision: DecisionConfig,
    pub encoded: EncodedOptions,
    /// Machine-word operations per unit of encoded-entry work, relative to
    /// one dominance-model operation. Calibration knob for `Auto`.
    pub word_factor: f64,
}

impl Default for IntegerOptions {
    fn default() -> Self {
        Self {
            decision: DecisionConfig::default(),
            encoded: EncodedOptions::default(),
            word_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegerSolution {
    pub pair: PairDistance,
    /// Strategy that actually ran (never `Auto`).
    pub strategy: IntegerStrategy,
    pub decision_calls: usize,
}

/// Modelled costs `(minplus, dominance)` for `n` points in `d` dimensions
/// with coordinates bounded by `bound`.
pub fn strategy_costs(n: usize, d: usize, bound: u64, word_factor: f64) -> (f64, f64) {
    let (nf, df) = (n.max(2) as f64, d as f64);
    let entry_bits = (4 * bound + 1) as f64 * (df + 1.0).log2();
    let minplus = nf * nf * df * (entry_bits / 64.0).ceil().max(1.0) * word_factor;
    let zeta = df.ln() / nf.ln();
    let exponent = if zeta <= 0.0 {
        2.0
    } else {
        predict_exponent(zeta).map_or(2.0 + zeta, |p| p.exponent)
    };
    let dominance = nf.powf(exponent) * nf.log2().powi(2);
    (minplus, dominance)
}

pub fn closest_pair_integer(
    points: &PointSet,
    strategy: IntegerStrategy,
    options: &IntegerOptions,
) -> Result<IntegerSolution> {
    let bound = integer_bound(points)?;
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let strategy = match strategy {
        IntegerStrategy::Auto => {
            let (minplus, dominance) = strategy_costs(n, points.dim(), bound, options.word_factor);
            if bound <= options.encoded.bound_guard && minplus <= dominance {
                IntegerStrategy::MinPlus
            } else {
                IntegerStrategy::Dominance
            }
        }
        other => other,
    };
    match strategy {
        IntegerStrategy::MinPlus => {
            let l = allpairs_linf_integer(points, &options.encoded)?;
            let mut best = (0, 1, l.get(0, 1));
            for i in 0..n {
                for j in i + 1..n {
                    if l.get(i, j) < best.2 {
                        best = (i, j, l.get(i, j));
                    }
                }
            }
            Ok(IntegerSolution {
                pair: PairDistance::new(best.0, best.1, best.2 as f64),
                strategy,
                decision_calls: 0,
            })
        }
        IntegerStrategy::Dominance => {
            let (pair, trace) = closest_pair_deterministic_traced(
                points,
                &options.decision,
                DeterministicOptions::default(),
            )?;
            Ok(IntegerSolution {
                pair,
                strategy,
                decision_calls: trace.decision_calls,
            })
        }
        IntegerStrategy::Bisect => {
            let (pair, calls) = bisect_integer(points, bound, &options.decision)?;
            Ok(IntegerSolution {
                pair,
                strategy,
                decision_calls: calls,
            })
        }
        IntegerStrategy::Auto => unreachable!(),
    }
}

/// Smallest feasible integer threshold in `[0, 2M]`; the diameter never
/// exceeds `2M`, so the top of the range is feasible without a probe.
fn bisect_integer(
    points: &PointSet,
    bound: u64,
    config: &DecisionConfig,
) -> Result<(PairDistance, usize)> {
    let (mut lo, mut hi) = (0u64, 2 * bound);
    let mut calls = 0;
    let mut best: Option<ThresholdReport> = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        calls += 1;
        let report = pairs_within(points, mid as f64, false, config)?;
        if report.is_empty() {
            lo = mid + 1;
        } else {
            hi = mid;
            best = Some(report);
        }
    }
    let report = match best.filter(|r| r.delta == hi as f64) {
        Some(report) => report,
        None => {
            calls += 1;
            pairs_within(points, hi as f64, false, config)?
        }
    };
    let &(i, j) = report.pairs.first().expect("diameter bound is feasible");
    Ok((PairDistance::new(i, j, hi as f64), calls))
}
