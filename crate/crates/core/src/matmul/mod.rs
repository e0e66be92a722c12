//! Exact integer matrix products.
//!
//! Three kernels are available: a row-oriented triple loop, a bit-packed
//! kernel for 0/1 operands (word-wise AND plus popcount), and Strassen's
//! recursion over any [`Element`] ring. Every kernel computes rows of the
//! output independently and sums chunk products in a fixed order, so results
//! are identical for any thread count.

mod bits;
mod dense;

pub use bits::{and_popcount, BitMatrix};
pub use dense::{CountMatrix, Element, Matrix};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_STRASSEN_THRESHOLD: usize = 128;
pub const MIN_STRASSEN_THRESHOLD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Naive,
    Bitpack,
    /// Recurse while the dimension exceeds `threshold`, then fall back to naive.
    Strassen {
        threshold: usize,
    },
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Naive => "naive",
            Kernel::Bitpack => "bitpack",
            Kernel::Strassen { .. } => "strassen",
        }
    }

    /// Exponent the block-size chooser assumes for this kernel. Bitpacking
    /// only buys a constant factor.
    pub fn default_exponent(&self) -> f64 {
        match self {
            Kernel::Naive | Kernel::Bitpack => 3.0,
            Kernel::Strassen { .. } => 2.807,
        }
    }
}

/// A kernel together with the cost exponent used for block-size selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelChoice {
    kernel: Kernel,
    effective_exponent: f64,
}

impl KernelChoice {
    pub fn new(kernel: Kernel) -> Result<Self> {
        Self::with_exponent(kernel, kernel.default_exponent())
    }

    pub fn with_exponent(kernel: Kernel, effective_exponent: f64) -> Result<Self> {
        if let Kernel::Strassen { threshold } = kernel {
            if threshold < MIN_STRASSEN_THRESHOLD {
                return Err(Error::InvalidParameter(format!(
                    "strassen threshold must be at least {MIN_STRASSEN_THRESHOLD}, got {threshold}"
                )));
            }
        }
        if !(effective_exponent > 2.0 && effective_exponent <= 3.0) {
            return Err(Error::InvalidParameter(format!(
                "effective exponent must lie in (2, 3], got {effective_exponent}"
            )));
        }
        Ok(Self {
            kernel,
            effective_exponent,
        })
    }

    pub fn naive() -> Self {
        Self {
            kernel: Kernel::Naive,
            effective_exponent: 3.0,
        }
    }

    pub fn bitpack() -> Self {
        Self {
            kernel: Kernel::Bitpack,
            effective_exponent: 3.0,
        }
    }

    pub fn strassen() -> Self {
        Self {
            kernel: Kernel::Strassen {
                threshold: DEFAULT_STRASSEN_THRESHOLD,
            },
            effective_exponent: 2.807,
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn effective_exponent(&self) -> f64 {
        self.effective_exponent
    }
}

impl Default for KernelChoice {
    fn default() -> Self {
        Self::bitpack()
    }
}

/// Triple-loop product of an `r x k` and a `k x c` matrix.
pub fn naive_product<T: Element>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            expected: a.cols,
            found: b.rows,
        });
    }
    T::check_product_range(a, b, a.cols)?;
    Ok(naive_unchecked(a, b))
}

fn naive_unchecked<T: Element>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (rows, cols) = (a.rows, b.cols);
    let mut out = Matrix::zeros(rows, cols);
    if cols == 0 {
        return out;
    }
    out.data
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, acc)| {
            for (t, x) in a.row(i).iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (slot, y) in acc.iter_mut().zip(b.row(t)) {
                    slot.add_product(x, y);
                }
            }
        });
    out
}

/// Strassen product of two square matrices. Dimensions at or below
/// `threshold` use the naive kernel; odd dimensions are zero-padded by one.
pub fn strassen_square<T: Element>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    threshold: usize,
) -> Result<Matrix<T>> {
    let n = a.rows;
    if let Some(&found) = [a.cols, b.rows, b.cols].iter().find(|&&x| x != n) {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    if threshold < MIN_STRASSEN_THRESHOLD {
        return Err(Error::InvalidParameter(format!(
            "strassen threshold must be at least {MIN_STRASSEN_THRESHOLD}, got {threshold}"
        )));
    }
    T::check_product_range(a, b, n)?;
    Ok(strassen_rec(a, b, threshold))
}

fn strassen_rec<T: Element>(a: &Matrix<T>, b: &Matrix<T>, threshold: usize) -> Matrix<T> {
    let n = a.rows;
    if n <= threshold {
        return naive_unchecked(a, b);
    }
    let h = n.div_ceil(2);
    let q = |m: &Matrix<T>, r: usize, c: usize| m.window(r * h, c * h, h, h);
    let (a11, a12, a21, a22) = (q(a, 0, 0), q(a, 0, 1), q(a, 1, 0), q(a, 1, 1));
    let (b11, b12, b21, b22) = (q(b, 0, 0), q(b, 0, 1), q(b, 1, 0), q(b, 1, 1));

    let operands = [
        (a11.add_matrix(&a22), b11.add_matrix(&b22)),
        (a21.add_matrix(&a22), b11.clone()),
        (a11.clone(), b12.sub_matrix(&b22)),
        (a22.clone(), b21.sub_matrix(&b11)),
        (a11.add_matrix(&a12), b22.clone()),
        (a21.sub_matrix(&a11), b11.add_matrix(&b12)),
        (a12.sub_matrix(&a22), b21.add_matrix(&b22)),
    ];
    let m: Vec<Matrix<T>> = operands
        .par_iter()
        .map(|(x, y)| strassen_rec(x, y, threshold))
        .collect();

    let c11 = m[0].add_matrix(&m[3]).sub_matrix(&m[4]).add_matrix(&m[6]);
    let c12 = m[2].add_matrix(&m[4]);
    let c21 = m[1].add_matrix(&m[3]);
    let c22 = m[0].sub_matrix(&m[1]).add_matrix(&m[2]).add_matrix(&m[5]);

    Matrix::from_fn(n, n, |i, j| {
        let block = match (i < h, j < h) {
            (true, true) => &c11,
            (true, false) => &c12,
            (false, true) => &c21,
            (false, false) => &c22,
        };
        block.get(i % h, j % h).clone()
    })
}

/// Product of an `n x K` and a `K x n` matrix computed as a sum of square
/// `n x n` products: `K` is cut into `ceil(K / n)` column chunks (the last one
/// zero-padded) and the chunk products are accumulated in chunk order.
pub fn rect_via_square<T: Element>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    kernel: Kernel,
) -> Result<Matrix<T>> {
    let (n, k) = (a.rows, a.cols);
    if b.rows != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: b.rows,
        });
    }
    if b.cols != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.cols,
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "inner dimension must be at least 1".into(),
        ));
    }
    T::check_product_range(a, b, k)?;

    if kernel == Kernel::Bitpack {
        let bit = |v: &T| v.as_bit().ok_or(Error::InapplicableKernel("bitpack"));
        let mut pa = BitMatrix::zeros(n, k);
        let mut pb = BitMatrix::zeros(n, k);
        for i in 0..n {
            for t in 0..k {
                if bit(a.get(i, t))? {
                    pa.set(i, t);
                }
                if bit(b.get(t, i))? {
                    pb.set(i, t);
                }
            }
        }
        return Ok(bitpack_product(&pa, &pb).map(|&v| T::from_i64(v)));
    }

    let mut acc = Matrix::zeros(n, n);
    if n == 0 {
        return Ok(acc);
    }
    for start in (0..k).step_by(n) {
        let chunk_a = a.window(0, start, n, n);
        let chunk_b = b.window(start, 0, n, n);
        let product = match kernel {
            Kernel::Naive => naive_unchecked(&chunk_a, &chunk_b),
            Kernel::Strassen { threshold } => strassen_rec(&chunk_a, &chunk_b, threshold),
            Kernel::Bitpack => unreachable!(),
        };
        acc.accumulate(&product);
    }
    Ok(acc)
}

fn bitpack_product(a: &BitMatrix, b: &BitMatrix) -> CountMatrix {
    let (rows, cols) = (a.rows(), b.rows());
    let mut out = CountMatrix::zeros(rows, cols);
    if cols == 0 {
        return out;
    }
    out.data
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, acc)| {
            let ra = a.row_words(i);
            for (j, slot) in acc.iter_mut().enumerate() {
                *slot = i64::from(and_popcount(ra, b.row_words(j)));
            }
        });
    out
}

/// `result[i][j] = sum_t A[i][t] * B[j][t]` for 0/1 matrices sharing a column count.
pub fn count_product(a: &BitMatrix, b: &BitMatrix, kernel: &KernelChoice) -> Result<CountMatrix> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: b.cols(),
        });
    }
    if u32::try_from(a.cols()).map_or(true, |k| k >= 1 << 31) {
        return Err(Error::Overflow(format!(
            "inner dimension {} exceeds 2^31",
            a.cols()
        )));
    }
    debug_assert!(a.padding_is_zero() && b.padding_is_zero());
    match kernel.kernel() {
        Kernel::Bitpack => Ok(bitpack_product(a, b)),
        other => {
            if a.rows() != b.rows() {
                return Err(Error::DimensionMismatch {
                    expected: a.rows(),
                    found: b.rows(),
                });
            }
            if a.cols() == 0 || a.rows() == 0 {
                return Ok(CountMatrix::zeros(a.rows(), b.rows()));
            }
            rect_via_square(&a.to_counts(), &b.to_counts_transposed(), other)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference(a: &BitMatrix, b: &BitMatrix) -> CountMatrix {
        CountMatrix::from_fn(a.rows(), b.rows(), |i, j| {
            (0..a.cols())
                .filter(|&t| a.get(i, t) && b.get(j, t))
                .count() as i64
        })
    }

    fn random_bits(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> BitMatrix {
        BitMatrix::from_fn(rows, cols, |_, _| rng.gen_bool(p))
    }

    fn kernels() -> [KernelChoice; 4] {
        [
            KernelChoice::naive(),
            KernelChoice::bitpack(),
            KernelChoice::strassen(),
            KernelChoice::new(Kernel::Strassen { threshold: 16 }).unwrap(),
        ]
    }

    #[test]
    fn identity_and_all_ones() {
        for k in kernels() {
            let id = BitMatrix::identity(2);
            assert_eq!(
                count_product(&id, &id, &k).unwrap(),
                CountMatrix::identity(2)
            );
            let ones = BitMatrix::from_fn(3, 5, |_, _| true);
            let c = count_product(&ones, &ones, &k).unwrap();
            assert!(c.as_slice().iter().all(|&v| v == 5));
        }
    }

    #[test]
    fn random_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_bits(&mut rng, 16, 40, 0.5);
        let b = random_bits(&mut rng, 16, 40, 0.5);
        let expected = reference(&a, &b);
        for k in kernels() {
            assert_eq!(count_product(&a, &b, &k).unwrap(), expected, "{k:?}");
        }
    }

    #[test]
    fn kernels_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.gen_range(1..=128);
            let k = rng.gen_range(1..=200);
            let p = rng.gen_range(0.05..0.95);
            let a = random_bits(&mut rng, n, k, p);
            let b = random_bits(&mut rng, n, k, p);
            let expected = count_product(&a, &b, &KernelChoice::naive()).unwrap();
            for kernel in kernels() {
                assert_eq!(
                    count_product(&a, &b, &kernel).unwrap(),
                    expected,
                    "n={n} k={k}"
                );
            }
        }
        let a = random_bits(&mut rng, 40, 70, 0.5);
        assert_eq!(
            reference(&a, &a),
            count_product(&a, &a, &KernelChoice::naive()).unwrap()
        );
    }

    #[test]
    fn zero_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_bits(&mut rng, 9, 33, 0.5);
        let z = BitMatrix::zeros(9, 33);
        for k in kernels() {
            let c = count_product(&z, &b, &k).unwrap();
            assert!(c.as_slice().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn mismatched_columns_rejected() {
        let a = BitMatrix::zeros(2, 3);
        let b = BitMatrix::zeros(2, 4);
        assert!(matches!(
            count_product(&a, &b, &KernelChoice::bitpack()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn strassen_base_cases() {
        let a = CountMatrix::from_vec(1, 1, vec![6]).unwrap();
        let b = CountMatrix::from_vec(1, 1, vec![7]).unwrap();
        assert_eq!(strassen_square(&a, &b, 16).unwrap().as_slice(), &[42]);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CountMatrix::from_fn(37, 37, |_, _| rng.gen_range(-9..=9));
        assert_eq!(
            strassen_square(&a, &CountMatrix::identity(37), 16).unwrap(),
            a
        );
        assert!(strassen_square(&a, &a, 8).is_err());
    }

    #[test]
    fn strassen_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let a = CountMatrix::from_fn(64, 64, |_, _| rng.gen_range(-20..=20));
        let b = CountMatrix::from_fn(64, 64, |_, _| rng.gen_range(-20..=20));
        let expected = naive_product(&a, &b).unwrap();
        assert_eq!(strassen_square(&a, &b, 16).unwrap(), expected);

        for n in [17, 33, 50, 100] {
            let a = CountMatrix::from_fn(n, n, |_, _| rng.gen_range(0..=3));
            let b = CountMatrix::from_fn(n, n, |_, _| rng.gen_range(0..=3));
            assert_eq!(
                strassen_square(&a, &b, 16).unwrap(),
                naive_product(&a, &b).unwrap()
            );
        }
    }

    #[test]
    fn strassen_over_big_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Matrix::<BigInt>::from_fn(40, 40, |_, _| BigInt::from(rng.gen::<i64>()) << 70);
        let b = Matrix::<BigInt>::from_fn(40, 40, |_, _| BigInt::from(rng.gen::<i64>()));
        assert_eq!(
            strassen_square(&a, &b, 16).unwrap(),
            naive_product(&a, &b).unwrap()
        );
    }

    #[test]
    fn overflow_is_reported() {
        let a = CountMatrix::from_vec(2, 2, vec![i64::MAX / 4; 4]).unwrap();
        assert!(matches!(naive_product(&a, &a), Err(Error::Overflow(_))));
        assert!(matches!(
            strassen_square(&a, &a, 16),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn rect_via_square_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = CountMatrix::from_fn(6, 6, |_, _| rng.gen_range(0..5));
        let b = CountMatrix::from_fn(6, 6, |_, _| rng.gen_range(0..5));
        assert_eq!(
            rect_via_square(&a, &b, Kernel::Naive).unwrap(),
            naive_product(&a, &b).unwrap()
        );

        let col = CountMatrix::from_vec(3, 1, vec![1, 2, 3]).unwrap();
        let row = CountMatrix::from_vec(1, 3, vec![4, 5, 6]).unwrap();
        let outer = rect_via_square(&col, &row, Kernel::Naive).unwrap();
        assert_eq!(outer.as_slice(), &[4, 5, 6, 8, 10, 12, 12, 15, 18]);

        let a = CountMatrix::from_fn(8, 20, |_, _| rng.gen_range(0..2));
        let b = CountMatrix::from_fn(20, 8, |_, _| rng.gen_range(0..2));
        let expected = CountMatrix::from_fn(8, 8, |i, j| {
            (0..20).map(|t| a.get(i, t) * b.get(t, j)).sum()
        });
        for kernel in [
            Kernel::Naive,
            Kernel::Bitpack,
            Kernel::Strassen { threshold: 16 },
        ] {
            assert_eq!(rect_via_square(&a, &b, kernel).unwrap(), expected);
        }

        let non_bool = CountMatrix::from_vec(1, 1, vec![2]).unwrap();
        assert_eq!(
            rect_via_square(&non_bool, &non_bool, Kernel::Bitpack),
            Err(Error::InapplicableKernel("bitpack"))
        );
        assert!(rect_via_square(&a, &a, Kernel::Naive).is_err());
    }

    #[test]
    fn kernel_choice_validation() {
        assert!(KernelChoice::new(Kernel::Strassen { threshold: 15 }).is_err());
        assert!(KernelChoice::with_exponent(Kernel::Naive, 2.0).is_err());
        assert!(KernelChoice::with_exponent(Kernel::Naive, 3.5).is_err());
        assert_eq!(KernelChoice::strassen().effective_exponent(), 2.807);
    }
}
