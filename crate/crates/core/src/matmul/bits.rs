use super::dense::CountMatrix;

const WORD: usize = u64::BITS as usize;

/// 0/1 matrix with each row packed into `u64` words. Bits past `cols` in the
/// last word of a row are always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j);
                }
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| i == j)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.words_per_row + j / WORD] |= 1 << (j % WORD);
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words_per_row + j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Unpacks into a 0/1 count matrix.
    pub fn to_counts(&self) -> CountMatrix {
        CountMatrix::from_fn(self.rows, self.cols, |i, j| i64::from(self.get(i, j)))
    }

    /// Unpacks the transpose into a 0/1 count matrix.
    pub fn to_counts_transposed(&self) -> CountMatrix {
        CountMatrix::from_fn(self.cols, self.rows, |i, j| i64::from(self.get(j, i)))
    }

    pub(crate) fn padding_is_zero(&self) -> bool {
        let tail = self.cols % WORD;
        tail == 0 || (0..self.rows).all(|i| self.row_words(i).last().is_none_or(|w| w >> tail == 0))
    }
}

/// Population count of the word-wise AND of two packed rows.
#[inline]
pub fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}
