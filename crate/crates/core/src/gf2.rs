//! Bit-packed vectors and matrices over GF(2).
//!
//! Everything that needs a rank (entanglement entropy, cut-rank, canonical
//! stabilizer forms) goes through [`BitMatrix::rank`] or
//! [`BitMatrix::row_reduce`]. Rows are packed into `u64` words, least
//! significant bit first.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND, i.e. the GF(2) dot product.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// First set bit at or after `from`.
    pub fn first_one_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / WORD;
        let mut w = self.words[wi] & (!0u64 << (from % WORD));
        loop {
            if w != 0 {
                let idx = wi * WORD + w.trailing_zeros() as usize;
                return (idx < self.len).then_some(idx);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Grow (or shrink) to `len` bits; new bits are zero.
    pub fn resize(&mut self, len: usize) {
        self.words.resize(len.div_ceil(WORD), 0);
        if len < self.len && !len.is_multiple_of(WORD) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (len % WORD)) - 1;
            }
        }
        self.len = len;
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Row-major dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged GF(2) matrix");
        Self { rows, cols }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// Sub-matrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let picked = rows
            .iter()
            .map(|&r| {
                let src = &self.rows[r];
                let mut v = BitVec::zeros(cols.len());
                for (j, &c) in cols.iter().enumerate() {
                    if src.get(c) {
                        v.set(j, true);
                    }
                }
                v
            })
            .collect();
        BitMatrix::from_rows(cols.len(), picked)
    }

    /// Reduced row-echelon form in place; returns the pivot columns.
    /// Zero rows end up at the bottom.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == self.rows.len() {
                break;
            }
            let Some(p) = (next..self.rows.len()).find(|&r| self.rows[r].get(col)) else {
                continue;
            };
            self.rows.swap(next, p);
            let pivot = self.rows[next].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(col);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // forward elimination only; cheaper than the full reduction
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail.iter_mut() {
                if row.get(col) {
                    row.xor_assign(pivot);
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&str]) -> BitMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        BitMatrix::from_rows(
            cols,
            rows.iter()
                .map(|r| BitVec::from_bools(&r.bytes().map(|b| b == b'1').collect::<Vec<_>>()))
                .collect(),
        )
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(matrix(&["10", "01"]).rank(), 2);
        assert_eq!(matrix(&["11", "11"]).rank(), 1);
        assert_eq!(matrix(&["110", "011", "101"]).rank(), 2);
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
        assert_eq!(BitMatrix::zeros(0, 0).rank(), 0);
    }

    #[test]
    fn row_reduce_is_canonical() {
        let mut a = matrix(&["110", "011"]);
        let mut b = matrix(&["101", "011"]);
        assert_eq!(a.row_reduce(), vec![0, 1]);
        assert_eq!(b.row_reduce(), vec![0, 1]);
        assert_eq!(a, b);
    }

    #[test]
    fn iter_ones_crosses_word_boundaries() {
        let mut v = BitVec::zeros(200);
        for i in [0, 63, 64, 130, 199] {
            v.set(i, true);
        }
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 130, 199]);
        assert_eq!(v.first_one_from(65), Some(130));
        assert_eq!(v.first_one_from(200), None);
        assert_eq!(v.count_ones(), 5);
    }

    #[test]
    fn resize_clears_truncated_bits() {
        let mut v = BitVec::from_bools(&[true; 10]);
        v.resize(3);
        v.resize(10);
        assert_eq!(v.count_ones(), 3);
    }

    #[test]
    fn dot_is_parity_of_and() {
        let a = BitVec::from_bools(&[true, true, false, true]);
        let b = BitVec::from_bools(&[true, true, true, false]);
        assert!(!a.dot(&b));
        let c = BitVec::from_bools(&[true, false, true, false]);
        assert!(a.dot(&c));
    }
}
