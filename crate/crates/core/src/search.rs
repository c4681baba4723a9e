//! Enumeration kernels shared by the exhaustive oracles.

use std::ops::ControlFlow;

use crate::gf2::{BitVec, SparseBitMatrix};

/// Number of `k`-subsets of an `n`-set, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `Σ_{w ≤ wmax} C(n, w)`, saturating.
pub fn ball_size(n: usize, wmax: usize) -> u64 {
    (0..=wmax.min(n)).fold(0u64, |acc, w| acc.saturating_add(binomial(n, w)))
}

/// Columns of a matrix packed as bit words, for incremental syndrome updates.
#[derive(Clone, Debug)]
pub struct PackedColumns {
    rows: usize,
    words: usize,
    data: Vec<u64>,
}

impl PackedColumns {
    pub fn new(m: &SparseBitMatrix) -> Self {
        let words = m.rows().div_ceil(64).max(1);
        let mut data = vec![0u64; words * m.cols()];
        for r in 0..m.rows() {
            for &c in m.row(r) {
                data[c * words + r / 64] ^= 1u64 << (r % 64);
            }
        }
        Self { rows: m.rows(), words, data }
    }

    /// Packs explicit column vectors of equal length.
    pub fn from_columns(rows: usize, cols: &[BitVec]) -> Self {
        let words = rows.div_ceil(64).max(1);
        let mut data = vec![0u64; words * cols.len()];
        for (c, v) in cols.iter().enumerate() {
            assert_eq!(v.len(), rows);
            data[c * words..c * words + v.words().len()].copy_from_slice(v.words());
        }
        Self { rows, words, data }
    }

    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.len() / self.words
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[u64] {
        &self.data[c * self.words..(c + 1) * self.words]
    }

    /// Packs a vector of length `rows` into the word layout.
    pub fn pack(&self, v: &BitVec) -> Vec<u64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0u64; self.words];
        out[..v.words().len()].copy_from_slice(v.words());
        out
    }

    pub fn unpack(&self, w: &[u64]) -> BitVec {
        BitVec::from_words(self.rows, w[..self.rows.div_ceil(64)].to_vec())
    }

    /// XOR of the selected columns.
    pub fn combine(&self, support: &[usize]) -> Vec<u64> {
        let mut acc = vec![0u64; self.words];
        for &c in support {
            xor_into(&mut acc, self.column(c));
        }
        acc
    }
}

#[inline]
pub fn xor_into(acc: &mut [u64], v: &[u64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a ^= b;
    }
}

#[inline]
pub fn words_weight(v: &[u64]) -> usize {
    v.iter().map(|w| w.count_ones() as usize).sum()
}

/// Visits every `w`-subset of the columns in lexicographic order, passing
/// the subset and the XOR of its columns. Stops early on `Break`.
pub fn for_each_combination<F>(cols: &PackedColumns, w: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize], &[u64]) -> ControlFlow<()>,
{
    let n = cols.cols();
    let words = cols.words();
    if w > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = Vec::with_capacity(w);
    let mut acc = vec![0u64; words * (w + 1)];
    if w == 0 {
        return f(&idx, &acc[..words]);
    }
    let mut next = 0usize;
    loop {
        let depth = idx.len();
        if depth < w && next <= n - (w - depth) {
            let (lo, hi) = acc.split_at_mut((depth + 1) * words);
            let parent = &lo[depth * words..];
            let child = &mut hi[..words];
            let col = cols.column(next);
            for i in 0..words {
                child[i] = parent[i] ^ col[i];
            }
            idx.push(next);
            next += 1;
            if idx.len() == w {
                f(&idx, &acc[w * words..(w + 1) * words])?;
                let last = idx.pop().unwrap();
                next = last + 1;
            }
        } else {
            match idx.pop() {
                Some(last) => next = last + 1,
                None => return ControlFlow::Continue(()),
            }
        }
    }
}

/// Visits every element of the span of `basis` in Gray-code order, passing
/// the current vector and the coefficient mask (bit `i` = basis element `i`).
///
/// # Panics
/// Panics if the basis has more than 63 elements.
pub fn for_each_span_element<F>(basis: &[Vec<u64>], words: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[u64], u64) -> ControlFlow<()>,
{
    assert!(basis.len() < 64, "span enumeration limited to 63 generators");
    let mut cur = vec![0u64; words];
    let mut mask = 0u64;
    f(&cur, mask)?;
    let total: u64 = 1u64 << basis.len();
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        xor_into(&mut cur, &basis[bit]);
        mask ^= 1u64 << bit;
        f(&cur, mask)?;
    }
    ControlFlow::Continue(())
}
