//! Linear algebra over F2.
//!
//! [`BitVec`] is a bit-packed dense vector, [`SparseBitMatrix`] stores sorted
//! row supports, and elimination runs on the bit-packed [`DenseBitMatrix`].

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("row {row} support is not strictly increasing")]
    UnsortedRow { row: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Vector over F2 of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self { len, words: vec![u64::MAX; words_for(len)] };
        v.clear_tail();
        v
    }

    /// Builds a vector from 1-positions; repeated indices cancel mod 2.
    ///
    /// # Panics
    /// Panics if an index is out of range.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            assert!(i < len, "index {i} out of range for length {len}");
            v.flip(i);
        }
        v
    }

    pub fn try_from_support(len: usize, support: &[usize]) -> Result<Self, Gf2Error> {
        if let Some(&index) = support.iter().find(|&&i| i >= len) {
            return Err(Gf2Error::IndexOutOfRange { index, len });
        }
        Ok(Self::from_support(len, support))
    }

    /// Parses a string of `0`/`1` characters (whitespace ignored).
    pub fn from_bit_str(s: &str) -> Result<Self, Gf2Error> {
        let bits: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut v = Self::zeros(bits.len());
        for (i, c) in bits.iter().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(Gf2Error::Parse { line: 0, msg: format!("invalid bit character {c:?}") })
                }
            }
        }
        Ok(v)
    }

    pub fn from_words(len: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), words_for(len));
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
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
    pub fn words(&self) -> &[u64] {
        &self.words
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

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the 1-coordinates in increasing order.
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + t)
                }
            })
        })
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Weight of the coordinate-wise product.
    pub fn and_weight(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in and_weight");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Standard inner product over F2.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn concat(parts: &[&BitVec]) -> BitVec {
        let len = parts.iter().map(|p| p.len).sum();
        let mut out = BitVec::zeros(len);
        let mut off = 0;
        for p in parts {
            for i in p.iter_ones() {
                out.set(off + i, true);
            }
            off += p.len;
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        let mut out = BitVec::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bit_string())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// Sparse matrix over F2 with sorted row supports.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseBitMatrix {
    rows: usize,
    cols: usize,
    row_supports: Vec<Vec<usize>>,
}

/// One cell of a [`block_concat`] grid.
#[derive(Clone, Copy, Debug)]
pub enum Block<'a> {
    Mat(&'a SparseBitMatrix),
    Zero,
}

impl SparseBitMatrix {
    /// Validating constructor: supports must be strictly increasing and in range.
    pub fn new(rows: usize, cols: usize, row_supports: Vec<Vec<usize>>) -> Result<Self, Gf2Error> {
        if row_supports.len() != rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "expected {rows} row supports, got {}",
                row_supports.len()
            )));
        }
        for (r, sup) in row_supports.iter().enumerate() {
            if sup.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Gf2Error::UnsortedRow { row: r });
            }
            if let Some(&index) = sup.iter().find(|&&c| c >= cols) {
                return Err(Gf2Error::IndexOutOfRange { index, len: cols });
            }
        }
        Ok(Self { rows, cols, row_supports })
    }

    /// Builds from unsorted supports, cancelling repeated entries mod 2.
    ///
    /// # Panics
    /// Panics on out-of-range column indices or a wrong number of rows.
    pub fn from_rows_mod2(rows: usize, cols: usize, raw: Vec<Vec<usize>>) -> Self {
        assert_eq!(raw.len(), rows);
        let row_supports = raw
            .into_iter()
            .map(|mut r| {
                r.sort_unstable();
                let mut out: Vec<usize> = Vec::with_capacity(r.len());
                for c in r {
                    assert!(c < cols, "column {c} out of range for {cols} columns");
                    if out.last() == Some(&c) {
                        out.pop();
                    } else {
                        out.push(c);
                    }
                }
                out
            })
            .collect();
        Self { rows, cols, row_supports }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_supports: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: n, row_supports: (0..n).map(|i| vec![i]).collect() }
    }

    /// Builds from 0/1 rows.
    pub fn from_dense_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let supports = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged dense rows");
                r.iter().enumerate().filter(|(_, &b)| b & 1 == 1).map(|(i, _)| i).collect()
            })
            .collect();
        Self { rows: rows.len(), cols, row_supports: supports }
    }

    pub fn from_bitvecs(cols: usize, rows: &[BitVec]) -> Self {
        let supports = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                r.support()
            })
            .collect();
        Self { rows: rows.len(), cols, row_supports: supports }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_supports[r]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_supports
    }

    pub fn row_bitvec(&self, r: usize) -> BitVec {
        BitVec::from_support(self.cols, &self.row_supports[r])
    }

    pub fn row_bitvecs(&self) -> Vec<BitVec> {
        (0..self.rows).map(|r| self.row_bitvec(r)).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_supports[r].binary_search(&c).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.row_supports.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.row_supports.iter().all(Vec::is_empty)
    }

    pub fn max_row_weight(&self) -> usize {
        self.row_supports.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in &self.row_supports {
            for &c in r {
                w[c] += 1;
            }
        }
        w
    }

    pub fn max_col_weight(&self) -> usize {
        self.col_weights().into_iter().max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = vec![Vec::new(); self.cols];
        for (r, sup) in self.row_supports.iter().enumerate() {
            for &c in sup {
                t[c].push(r);
            }
        }
        Self { rows: self.cols, cols: self.rows, row_supports: t }
    }

    /// Matrix-vector product `M x`.
    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        let mut out = BitVec::zeros(self.rows);
        for (r, sup) in self.row_supports.iter().enumerate() {
            let mut parity = false;
            for &c in sup {
                parity ^= x.get(c);
            }
            if parity {
                out.set(r, true);
            }
        }
        out
    }

    /// Product `M^T y` without materialising the transpose.
    pub fn tr_mul_vec(&self, y: &BitVec) -> BitVec {
        assert_eq!(y.len(), self.rows, "tr_mul_vec dimension mismatch");
        let mut out = BitVec::zeros(self.cols);
        for r in y.iter_ones() {
            for &c in &self.row_supports[r] {
                out.flip(c);
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &SparseBitMatrix) -> Result<Self, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "({}x{}) * ({}x{})",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = BitVec::zeros(other.cols);
        let supports = self
            .row_supports
            .iter()
            .map(|sup| {
                for w in acc.words.iter_mut() {
                    *w = 0;
                }
                for &k in sup {
                    for &c in &other.row_supports[k] {
                        acc.flip(c);
                    }
                }
                acc.support()
            })
            .collect();
        Ok(Self { rows: self.rows, cols: other.cols, row_supports: supports })
    }

    pub fn add(&self, other: &SparseBitMatrix) -> Result<Self, Gf2Error> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch("matrix sum".into()));
        }
        let raw = self
            .row_supports
            .iter()
            .zip(&other.row_supports)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(Self::from_rows_mod2(self.rows, self.cols, raw))
    }

    /// Kronecker product.
    pub fn kron(&self, other: &SparseBitMatrix) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut supports = Vec::with_capacity(rows);
        for a in &self.row_supports {
            for b in &other.row_supports {
                let mut row = Vec::with_capacity(a.len() * b.len());
                for &ac in a {
                    for &bc in b {
                        row.push(ac * other.cols + bc);
                    }
                }
                supports.push(row);
            }
        }
        Self { rows, cols, row_supports: supports }
    }

    pub fn hstack(parts: &[&SparseBitMatrix]) -> Result<Self, Gf2Error> {
        block_concat(&[parts.iter().map(|m| Block::Mat(m)).collect()])
    }

    pub fn vstack(parts: &[&SparseBitMatrix]) -> Result<Self, Gf2Error> {
        let grid: Vec<Vec<Block>> = parts.iter().map(|m| vec![Block::Mat(m)]).collect();
        block_concat(&grid)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            rows: rows.len(),
            cols: self.cols,
            row_supports: rows.iter().map(|&r| self.row_supports[r].clone()).collect(),
        }
    }

    /// Relabels columns: column `c` moves to `perm[c]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        let supports = self
            .row_supports
            .iter()
            .map(|sup| {
                let mut r: Vec<usize> = sup.iter().map(|&c| perm[c]).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Self { rows: self.rows, cols: self.cols, row_supports: supports }
    }

    /// Relabels rows: row `r` moves to `perm[r]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rows);
        let mut supports = vec![Vec::new(); self.rows];
        for (r, sup) in self.row_supports.iter().enumerate() {
            supports[perm[r]] = sup.clone();
        }
        Self { rows: self.rows, cols: self.cols, row_supports: supports }
    }

    pub fn to_dense(&self) -> DenseBitMatrix {
        let mut d = DenseBitMatrix::zeros(self.rows, self.cols);
        for (r, sup) in self.row_supports.iter().enumerate() {
            for &c in sup {
                d.set(r, c, true);
            }
        }
        d
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }

    pub fn kernel_basis(&self) -> Vec<BitVec> {
        kernel_basis(self)
    }

    /// Serialises to the text format: `rows cols`, then one line of column indices per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for sup in &self.row_supports {
            let line: Vec<String> = sup.iter().map(ToString::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Gf2Error::Parse { line: 1, msg: "missing header".into() })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| Gf2Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
        if dims.len() != 2 {
            return Err(Gf2Error::Parse { line: 1, msg: "header must be `rows cols`".into() });
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut supports = Vec::with_capacity(rows);
        for r in 0..rows {
            let line_no = r + 2;
            let line = lines
                .next()
                .ok_or(Gf2Error::Parse { line: line_no, msg: format!("expected {rows} rows") })?;
            let sup: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| Gf2Error::Parse { line: line_no, msg: format!("bad index: {e}") })?;
            supports.push(sup);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Gf2Error::Parse { line: rows + 2, msg: "trailing content".into() });
        }
        Self::new(rows, cols, supports)
    }
}

impl fmt::Debug for SparseBitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SparseBitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String =
                (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Assembles a block matrix; `Block::Zero` cells take their shape from the
/// other blocks in the same grid row and column.
pub fn block_concat(grid: &[Vec<Block<'_>>]) -> Result<SparseBitMatrix, Gf2Error> {
    let nrows = grid.len();
    let ncols = grid.first().map_or(0, Vec::len);
    if grid.iter().any(|row| row.len() != ncols) {
        return Err(Gf2Error::DimensionMismatch("ragged block grid".into()));
    }
    let mut heights = vec![None; nrows];
    let mut widths = vec![None; ncols];
    for (i, row) in grid.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if let Block::Mat(m) = b {
                for (slot, val, what) in
                    [(&mut heights[i], m.rows, "height"), (&mut widths[j], m.cols, "width")]
                {
                    match slot {
                        Some(v) if *v != val => {
                            return Err(Gf2Error::DimensionMismatch(format!(
                                "block ({i},{j}) {what} {val} disagrees with {v}"
                            )))
                        }
                        _ => *slot = Some(val),
                    }
                }
            }
        }
    }
    let heights: Vec<usize> = heights
        .into_iter()
        .enumerate()
        .map(|(i, h)| h.ok_or_else(|| Gf2Error::DimensionMismatch(format!("block row {i} has no shape"))))
        .collect::<Result<_, _>>()?;
    let widths: Vec<usize> = widths
        .into_iter()
        .enumerate()
        .map(|(j, w)| w.ok_or_else(|| Gf2Error::DimensionMismatch(format!("block column {j} has no shape"))))
        .collect::<Result<_, _>>()?;
    let total_cols: usize = widths.iter().sum();
    let mut supports = Vec::with_capacity(heights.iter().sum());
    for (i, row) in grid.iter().enumerate() {
        for r in 0..heights[i] {
            let mut line = Vec::new();
            let mut off = 0;
            for (j, b) in row.iter().enumerate() {
                if let Block::Mat(m) = b {
                    line.extend(m.row(r).iter().map(|&c| c + off));
                }
                off += widths[j];
            }
            supports.push(line);
        }
    }
    Ok(SparseBitMatrix { rows: supports.len(), cols: total_cols, row_supports: supports })
}

/// Bit-packed dense matrix used for elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl DenseBitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols).max(1);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let idx = r * self.stride + c / WORD;
        let mask = 1u64 << (c % WORD);
        if v {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        let s = self.stride;
        if dst == src {
            return;
        }
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..dst * s + s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..src * s + s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for w in 0..self.stride {
                self.data.swap(a * self.stride + w, b * self.stride + w);
            }
        }
    }

    /// Reduced row echelon form restricted to the first `limit` columns.
    /// Pivots are chosen at the lowest available column and lowest row.
    /// Returns the pivot columns in row order.
    pub fn rref_limited(&mut self, limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit.min(self.cols) {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else { continue };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_rows(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&mut self) -> Vec<usize> {
        self.rref_limited(self.cols)
    }

    pub fn row_bitvec(&self, r: usize) -> BitVec {
        let words = self.row_words(r)[..words_for(self.cols)].to_vec();
        BitVec::from_words(self.cols, words)
    }

    /// Parity of `row r` restricted to the columns in `[offset, offset + x.len())` against `x`.
    #[inline]
    fn dot_window(&self, r: usize, offset_words: usize, x: &BitVec) -> bool {
        let row = &self.row_words(r)[offset_words..];
        let mut acc = 0u64;
        for (a, b) in row.iter().zip(x.words()) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }
}

pub fn rank(m: &SparseBitMatrix) -> usize {
    if m.rows <= m.cols {
        m.to_dense().rref().len()
    } else {
        m.transpose().to_dense().rref().len()
    }
}

/// Basis of `{x : M x = 0}` read off the reduced row echelon form.
pub fn kernel_basis(m: &SparseBitMatrix) -> Vec<BitVec> {
    let mut d = m.to_dense();
    let pivots = d.rref();
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::with_capacity(m.cols - pivots.len());
    for f in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(m.cols);
        v.set(f, true);
        for (r, &p) in pivots.iter().enumerate() {
            if d.get(r, f) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Solved(BitVec),
    Inconsistent,
}

impl Solution {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Solution::Solved(_))
    }

    pub fn into_option(self) -> Option<BitVec> {
        match self {
            Solution::Solved(x) => Some(x),
            Solution::Inconsistent => None,
        }
    }
}

pub fn solve(m: &SparseBitMatrix, b: &BitVec) -> Solution {
    LinearSolver::new(m).solve(b)
}

/// Precomputed elimination of a fixed matrix for repeated solves.
///
/// Row-reduces `[M | I]`; pivot rows give a particular solution and the
/// remaining rows span the left kernel, which tests consistency.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    rows: usize,
    cols: usize,
    pivots: Vec<usize>,
    reduced: DenseBitMatrix,
    offset_words: usize,
}

impl LinearSolver {
    pub fn new(m: &SparseBitMatrix) -> Self {
        let offset_words = words_for(m.cols);
        let width = offset_words * WORD + m.rows;
        let mut d = DenseBitMatrix::zeros(m.rows, width);
        for (r, sup) in m.row_supports.iter().enumerate() {
            for &c in sup {
                d.set(r, c, true);
            }
            d.set(r, offset_words * WORD + r, true);
        }
        let pivots = d.rref_limited(m.cols);
        Self { rows: m.rows, cols: m.cols, pivots, reduced: d, offset_words }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True iff `b` lies in the column space.
    pub fn is_consistent(&self, b: &BitVec) -> bool {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        (self.pivots.len()..self.rows).all(|r| !self.reduced.dot_window(r, self.offset_words, b))
    }

    pub fn solve(&self, b: &BitVec) -> Solution {
        if !self.is_consistent(b) {
            return Solution::Inconsistent;
        }
        let mut x = BitVec::zeros(self.cols);
        for (r, &p) in self.pivots.iter().enumerate() {
            if self.reduced.dot_window(r, self.offset_words, b) {
                x.set(p, true);
            }
        }
        Solution::Solved(x)
    }

    /// Rows spanning the left kernel `{y : y^T M = 0}`.
    pub fn left_kernel(&self) -> Vec<BitVec> {
        (self.pivots.len()..self.rows)
            .map(|r| {
                let mut y = BitVec::zeros(self.rows);
                for i in 0..self.rows {
                    if self.reduced.get(r, self.offset_words * WORD + i) {
                        y.set(i, true);
                    }
                }
                y
            })
            .collect()
    }
}

/// Membership oracle for the row space of a matrix.
#[derive(Clone, Debug)]
pub struct RowSpace {
    solver: LinearSolver,
}

impl RowSpace {
    pub fn new(m: &SparseBitMatrix) -> Self {
        Self { solver: LinearSolver::new(&m.transpose()) }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.solver.is_consistent(v)
    }

    /// Coefficients expressing `v` in terms of the original rows.
    pub fn coefficients(&self, v: &BitVec) -> Option<BitVec> {
        self.solver.solve(v).into_option()
    }

    pub fn dim(&self) -> usize {
        self.solver.rank()
    }
}

/// Incrementally built basis with leading-bit reduction.
#[derive(Clone, Debug, Default)]
pub struct XorBasis {
    len: usize,
    vectors: Vec<(usize, BitVec)>,
}

impl XorBasis {
    pub fn new(len: usize) -> Self {
        Self { len, vectors: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut r = v.clone();
        for (p, b) in &self.vectors {
            if r.get(*p) {
                r.xor_assign(b);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        let lead = r.first_one();
        match lead {
            None => false,
            Some(p) => {
                for (_, b) in self.vectors.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&r);
                    }
                }
                self.vectors.push((p, r));
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring3() -> SparseBitMatrix {
        SparseBitMatrix::from_dense_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]])
    }

    fn all_vectors(n: usize) -> impl Iterator<Item = BitVec> {
        (0u64..1 << n).map(move |m| BitVec::from_support(n, &(0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&SparseBitMatrix::identity(3)), 3);
        assert_eq!(rank(&ring3()), 2);
        assert_eq!(rank(&SparseBitMatrix::zeros(4, 5)), 0);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&SparseBitMatrix::identity(3)).is_empty());
        let k = kernel_basis(&ring3());
        let brute: Vec<BitVec> =
            all_vectors(3).filter(|v| !v.is_zero() && ring3().mul_vec(v).is_zero()).collect();
        assert_eq!(brute, vec![BitVec::from_bit_str("111").unwrap()]);
        assert_eq!(k, brute);
        let parity = SparseBitMatrix::from_dense_rows(&[vec![1, 1, 1, 1]]);
        let k = kernel_basis(&parity);
        assert_eq!(k.len(), 3);
        assert!(k.iter().all(|v| v.weight() % 2 == 0));
    }

    #[test]
    fn solve_examples() {
        let b = BitVec::from_bit_str("101").unwrap();
        assert_eq!(solve(&SparseBitMatrix::identity(3), &b), Solution::Solved(b));
        let target = BitVec::from_bit_str("110").unwrap();
        let preimages: Vec<BitVec> = all_vectors(3).filter(|v| ring3().mul_vec(v) == target).collect();
        let x = solve(&ring3(), &target).into_option().unwrap();
        assert!(preimages.contains(&x));
        let expected = [BitVec::from_bit_str("010").unwrap(), BitVec::from_bit_str("101").unwrap()];
        assert_eq!(preimages.len(), 2);
        assert!(expected.iter().all(|e| preimages.contains(e)));
        // Row-vector convention x^T M = b.
        let xt = solve(&ring3().transpose(), &target).into_option().unwrap();
        let row_expected = [BitVec::from_bit_str("100").unwrap(), BitVec::from_bit_str("011").unwrap()];
        assert!(row_expected.contains(&xt));
        assert_eq!(solve(&ring3(), &BitVec::from_bit_str("100").unwrap()), Solution::Inconsistent);
    }

    #[test]
    fn kron_examples() {
        let h = ring3();
        let k = SparseBitMatrix::identity(2).kron(&h);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(k.get(r, c), h.get(r, c));
                assert_eq!(k.get(r + 3, c + 3), h.get(r, c));
                assert!(!k.get(r, c + 3) && !k.get(r + 3, c));
            }
        }
        let a = SparseBitMatrix::zeros(2, 3);
        let b = SparseBitMatrix::zeros(4, 5);
        let ab = a.kron(&b);
        assert_eq!((ab.rows(), ab.cols()), (8, 15));
    }

    #[test]
    fn block_concat_examples() {
        let a = SparseBitMatrix::identity(2);
        let m = block_concat(&[vec![Block::Mat(&a), Block::Zero]]).unwrap_err();
        assert!(matches!(m, Gf2Error::DimensionMismatch(_)));
        let z = SparseBitMatrix::zeros(2, 2);
        let m = block_concat(&[vec![Block::Mat(&a), Block::Mat(&z)]]).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert!((0..2).all(|r| m.row(r).iter().all(|&c| c < 2)));

        let h = ring3();
        let i3 = SparseBitMatrix::identity(3);
        let left = h.kron(&i3);
        let right = i3.kron(&h);
        let hz = block_concat(&[vec![Block::Mat(&left), Block::Mat(&right)]]).unwrap();
        assert_eq!((hz.rows(), hz.cols()), (9, 18));
        assert!((0..9).all(|r| hz.row(r).len() == 4));

        let tall = SparseBitMatrix::identity(3);
        let err = block_concat(&[vec![Block::Mat(&a), Block::Mat(&tall)]]);
        assert!(err.is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let h = ring3();
        let t = h.to_text();
        assert_eq!(t, "3 3\n0 1\n1 2\n0 2\n");
        assert_eq!(SparseBitMatrix::from_text(&t).unwrap(), h);
        assert!(SparseBitMatrix::from_text("2 2\n1 0\n\n").is_err());
        assert!(SparseBitMatrix::from_text("2 2\n0 5\n\n").is_err());
        let empty_rows = SparseBitMatrix::zeros(2, 3);
        assert_eq!(SparseBitMatrix::from_text(&empty_rows.to_text()).unwrap(), empty_rows);
    }

    #[test]
    fn left_kernel_annihilates() {
        let h = ring3();
        let s = LinearSolver::new(&h);
        let lk = s.left_kernel();
        assert_eq!(lk, vec![BitVec::ones(3)]);
        assert!(h.tr_mul_vec(&lk[0]).is_zero());
    }

    #[test]
    fn xor_basis_tracks_span() {
        let mut b = XorBasis::new(4);
        assert!(b.insert(&BitVec::from_bit_str("1100").unwrap()));
        assert!(b.insert(&BitVec::from_bit_str("0110").unwrap()));
        assert!(!b.insert(&BitVec::from_bit_str("1010").unwrap()));
        assert!(b.contains(&BitVec::from_bit_str("1010").unwrap()));
        assert!(!b.contains(&BitVec::from_bit_str("0001").unwrap()));
        assert_eq!(b.dim(), 2);
    }

    fn arb_matrix(max_r: usize, max_c: usize) -> impl Strategy<Value = SparseBitMatrix> {
        (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(
                move |bits| {
                    let rows: Vec<Vec<u8>> =
                        bits.into_iter().map(|row| row.into_iter().map(u8::from).collect()).collect();
                    SparseBitMatrix::from_dense_rows(&rows)
                },
            )
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix(8, 10)) {
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.len(), m.cols());
            for v in &k {
                prop_assert!(m.mul_vec(v).is_zero());
            }
        }

        #[test]
        fn solve_round_trips(m in arb_matrix(8, 10), seed in any::<u64>()) {
            let x = BitVec::from_support(m.cols(), &(0..m.cols()).filter(|i| seed >> i & 1 == 1).collect::<Vec<_>>());
            let b = m.mul_vec(&x);
            match solve(&m, &b) {
                Solution::Solved(y) => prop_assert_eq!(m.mul_vec(&y), b),
                Solution::Inconsistent => prop_assert!(false, "image vector reported inconsistent"),
            }
        }

        #[test]
        fn inconsistency_matches_left_kernel(m in arb_matrix(6, 4), seed in any::<u64>()) {
            let b = BitVec::from_support(m.rows(), &(0..m.rows()).filter(|i| seed >> i & 1 == 1).collect::<Vec<_>>());
            let in_image = (0u64..1 << m.cols()).any(|mask| {
                let x = BitVec::from_support(m.cols(), &(0..m.cols()).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>());
                m.mul_vec(&x) == b
            });
            prop_assert_eq!(solve(&m, &b).is_consistent(), in_image);
        }

        #[test]
        fn transpose_involution(m in arb_matrix(7, 9)) {
            prop_assert_eq!(m.transpose().transpose(), m);
        }

        #[test]
        fn kron_rank_multiplies(a in arb_matrix(4, 4), b in arb_matrix(4, 4)) {
            prop_assert_eq!(rank(&a.kron(&b)), rank(&a) * rank(&b));
        }

        #[test]
        fn kron_associative(a in arb_matrix(3, 3), b in arb_matrix(3, 3), c in arb_matrix(3, 3)) {
            prop_assert_eq!(a.kron(&b).kron(&c), a.kron(&b.kron(&c)));
        }

        #[test]
        fn kron_acts_on_product_vectors(a in arb_matrix(3, 4), b in arb_matrix(3, 4), xs in any::<u16>(), ys in any::<u16>()) {
            let x = BitVec::from_support(a.cols(), &(0..a.cols()).filter(|i| xs >> i & 1 == 1).collect::<Vec<_>>());
            let y = BitVec::from_support(b.cols(), &(0..b.cols()).filter(|i| ys >> i & 1 == 1).collect::<Vec<_>>());
            let xy = outer(&x, &y);
            prop_assert_eq!(a.kron(&b).mul_vec(&xy), outer(&a.mul_vec(&x), &b.mul_vec(&y)));
        }

        #[test]
        fn text_format_round_trips(m in arb_matrix(6, 6)) {
            prop_assert_eq!(SparseBitMatrix::from_text(&m.to_text()).unwrap(), m);
        }
    }

    fn outer(x: &BitVec, y: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(x.len() * y.len());
        for i in x.iter_ones() {
            for j in y.iter_ones() {
                out.set(i * y.len() + j, true);
            }
        }
        out
    }
}
