//! Chain complexes over F2, tensor products, homology and (co)systolic distances.
//!
//! Classical codes sit at degrees 0 (bits) and 1 (checks) with `∂_1 = H^T`.
//! Only boundaries are stored; `δ_i = ∂_{i+1}^T` is derived.

use std::collections::HashMap;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::codes::LinearCode;
use crate::gf2::{kernel_basis, rank, BitVec, Gf2Error, RowSpace, SparseBitMatrix, XorBasis};
use crate::search::{binomial, for_each_combination, for_each_span_element, words_weight, xor_into, PackedColumns};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("boundaries do not compose to zero at degree {degree}")]
    NotAComplex { degree: i32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no nontrivial class at degree {degree}")]
    NoNontrivialClass { degree: i32 },
    #[error("search budget exceeded; no nontrivial class below weight {lower_bound}")]
    BudgetExceeded { lower_bound: usize },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Provenance of a basis element: one `(degree, index)` pair per tensor factor.
pub type CellLabel = Vec<(i32, usize)>;

/// Element of one graded piece of a complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVector {
    pub degree: i32,
    pub vector: BitVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    min_degree: i32,
    dims: Vec<usize>,
    labels: Vec<Vec<CellLabel>>,
    /// `boundaries[t]` is `∂_{min_degree + t + 1}`.
    boundaries: Vec<SparseBitMatrix>,
}

impl ChainComplex {
    /// Builds a complex from `∂_{min+1}, …, ∂_{max}`; checks shapes and `∂∂ = 0`.
    pub fn new(min_degree: i32, dims: Vec<usize>, boundaries: Vec<SparseBitMatrix>) -> Result<Self, ComplexError> {
        let labels = dims
            .iter()
            .enumerate()
            .map(|(t, &d)| (0..d).map(|j| vec![(min_degree + t as i32, j)]).collect())
            .collect();
        Self::with_labels(min_degree, dims, boundaries, labels)
    }

    pub fn with_labels(
        min_degree: i32,
        dims: Vec<usize>,
        boundaries: Vec<SparseBitMatrix>,
        labels: Vec<Vec<CellLabel>>,
    ) -> Result<Self, ComplexError> {
        if dims.is_empty() {
            return Err(ComplexError::Shape("complex needs at least one degree".into()));
        }
        if boundaries.len() + 1 != dims.len() {
            return Err(ComplexError::Shape(format!("{} dims need {} boundaries", dims.len(), dims.len() - 1)));
        }
        if labels.len() != dims.len() || labels.iter().zip(&dims).any(|(l, &d)| l.len() != d) {
            return Err(ComplexError::Shape("label counts differ from dimensions".into()));
        }
        for (t, b) in boundaries.iter().enumerate() {
            if b.rows() != dims[t] || b.cols() != dims[t + 1] {
                return Err(ComplexError::Shape(format!(
                    "∂_{} is {}x{}, expected {}x{}",
                    min_degree + t as i32 + 1,
                    b.rows(),
                    b.cols(),
                    dims[t],
                    dims[t + 1]
                )));
            }
        }
        let c = Self { min_degree, dims, labels, boundaries };
        c.validate()?;
        Ok(c)
    }

    /// Checks `∂_{i−1} ∂_i = 0` at every degree.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for t in 1..self.boundaries.len() {
            if !self.boundaries[t - 1].matmul(&self.boundaries[t])?.is_zero() {
                return Err(ComplexError::NotAComplex { degree: self.min_degree + t as i32 + 1 });
            }
        }
        Ok(())
    }

    /// Classical code as a 2-term complex: bits at degree 0, checks at degree 1, `∂_1 = H^T`.
    pub fn from_code(c: &LinearCode) -> Self {
        Self::from_check_matrix(c.h())
    }

    pub fn from_check_matrix(h: &SparseBitMatrix) -> Self {
        Self::new(0, vec![h.cols(), h.rows()], vec![h.transpose()]).expect("2-term complex")
    }

    /// Single one-dimensional space at degree 0.
    pub fn unit() -> Self {
        Self::new(0, vec![1], vec![]).expect("unit complex")
    }

    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i32 {
        self.min_degree + self.dims.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.min_degree..=self.max_degree()
    }

    fn slot(&self, i: i32) -> Option<usize> {
        (i >= self.min_degree && i <= self.max_degree()).then(|| (i - self.min_degree) as usize)
    }

    pub fn dim(&self, i: i32) -> usize {
        self.slot(i).map_or(0, |t| self.dims[t])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self, i: i32) -> &[CellLabel] {
        self.slot(i).map_or(&[], |t| self.labels[t].as_slice())
    }

    /// `∂_i : X_i → X_{i−1}` as a `dim(i−1) × dim(i)` matrix (zero outside the range).
    pub fn boundary(&self, i: i32) -> SparseBitMatrix {
        match self.slot(i) {
            Some(t) if t >= 1 => self.boundaries[t - 1].clone(),
            _ => SparseBitMatrix::zeros(self.dim(i - 1), self.dim(i)),
        }
    }

    pub fn boundary_ref(&self, i: i32) -> Option<&SparseBitMatrix> {
        self.slot(i).filter(|&t| t >= 1).map(|t| &self.boundaries[t - 1])
    }

    /// `δ_i = ∂_{i+1}^T : X_i → X_{i+1}`.
    pub fn coboundary(&self, i: i32) -> SparseBitMatrix {
        self.boundary(i + 1).transpose()
    }

    /// Homological tensor product with `D_i = ⊕_j A_j ⊗ B_{i−j}` ordered by ascending `j`.
    pub fn tensor(&self, other: &ChainComplex) -> ChainComplex {
        let a = self;
        let b = other;
        let min = a.min_degree + b.min_degree;
        let max = a.max_degree() + b.max_degree();
        // blocks[i] = list of (j, offset) for the summands of D_i.
        let mut blocks: Vec<Vec<(i32, usize)>> = Vec::new();
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        for i in min..=max {
            let mut off = 0;
            let mut bl = Vec::new();
            let mut lab = Vec::new();
            for j in a.degrees() {
                let k = i - j;
                if k < b.min_degree || k > b.max_degree() {
                    continue;
                }
                bl.push((j, off));
                for la in a.labels(j) {
                    for lb in b.labels(k) {
                        let mut l = la.clone();
                        l.extend(lb.iter().copied());
                        lab.push(l);
                    }
                }
                off += a.dim(j) * b.dim(k);
            }
            blocks.push(bl);
            dims.push(off);
            labels.push(lab);
        }
        let mut boundaries = Vec::new();
        for i in min + 1..=max {
            let src = &blocks[(i - min) as usize];
            let dst = &blocks[(i - 1 - min) as usize];
            let rows = dims[(i - 1 - min) as usize];
            let cols = dims[(i - min) as usize];
            let mut raw = vec![Vec::new(); rows];
            let offset_of = |j: i32| dst.iter().find(|(jj, _)| *jj == j).map(|&(_, o)| o);
            for &(j, src_off) in src {
                let k = i - j;
                let (da, db) = (a.dim(j), b.dim(k));
                // ∂^A ⊗ I into A_{j−1} ⊗ B_k.
                if let (Some(dst_off), Some(bd)) = (offset_of(j - 1), a.boundary_ref(j)) {
                    let db_dst = b.dim(k);
                    for r in 0..bd.rows() {
                        for &c in bd.row(r) {
                            for y in 0..db {
                                raw[dst_off + r * db_dst + y].push(src_off + c * db + y);
                            }
                        }
                    }
                }
                // I ⊗ ∂^B into A_j ⊗ B_{k−1}.
                if let (Some(dst_off), Some(bd)) = (offset_of(j), b.boundary_ref(k)) {
                    let db_dst = b.dim(k - 1);
                    for x in 0..da {
                        for r in 0..bd.rows() {
                            for &c in bd.row(r) {
                                raw[dst_off + x * db_dst + r].push(src_off + x * db + c);
                            }
                        }
                    }
                }
            }
            boundaries.push(SparseBitMatrix::from_rows_mod2(rows, cols, raw));
        }
        ChainComplex::with_labels(min, dims, boundaries, labels).expect("tensor product of complexes is a complex")
    }

    /// Transposed complex: degree `i` becomes `−i` and `∂'_{−i} = δ_i`.
    pub fn dual(&self) -> ChainComplex {
        let min = -self.max_degree();
        let dims: Vec<usize> = self.dims.iter().rev().copied().collect();
        let labels: Vec<Vec<CellLabel>> = self.labels.iter().rev().cloned().collect();
        let boundaries = self.boundaries.iter().rev().map(SparseBitMatrix::transpose).collect();
        ChainComplex::with_labels(min, dims, boundaries, labels).expect("dual of a complex")
    }

    pub fn homology_dim(&self, i: i32) -> usize {
        let d = self.dim(i);
        d - rank(&self.boundary(i)) - rank(&self.boundary(i + 1))
    }

    /// Equal to [`ChainComplex::homology_dim`] over F2.
    pub fn cohomology_dim(&self, i: i32) -> usize {
        self.dual().homology_dim(-i)
    }

    /// Cocycles `h ∈ ker δ_i` spanning `H^i` modulo coboundaries; a cycle is
    /// nontrivial iff it pairs to 1 with one of them.
    pub fn cohomology_representatives(&self, i: i32) -> Vec<BitVec> {
        let d = self.dim(i);
        let mut basis = XorBasis::new(d);
        for r in self.boundary(i).row_bitvecs() {
            basis.insert(&r);
        }
        let mut reps = Vec::new();
        for z in kernel_basis(&self.boundary(i + 1).transpose()) {
            if basis.insert(&z) {
                reps.push(z);
            }
        }
        reps
    }

    /// Minimum-weight nontrivial `i`-cycle.
    pub fn systole(&self, i: i32, cap: u64) -> Result<BitVec, ComplexError> {
        let reps = self.cohomology_representatives(i);
        if reps.is_empty() {
            return Err(ComplexError::NoNontrivialClass { degree: i });
        }
        min_weight_nontrivial(&self.boundary(i), &reps, cap)
    }

    /// `d_i`: minimum weight of a cycle outside the boundaries.
    pub fn systolic_distance(&self, i: i32, cap: u64) -> Result<usize, ComplexError> {
        self.systole(i, cap).map(|v| v.weight())
    }

    /// `d^i`, computed on the transposed complex.
    pub fn cosystolic_distance(&self, i: i32, cap: u64) -> Result<usize, ComplexError> {
        self.dual().systolic_distance(-i, cap)
    }

    pub fn cosystole(&self, i: i32, cap: u64) -> Result<BitVec, ComplexError> {
        self.dual().systole(-i, cap)
    }

    /// Relabels the basis at degree `i` (element `j` moves to `perm[j]`),
    /// conjugating the adjacent maps.
    pub fn permuted(&self, i: i32, perm: &[usize]) -> ChainComplex {
        let t = self.slot(i).expect("degree in range");
        let mut c = self.clone();
        if t >= 1 {
            c.boundaries[t - 1] = c.boundaries[t - 1].permute_cols(perm);
        }
        if t < c.boundaries.len() {
            c.boundaries[t] = c.boundaries[t].permute_rows(perm);
        }
        let mut lab = vec![Vec::new(); perm.len()];
        for (j, l) in self.labels[t].iter().enumerate() {
            lab[perm[j]] = l.clone();
        }
        c.labels[t] = lab;
        c
    }

    /// Text dump: a `degrees min max` line, a `dims` line, then each boundary
    /// in the matrix text format under a `boundary i` header.
    pub fn dump(&self) -> String {
        let mut s = format!("degrees {} {}\n", self.min_degree, self.max_degree());
        let dims: Vec<String> = self.dims.iter().map(ToString::to_string).collect();
        s.push_str(&format!("dims {}\n", dims.join(" ")));
        for (t, b) in self.boundaries.iter().enumerate() {
            s.push_str(&format!("boundary {}\n", self.min_degree + t as i32 + 1));
            s.push_str(&b.to_text());
        }
        s
    }
}

/// Minimum-weight `x` with `check·x = 0` and `x·p = 1` for some `p` in `pairing`.
///
/// Runs a meet-in-the-middle weight-ordered search; if the kernel is small
/// enough and that search exceeds its share of the budget, enumerates the
/// kernel in Gray-code order instead.
pub fn min_weight_nontrivial(
    check: &SparseBitMatrix,
    pairing: &[BitVec],
    cap: u64,
) -> Result<BitVec, ComplexError> {
    assert!(pairing.len() < 64, "at most 63 pairing vectors supported");
    let n = check.cols();
    let zdim = n - rank(check);
    let gray_cost = if zdim < 40 { 1u64 << zdim } else { u64::MAX };
    let mitm_budget = if gray_cost <= cap { cap.min(gray_cost / 4 + 1024) } else { cap };
    match mitm_search(check, pairing, mitm_budget) {
        Ok(v) => Ok(v),
        Err(ComplexError::BudgetExceeded { lower_bound }) => {
            if gray_cost <= cap {
                Ok(gray_search(check, pairing))
            } else {
                Err(ComplexError::BudgetExceeded { lower_bound })
            }
        }
        Err(e) => Err(e),
    }
}

fn pairing_mask(pairing: &[BitVec], v: &BitVec) -> u64 {
    pairing.iter().enumerate().fold(0u64, |m, (j, p)| if p.dot(v) { m | 1 << j } else { m })
}

fn gray_search(check: &SparseBitMatrix, pairing: &[BitVec]) -> BitVec {
    let n = check.cols();
    let basis = kernel_basis(check);
    let words = n.div_ceil(64).max(1);
    let packed: Vec<Vec<u64>> = basis
        .iter()
        .map(|b| {
            let mut w = b.words().to_vec();
            w.resize(words, 0);
            w
        })
        .collect();
    let masks: Vec<u64> = basis.iter().map(|b| pairing_mask(pairing, b)).collect();
    let mut best = (usize::MAX, 0u64);
    let mut cur_pair = 0u64;
    let mut prev_coeffs = 0u64;
    let _ = for_each_span_element(&packed, words, |v, coeffs| {
        let changed = coeffs ^ prev_coeffs;
        if changed != 0 {
            cur_pair ^= masks[changed.trailing_zeros() as usize];
        }
        prev_coeffs = coeffs;
        if cur_pair != 0 {
            let w = words_weight(v);
            if w < best.0 {
                best = (w, coeffs);
            }
        }
        ControlFlow::Continue(())
    });
    let mut out = BitVec::zeros(n);
    for (j, b) in basis.iter().enumerate() {
        if best.1 >> j & 1 == 1 {
            out.xor_assign(b);
        }
    }
    out
}

/// Largest half-weight table the meet-in-the-middle search will build.
const MITM_TABLE_LIMIT: u64 = 1 << 21;

fn mitm_search(check: &SparseBitMatrix, pairing: &[BitVec], cap: u64) -> Result<BitVec, ComplexError> {
    let n = check.cols();
    // Columns carry the syndrome followed by the pairing bits.
    let mut rows: Vec<BitVec> = check.row_bitvecs();
    rows.extend(pairing.iter().cloned());
    let ext = SparseBitMatrix::from_bitvecs(n, &rows);
    let cols = PackedColumns::new(&ext);
    let words = cols.words();
    let m = check.rows();
    let split = |acc: &[u64]| -> (Vec<u64>, u64) {
        let mut syn = acc.to_vec();
        let mut pm = 0u64;
        for j in 0..pairing.len() {
            let bit = m + j;
            if syn[bit / 64] >> (bit % 64) & 1 == 1 {
                pm |= 1 << j;
                syn[bit / 64] &= !(1u64 << (bit % 64));
            }
        }
        (syn, pm)
    };
    let mut work = 0u64;
    // tables[b]: syndrome -> list of (pairing mask, support) with distinct masks.
    let mut tables: Vec<HashMap<Vec<u64>, Vec<(u64, Vec<usize>)>>> = vec![HashMap::new()];
    let zero = vec![0u64; words];
    tables[0].insert(zero, vec![(0, Vec::new())]);
    for w in 1..=n {
        let a = w / 2;
        let b = w - a;
        while tables.len() <= b {
            let size = tables.len();
            if binomial(n, size) > MITM_TABLE_LIMIT {
                return Err(ComplexError::BudgetExceeded { lower_bound: w });
            }
            let mut t: HashMap<Vec<u64>, Vec<(u64, Vec<usize>)>> = HashMap::new();
            let mut exceeded = false;
            let _ = for_each_combination(&cols, size, |sup, acc| {
                work += 1;
                if work > cap {
                    exceeded = true;
                    return ControlFlow::Break(());
                }
                let (syn, pm) = split(acc);
                let entry = t.entry(syn).or_default();
                if !entry.iter().any(|(m0, _)| *m0 == pm) {
                    entry.push((pm, sup.to_vec()));
                }
                ControlFlow::Continue(())
            });
            if exceeded {
                return Err(ComplexError::BudgetExceeded { lower_bound: w });
            }
            tables.push(t);
        }
        let table = &tables[b];
        let mut found: Option<BitVec> = None;
        let mut exceeded = false;
        let _ = for_each_combination(&cols, a, |sup, acc| {
            work += 1;
            if work > cap {
                exceeded = true;
                return ControlFlow::Break(());
            }
            let (syn, pm) = split(acc);
            if let Some(list) = table.get(&syn) {
                if let Some((_, other)) = list.iter().find(|(m0, _)| *m0 != pm) {
                    let mut v = BitVec::from_support(n, sup);
                    v.xor_assign(&BitVec::from_support(n, other));
                    found = Some(v);
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        if let Some(v) = found {
            return Ok(v);
        }
        if exceeded {
            return Err(ComplexError::BudgetExceeded { lower_bound: w });
        }
    }
    unreachable!("pairing vectors guarantee a nontrivial cycle exists")
}

/// Brute-force membership of `v` in the image of `m` via a row-space oracle on `m^T`.
pub fn in_image(m: &SparseBitMatrix, v: &BitVec) -> bool {
    RowSpace::new(&m.transpose()).contains(v)
}

#[doc(hidden)]
pub fn xor_words(acc: &mut [u64], v: &[u64]) {
    xor_into(acc, v);
}
