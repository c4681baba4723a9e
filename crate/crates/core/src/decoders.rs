//! Exact and greedy syndrome decoders and the two-stage single-shot pipeline.

use std::collections::HashMap;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::gf2::{BitVec, LinearSolver, RowSpace, SparseBitMatrix};
use crate::hgp::CssCode;
use crate::search::{ball_size, for_each_combination, xor_into, PackedColumns};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("residual has nonzero syndrome")]
    NotAResidual,
    #[error("code has no metacheck")]
    NoMetacheck,
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

/// Pauli type of an error; X errors are detected by `H_Z`, Z errors by `H_X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Z => "Z",
        }
    }
}

/// Check matrix detecting errors of type `basis`.
pub fn detecting_checks(code: &CssCode, basis: Basis) -> &SparseBitMatrix {
    match basis {
        Basis::X => &code.h_z,
        Basis::Z => &code.h_x,
    }
}

/// Stabilizers of the same type as errors of type `basis`.
pub fn same_type_stabilizers(code: &CssCode, basis: Basis) -> &SparseBitMatrix {
    match basis {
        Basis::X => &code.h_x,
        Basis::Z => &code.h_z,
    }
}

/// Logical operators that detect logical errors of type `basis`.
pub fn detecting_logicals(code: &CssCode, basis: Basis) -> &SparseBitMatrix {
    match basis {
        Basis::X => &code.g_z,
        Basis::Z => &code.g_x,
    }
}

/// Logical representatives of type `basis`.
pub fn logicals(code: &CssCode, basis: Basis) -> &SparseBitMatrix {
    match basis {
        Basis::X => &code.g_x,
        Basis::Z => &code.g_z,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Ok,
    NonPhysicalSyndrome,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub correction: BitVec,
    pub status: DecodeStatus,
    pub work: u64,
}

impl DecodeResult {
    pub fn is_ok(&self) -> bool {
        self.status == DecodeStatus::Ok
    }
}

/// Minimum-weight `e` with `H e = s`, enumerating weights `0..=wmax` in
/// lexicographic order; the first hit is returned.
pub fn minweight_exhaustive(h: &SparseBitMatrix, s: &BitVec, wmax: usize, cap: u64) -> DecodeResult {
    let n = h.cols();
    if !LinearSolver::new(h).is_consistent(s) {
        return DecodeResult { correction: BitVec::zeros(n), status: DecodeStatus::NonPhysicalSyndrome, work: 0 };
    }
    let cols = PackedColumns::new(h);
    let target = cols.pack(s);
    let mut work = 0u64;
    for w in 0..=wmax.min(n) {
        let mut found = None;
        let mut exceeded = false;
        let _ = for_each_combination(&cols, w, |sup, acc| {
            work += 1;
            if work > cap {
                exceeded = true;
                return ControlFlow::Break(());
            }
            if acc == target.as_slice() {
                found = Some(BitVec::from_support(n, sup));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if let Some(e) = found {
            return DecodeResult { correction: e, status: DecodeStatus::Ok, work };
        }
        if exceeded {
            return DecodeResult { correction: BitVec::zeros(n), status: DecodeStatus::BudgetExceeded, work };
        }
    }
    DecodeResult { correction: BitVec::zeros(n), status: DecodeStatus::BudgetExceeded, work }
}

/// Largest syndrome-space dimension for which [`SyndromeTable`] is built.
pub const TABLE_MAX_RANK: usize = 24;

/// Complete minimum-weight lookup table over `im H`, built by breadth-first
/// search with columns tried in ascending order.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    n: usize,
    info: Vec<usize>,
    col_keys: Vec<u32>,
    parent: Vec<u16>,
    depth: Vec<u8>,
    solver: LinearSolver,
}

const UNSEEN: u8 = u8::MAX;

impl SyndromeTable {
    /// Returns `None` when the rank exceeds [`TABLE_MAX_RANK`] or `n ≥ 2^16`.
    pub fn new(h: &SparseBitMatrix) -> Option<Self> {
        let solver = LinearSolver::new(h);
        let r = solver.rank();
        if r > TABLE_MAX_RANK || h.cols() >= u16::MAX as usize {
            return None;
        }
        let mut dt = h.transpose().to_dense();
        let info = dt.rref();
        let pos: HashMap<usize, usize> = info.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let col_keys: Vec<u32> = (0..h.cols())
            .map(|c| {
                let mut k = 0u32;
                for r in 0..h.rows() {
                    if h.row(r).binary_search(&c).is_ok() {
                        if let Some(&i) = pos.get(&r) {
                            k ^= 1 << i;
                        }
                    }
                }
                k
            })
            .collect();
        let size = 1usize << r;
        let mut parent = vec![0u16; size];
        let mut depth = vec![UNSEEN; size];
        depth[0] = 0;
        let mut frontier = vec![0u32];
        let mut d = 0u8;
        while !frontier.is_empty() && d < UNSEEN - 1 {
            let mut next = Vec::new();
            for &state in &frontier {
                for (c, &ck) in col_keys.iter().enumerate() {
                    let nb = (state ^ ck) as usize;
                    if depth[nb] == UNSEEN {
                        depth[nb] = d + 1;
                        parent[nb] = c as u16;
                        next.push(nb as u32);
                    }
                }
            }
            frontier = next;
            d += 1;
        }
        Some(Self { n: h.cols(), info, col_keys, parent, depth, solver })
    }

    fn key(&self, s: &BitVec) -> usize {
        self.info.iter().enumerate().fold(0usize, |k, (i, &p)| if s.get(p) { k | 1 << i } else { k })
    }

    pub fn decode(&self, s: &BitVec) -> DecodeResult {
        if !self.solver.is_consistent(s) {
            return DecodeResult { correction: BitVec::zeros(self.n), status: DecodeStatus::NonPhysicalSyndrome, work: 0 };
        }
        let mut key = self.key(s);
        let mut e = BitVec::zeros(self.n);
        let mut work = 0;
        while key != 0 {
            let c = self.parent[key] as usize;
            e.flip(c);
            key ^= self.col_keys[c] as usize;
            work += 1;
        }
        DecodeResult { correction: e, status: DecodeStatus::Ok, work }
    }

    /// Minimum correction weight for `s`, if physical.
    pub fn min_weight(&self, s: &BitVec) -> Option<usize> {
        self.solver.is_consistent(s).then(|| self.depth[self.key(s)] as usize)
    }
}

/// Largest half table the meet-in-the-middle decoder will hold.
pub const MITM_TABLE_MAX: u64 = 1 << 21;

/// Exact minimum-weight decoder: a table of all syndromes of weight-`≤ h`
/// errors, probed by enumerating the remaining `w − h` columns in
/// lexicographic order. Exact in weight; ties are resolved deterministically.
#[derive(Clone, Debug)]
pub struct MitmDecoder {
    n: usize,
    cols: PackedColumns,
    half: usize,
    table: HashMap<Box<[u64]>, Box<[usize]>>,
    solver: LinearSolver,
}

impl MitmDecoder {
    pub fn new(h: &SparseBitMatrix, half: usize) -> Self {
        let cols = PackedColumns::new(h);
        let mut table: HashMap<Box<[u64]>, Box<[usize]>> = HashMap::new();
        for w in 0..=half.min(h.cols()) {
            let _ = for_each_combination(&cols, w, |sup, acc| {
                table.entry(acc.into()).or_insert_with(|| sup.into());
                ControlFlow::Continue(())
            });
        }
        Self { n: h.cols(), cols, half, table, solver: LinearSolver::new(h) }
    }

    /// Largest half-width whose table fits [`MITM_TABLE_MAX`].
    pub fn auto(h: &SparseBitMatrix) -> Self {
        let mut half = 1;
        while half < h.cols() && ball_size(h.cols(), half + 1) <= MITM_TABLE_MAX {
            half += 1;
        }
        Self::new(h, half)
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn decode(&self, s: &BitVec, wmax: usize, cap: u64) -> DecodeResult {
        let fail = |status, work| DecodeResult { correction: BitVec::zeros(self.n), status, work };
        if !self.solver.is_consistent(s) {
            return fail(DecodeStatus::NonPhysicalSyndrome, 0);
        }
        let target = self.cols.pack(s);
        if let Some(sup) = self.table.get(target.as_slice()) {
            return DecodeResult { correction: BitVec::from_support(self.n, sup), status: DecodeStatus::Ok, work: 1 };
        }
        let mut work = 1u64;
        let mut key = vec![0u64; self.cols.words()];
        for w in self.half + 1..=wmax.min(self.n) {
            let mut found = None;
            let mut exceeded = false;
            let _ = for_each_combination(&self.cols, w - self.half, |sup, acc| {
                work += 1;
                if work > cap {
                    exceeded = true;
                    return ControlFlow::Break(());
                }
                key.copy_from_slice(&target);
                xor_into(&mut key, acc);
                if let Some(rest) = self.table.get(key.as_slice()) {
                    let mut e = BitVec::from_support(self.n, sup);
                    e.xor_assign(&BitVec::from_support(self.n, rest));
                    found = Some(e);
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            });
            if let Some(e) = found {
                return DecodeResult { correction: e, status: DecodeStatus::Ok, work };
            }
            if exceeded {
                return fail(DecodeStatus::BudgetExceeded, work);
            }
        }
        fail(DecodeStatus::BudgetExceeded, work)
    }
}

/// Exact decoder choosing the full table when the syndrome space is small.
#[derive(Clone, Debug)]
pub enum ExactDecoder {
    Table(SyndromeTable),
    Mitm(MitmDecoder),
}

impl ExactDecoder {
    pub fn new(h: &SparseBitMatrix) -> Self {
        match SyndromeTable::new(h) {
            Some(t) => ExactDecoder::Table(t),
            None => ExactDecoder::Mitm(MitmDecoder::auto(h)),
        }
    }

    pub fn decode(&self, s: &BitVec, cap: u64) -> DecodeResult {
        match self {
            ExactDecoder::Table(t) => t.decode(s),
            ExactDecoder::Mitm(m) => m.decode(s, usize::MAX, cap),
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, ExactDecoder::Table(_))
    }
}

/// Column/row adjacency for repeated greedy flipping.
#[derive(Clone, Debug)]
pub struct GreedyDecoder {
    n: usize,
    m: usize,
    col_rows: Vec<Vec<usize>>,
    row_cols: Vec<Vec<usize>>,
}

impl GreedyDecoder {
    pub fn new(h: &SparseBitMatrix) -> Self {
        let t = h.transpose();
        Self { n: h.cols(), m: h.rows(), col_rows: t.row_supports().to_vec(), row_cols: h.row_supports().to_vec() }
    }

    /// Flips the column with the largest strict syndrome-weight reduction
    /// (lowest index on ties) until no flip helps.
    pub fn decode(&self, s: &BitVec) -> DecodeResult {
        assert_eq!(s.len(), self.m);
        let mut syn: Vec<bool> = (0..self.m).map(|r| s.get(r)).collect();
        let gain = |c: usize, syn: &[bool]| -> i64 {
            self.col_rows[c].iter().map(|&r| if syn[r] { 1 } else { -1 }).sum()
        };
        let mut gains: Vec<i64> = (0..self.n).map(|c| gain(c, &syn)).collect();
        let mut e = BitVec::zeros(self.n);
        let mut work = 0u64;
        loop {
            let mut best = (0i64, usize::MAX);
            for (c, &g) in gains.iter().enumerate() {
                if g > best.0 {
                    best = (g, c);
                }
            }
            if best.1 == usize::MAX {
                break;
            }
            let c = best.1;
            e.flip(c);
            work += 1;
            let mut touched = Vec::new();
            for &r in &self.col_rows[c] {
                syn[r] = !syn[r];
                touched.extend(self.row_cols[r].iter().copied());
            }
            touched.sort_unstable();
            touched.dedup();
            for t in touched {
                gains[t] = gain(t, &syn);
            }
        }
        let status = if syn.iter().any(|&b| b) { DecodeStatus::NonPhysicalSyndrome } else { DecodeStatus::Ok };
        DecodeResult { correction: e, status, work }
    }
}

pub fn greedy_local_flip(h: &SparseBitMatrix, s: &BitVec) -> DecodeResult {
    GreedyDecoder::new(h).decode(s)
}

/// Outcome of metacheck repair followed by decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleShotOutcome {
    pub s_obs: BitVec,
    pub s_corr: BitVec,
    pub s_rep: BitVec,
    pub correction: BitVec,
    pub metacode_success: bool,
    pub decode_status: DecodeStatus,
    pub work: u64,
}

/// Minimum-weight `u` with `M u = M s_obs`, then a physicality test of
/// `s_rep = s_obs + u` against `H`.
pub fn metadecode(m: &SparseBitMatrix, h: &SparseBitMatrix, s_obs: &BitVec, wmax: usize) -> SingleShotOutcome {
    let ms = m.mul_vec(s_obs);
    let r = minweight_exhaustive(m, &ms, wmax, u64::MAX);
    let s_rep = s_obs.xor(&r.correction);
    let metacode_success = r.is_ok() && LinearSolver::new(h).is_consistent(&s_rep);
    SingleShotOutcome {
        s_obs: s_obs.clone(),
        s_corr: r.correction,
        s_rep,
        correction: BitVec::zeros(h.cols()),
        metacode_success,
        decode_status: r.status,
        work: r.work,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DecoderMode {
    /// Exact minimum-weight decoding within the budget, greedy beyond it.
    Oracle,
    /// Greedy local flips only.
    Scalable,
}

/// Budgets for [`two_stage`] and [`SingleShotDecoder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub mode: DecoderMode,
    pub cap: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { mode: DecoderMode::Oracle, cap: 1 << 20 }
    }
}

/// Reusable single-shot decoder for one check matrix: metacheck repair
/// (when a metacheck exists) then syndrome decoding.
#[derive(Clone, Debug)]
pub struct SingleShotDecoder {
    h: SparseBitMatrix,
    m: Option<SparseBitMatrix>,
    meta_exact: Option<ExactDecoder>,
    meta_greedy: Option<GreedyDecoder>,
    exact: Option<ExactDecoder>,
    greedy: GreedyDecoder,
    h_solver: LinearSolver,
    budgets: Budgets,
}

impl SingleShotDecoder {
    pub fn new(h: &SparseBitMatrix, m: Option<&SparseBitMatrix>, budgets: Budgets) -> Self {
        let oracle = budgets.mode == DecoderMode::Oracle;
        Self {
            h: h.clone(),
            m: m.cloned(),
            meta_exact: m.filter(|_| oracle).map(ExactDecoder::new),
            meta_greedy: m.map(GreedyDecoder::new),
            exact: oracle.then(|| ExactDecoder::new(h)),
            greedy: GreedyDecoder::new(h),
            h_solver: LinearSolver::new(h),
            budgets,
        }
    }

    /// Decoder for errors of type `basis` on `code`. Codes without a stored
    /// metacheck use a basis of the left kernel of the checks.
    pub fn for_code(code: &CssCode, basis: Basis, budgets: Budgets) -> Self {
        let h = detecting_checks(code, basis);
        let stored = if basis == Basis::X { code.m_z.clone() } else { None };
        let m = stored.or_else(|| {
            let lk = LinearSolver::new(h).left_kernel();
            (!lk.is_empty()).then(|| SparseBitMatrix::from_bitvecs(h.rows(), &lk))
        });
        Self::new(h, m.as_ref(), budgets)
    }

    pub fn checks(&self) -> &SparseBitMatrix {
        &self.h
    }

    pub fn metacheck(&self) -> Option<&SparseBitMatrix> {
        self.m.as_ref()
    }

    fn repair(&self, s_obs: &BitVec) -> (BitVec, u64) {
        let Some(m) = &self.m else { return (BitVec::zeros(s_obs.len()), 0) };
        let ms = m.mul_vec(s_obs);
        if ms.is_zero() {
            return (BitVec::zeros(s_obs.len()), 0);
        }
        if let Some(ex) = &self.meta_exact {
            let r = ex.decode(&ms, self.budgets.cap);
            if r.is_ok() {
                return (r.correction, r.work);
            }
        }
        let r = self.meta_greedy.as_ref().expect("metacheck present").decode(&ms);
        (r.correction, r.work)
    }

    pub fn decode(&self, s_obs: &BitVec) -> SingleShotOutcome {
        let (s_corr, mut work) = self.repair(s_obs);
        let s_rep = s_obs.xor(&s_corr);
        let metacode_success = self.h_solver.is_consistent(&s_rep);
        let mut result = None;
        if let Some(ex) = &self.exact {
            let r = ex.decode(&s_rep, self.budgets.cap);
            work += r.work;
            if r.status != DecodeStatus::BudgetExceeded {
                result = Some(r);
            }
        }
        let r = result.unwrap_or_else(|| {
            let g = self.greedy.decode(&s_rep);
            work += g.work;
            g
        });
        SingleShotOutcome {
            s_obs: s_obs.clone(),
            s_corr,
            s_rep,
            correction: r.correction,
            metacode_success,
            decode_status: r.status,
            work,
        }
    }
}

/// One-shot convenience wrapper: decodes X errors through `H_Z` and the
/// stored metacheck of `code`.
pub fn two_stage(code: &CssCode, s_obs: &BitVec, budgets: Budgets) -> SingleShotOutcome {
    SingleShotDecoder::for_code(code, Basis::X, budgets).decode(s_obs)
}

/// True iff the residual `e_res` of type `basis` is a nontrivial logical.
pub fn logical_check(code: &CssCode, e_res: &BitVec, basis: Basis) -> Result<bool, DecodeError> {
    if e_res.len() != code.n() {
        return Err(DecodeError::Length { expected: code.n(), got: e_res.len() });
    }
    if !detecting_checks(code, basis).mul_vec(e_res).is_zero() {
        return Err(DecodeError::NotAResidual);
    }
    Ok(!detecting_logicals(code, basis).mul_vec(e_res).is_zero())
}

/// Rank-based classification used to cross-check [`logical_check`].
pub fn logical_check_by_rank(code: &CssCode, e_res: &BitVec, basis: Basis) -> Result<bool, DecodeError> {
    if !detecting_checks(code, basis).mul_vec(e_res).is_zero() {
        return Err(DecodeError::NotAResidual);
    }
    Ok(!RowSpace::new(same_type_stabilizers(code, basis)).contains(e_res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_ring;
    use crate::hgp::{qg_family, toric};
    use crate::noise::adversarial_weight_sweep;
    use crate::search::for_each_span_element;

    #[test]
    fn zero_and_nonphysical() {
        let h = repetition_ring(3).unwrap().h().clone();
        let r = minweight_exhaustive(&h, &BitVec::zeros(3), 3, 100);
        assert!(r.is_ok() && r.correction.is_zero());
        let odd = BitVec::from_bit_str("100").unwrap();
        assert_eq!(minweight_exhaustive(&h, &odd, 3, 100).status, DecodeStatus::NonPhysicalSyndrome);
        assert_eq!(SyndromeTable::new(&h).unwrap().decode(&odd).status, DecodeStatus::NonPhysicalSyndrome);
    }

    #[test]
    fn toric_single_errors_recovered() {
        let t = toric(3).unwrap();
        let table = SyndromeTable::new(&t.h_z).unwrap();
        let mitm = MitmDecoder::new(&t.h_z, 1);
        for q in 0..t.n() {
            let e = BitVec::from_support(t.n(), &[q]);
            let s = t.h_z.mul_vec(&e);
            let r = minweight_exhaustive(&t.h_z, &s, 3, 1 << 20);
            assert_eq!(r.correction, e);
            assert_eq!(table.decode(&s).correction.weight(), 1);
            assert_eq!(mitm.decode(&s, 9, 1 << 20).correction.weight(), 1);
            let g = greedy_local_flip(&t.h_z, &s);
            assert!(g.is_ok() && g.work <= 4);
        }
    }

    #[test]
    fn exact_decoders_agree_in_weight() {
        let (_, qg) = qg_family(2).unwrap();
        let h = &qg.h_z;
        let table = SyndromeTable::new(h).unwrap();
        let mitm = MitmDecoder::new(h, 2);
        for e in adversarial_weight_sweep(h.cols(), 3).unwrap() {
            let s = h.mul_vec(&e);
            let w_ex = minweight_exhaustive(h, &s, 6, u64::MAX).correction.weight();
            let t = table.decode(&s);
            let m = mitm.decode(&s, 6, u64::MAX);
            assert_eq!(h.mul_vec(&t.correction), s);
            assert_eq!(h.mul_vec(&m.correction), s);
            assert_eq!(t.correction.weight(), w_ex);
            assert_eq!(m.correction.weight(), w_ex);
        }
    }

    #[test]
    fn greedy_stopping_set_exists() {
        // Two X errors on Q_G at L = 2 whose syndrome greedy cannot clear.
        let (_, qg) = qg_family(2).unwrap();
        let g = GreedyDecoder::new(&qg.h_z);
        let mut found = None;
        for e in adversarial_weight_sweep(qg.n(), 3).unwrap() {
            let s = qg.h_z.mul_vec(&e);
            let r = g.decode(&s);
            let final_s = s.xor(&qg.h_z.mul_vec(&r.correction));
            assert!(final_s.weight() <= s.weight());
            if !r.is_ok() {
                // Locally co-minimal: no single flip lowers the weight.
                for c in 0..qg.n() {
                    let flipped = final_s.xor(&qg.h_z.mul_vec(&BitVec::from_support(qg.n(), &[c])));
                    assert!(flipped.weight() >= final_s.weight());
                }
                found = Some(e);
                break;
            }
        }
        assert!(found.is_some());
    }

    #[test]
    fn logical_check_methods_agree() {
        let t = toric(3).unwrap();
        assert!(!logical_check(&t, &t.h_x.row_bitvec(0), Basis::X).unwrap());
        assert!(logical_check(&t, &t.z_logical(0), Basis::Z).unwrap());
        assert!(logical_check(&t, &BitVec::from_support(18, &[0]), Basis::X).is_err());
        for basis in [Basis::X, Basis::Z] {
            let kernel = crate::gf2::kernel_basis(detecting_checks(&t, basis));
            let words = 1;
            let packed: Vec<Vec<u64>> = kernel.iter().map(|v| v.words().to_vec()).collect();
            let _ = for_each_span_element(&packed, words, |v, _| {
                let e = BitVec::from_words(18, v.to_vec());
                assert_eq!(logical_check(&t, &e, basis).unwrap(), logical_check_by_rank(&t, &e, basis).unwrap());
                ControlFlow::Continue(())
            });
        }
    }

    #[test]
    fn metadecode_trivial_and_two_stage() {
        let (_, qg) = qg_family(2).unwrap();
        let m = qg.m_z.as_ref().unwrap();
        let e = BitVec::from_support(qg.n(), &[3]);
        let s = qg.h_z.mul_vec(&e);
        let out = metadecode(m, &qg.h_z, &s, 4);
        assert!(out.s_corr.is_zero() && out.s_rep == s && out.metacode_success);
        let o = two_stage(&qg, &s, Budgets::default());
        assert!(o.correction.xor(&e).is_zero() || !logical_check(&qg, &o.correction.xor(&e), Basis::X).unwrap());
        assert_eq!(qg.h_z.mul_vec(&o.correction), s);
    }

    #[test]
    fn metacode_failure_on_systole() {
        let (_, mut qg) = qg_family(2).unwrap();
        qg.certify_distances(1 << 26);
        let sys = qg.metacode_systole(1 << 26).unwrap();
        let out = metadecode(qg.m_z.as_ref().unwrap(), &qg.h_z, &sys, 8);
        assert!(!out.metacode_success);
    }
}
