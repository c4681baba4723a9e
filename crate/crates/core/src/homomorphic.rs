//! Chain maps between code complexes and the depth-1 homomorphic CNOT they induce.

use thiserror::Error;

use crate::complex::ChainComplex;
use crate::gf2::{BitVec, RowSpace, SparseBitMatrix};
use crate::hgp::CssCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainMapError {
    #[error("layer {layer} out of range (code has {layers} layers)")]
    InvalidLayer { layer: usize, layers: usize },
    #[error("target code is not the 3D extension of the source code")]
    NotAnExtension,
    #[error("commuting square fails at degree {degree}, columns {columns:?}")]
    SquareFailure { degree: i32, columns: Vec<usize> },
    #[error("maps do not compose: complexes differ")]
    Mismatch,
    #[error("map shape does not match the complexes at degree {0}")]
    Shape(i32),
    #[error("qubit {0} appears in more than one gate")]
    NotTransversal(usize),
}

/// Degree-wise maps `φ_i : A_i → B_i`, stored for the degrees of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    maps: Vec<SparseBitMatrix>,
    limit_width: usize,
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, maps: Vec<SparseBitMatrix>) -> Result<Self, ChainMapError> {
        if maps.len() != source.dims().len() {
            return Err(ChainMapError::Shape(source.min_degree()));
        }
        for (t, m) in maps.iter().enumerate() {
            let i = source.min_degree() + t as i32;
            if m.rows() != target.dim(i) || m.cols() != source.dim(i) {
                return Err(ChainMapError::Shape(i));
            }
        }
        let limit_width = maps.iter().map(|m| m.max_row_weight().max(m.max_col_weight())).max().unwrap_or(0);
        Ok(Self { source, target, maps, limit_width })
    }

    /// Identity map on a complex.
    pub fn identity(c: &ChainComplex) -> Self {
        let maps = c.dims().iter().map(|&d| SparseBitMatrix::identity(d)).collect();
        Self::new(c.clone(), c.clone(), maps).expect("identity shapes")
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn limit_width(&self) -> usize {
        self.limit_width
    }

    /// `φ_i` (zero outside the source degrees).
    pub fn map(&self, i: i32) -> SparseBitMatrix {
        let t = i - self.source.min_degree();
        if t >= 0 && (t as usize) < self.maps.len() {
            self.maps[t as usize].clone()
        } else {
            SparseBitMatrix::zeros(self.target.dim(i), self.source.dim(i))
        }
    }

    /// Replaces `φ_i`, keeping the shape.
    pub fn with_map(&self, i: i32, m: SparseBitMatrix) -> Result<Self, ChainMapError> {
        let mut maps = self.maps.clone();
        let t = (i - self.source.min_degree()) as usize;
        *maps.get_mut(t).ok_or(ChainMapError::Shape(i))? = m;
        Self::new(self.source.clone(), self.target.clone(), maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMapReport {
    pub failures: Vec<(i32, Vec<usize>)>,
    pub limit_width: usize,
    pub trivial: bool,
}

impl ChainMapReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `φ_{i−1} ∂_i^A = ∂_i^B φ_i` at every degree touched by either
/// complex, listing offending source columns.
pub fn verify_chain_map(phi: &ChainMap) -> ChainMapReport {
    let (a, b) = (&phi.source, &phi.target);
    let lo = a.min_degree().min(b.min_degree());
    let hi = a.max_degree().max(b.max_degree()) + 1;
    let mut failures = Vec::new();
    for i in lo..=hi {
        let lhs = phi.map(i - 1).matmul(&a.boundary(i)).expect("shapes");
        let rhs = b.boundary(i).matmul(&phi.map(i)).expect("shapes");
        let diff = lhs.add(&rhs).expect("shapes");
        if !diff.is_zero() {
            let mut cols: Vec<usize> = diff.row_supports().iter().flatten().copied().collect();
            cols.sort_unstable();
            cols.dedup();
            failures.push((i, cols));
        }
    }
    ChainMapReport { failures, limit_width: phi.limit_width, trivial: phi.maps.iter().all(SparseBitMatrix::is_zero) }
}

/// Degree-wise product `ψ ∘ φ`.
pub fn compose(psi: &ChainMap, phi: &ChainMap) -> Result<ChainMap, ChainMapError> {
    if phi.target != psi.source {
        return Err(ChainMapError::Mismatch);
    }
    let maps = phi
        .source
        .degrees()
        .map(|i| psi.map(i).matmul(&phi.map(i)).expect("shapes"))
        .collect();
    ChainMap::new(phi.source.clone(), psi.target.clone(), maps)
}

/// Embeds the complex of `q` into layer `g0` of its 3D extension `qg`:
/// X-check `x ↦ (x, g0)`, qubit `q ↦ (q, g0)`, Z-check `z ↦ (z, g0)`.
pub fn layer_embedding(qg: &CssCode, q: &CssCode, g0: usize) -> Result<ChainMap, ChainMapError> {
    let (inner, hc) = qg.hgp3_parts().ok_or(ChainMapError::NotAnExtension)?;
    if inner.h_x != q.h_x || inner.h_z != q.h_z {
        return Err(ChainMapError::NotAnExtension);
    }
    let nc = hc.cols();
    if g0 >= nc {
        return Err(ChainMapError::InvalidLayer { layer: g0, layers: nc });
    }
    let source = q.complex();
    let target = qg.complex();
    let embed = |count: usize, rows: usize| {
        let mut raw = vec![Vec::new(); rows];
        for j in 0..count {
            raw[j * nc + g0].push(j);
        }
        SparseBitMatrix::new(rows, count, raw).expect("sorted")
    };
    let maps = vec![
        embed(q.h_x.rows(), target.dim(0)),
        embed(q.n(), target.dim(1)),
        embed(q.h_z.rows(), target.dim(2)),
    ];
    let phi = ChainMap::new(source, target, maps)?;
    let rep = verify_chain_map(&phi);
    if let Some((degree, columns)) = rep.failures.into_iter().next() {
        return Err(ChainMapError::SquareFailure { degree, columns });
    }
    Ok(phi)
}

/// Physical CNOTs `(control in the target complex's code, target in the source's)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnotSchedule {
    pub pairs: Vec<(usize, usize)>,
    pub depth_one: bool,
}

impl CnotSchedule {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("control_index,target_index\n");
        for (c, t) in &self.pairs {
            s.push_str(&format!("{c},{t}\n"));
        }
        s
    }

    pub fn without_pair(&self, idx: usize) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.remove(idx);
        Self { pairs, depth_one: self.depth_one }
    }
}

/// Reads the nonzeros of `φ_1` as CNOT pairs; fails unless every qubit is used once.
pub fn cnot_schedule(phi: &ChainMap) -> Result<CnotSchedule, ChainMapError> {
    let m = phi.map(1);
    let mut pairs = Vec::new();
    for r in 0..m.rows() {
        for &c in m.row(r) {
            pairs.push((r, c));
        }
    }
    let mut used_c = vec![false; m.rows()];
    let mut used_t = vec![false; m.cols()];
    for &(c, t) in &pairs {
        if used_c[c] {
            return Err(ChainMapError::NotTransversal(c));
        }
        if used_t[t] {
            return Err(ChainMapError::NotTransversal(t));
        }
        used_c[c] = true;
        used_t[t] = true;
    }
    Ok(CnotSchedule { pairs, depth_one: true })
}

/// X on a control spreads to its targets.
pub fn push_x_to_targets(sched: &CnotSchedule, x_ctrl: &BitVec, n_tgt: usize) -> BitVec {
    let mut out = BitVec::zeros(n_tgt);
    for &(c, t) in &sched.pairs {
        if x_ctrl.get(c) {
            out.flip(t);
        }
    }
    out
}

/// Z on a target spreads to its controls.
pub fn push_z_to_controls(sched: &CnotSchedule, z_tgt: &BitVec, n_ctrl: usize) -> BitVec {
    let mut out = BitVec::zeros(n_ctrl);
    for &(c, t) in &sched.pairs {
        if z_tgt.get(t) {
            out.flip(c);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalCnotReport {
    /// Control X-stabilizers whose image leaves the target X-stabilizer space.
    pub x_stabilizer_failures: Vec<usize>,
    /// Target Z-stabilizers whose image leaves the control Z-stabilizer space.
    pub z_stabilizer_failures: Vec<usize>,
    /// Logical indices where `X̄_i` does not map to `X̄_i`.
    pub x_logical_failures: Vec<usize>,
    pub z_logical_failures: Vec<usize>,
    /// `A_X[i][j] = 1` iff the image of control `X̄_i` anticommutes with target `Z̄_j`.
    pub x_action: SparseBitMatrix,
    /// `A_Z[j][i] = 1` iff the image of target `Z̄_j` anticommutes with control `X̄_i`.
    pub z_action: SparseBitMatrix,
    pub no_logical_action: bool,
}

impl LogicalCnotReport {
    pub fn passed(&self) -> bool {
        self.x_stabilizer_failures.is_empty()
            && self.z_stabilizer_failures.is_empty()
            && self.x_logical_failures.is_empty()
            && self.z_logical_failures.is_empty()
            && !self.no_logical_action
    }
}

/// F2 check that the schedule conjugates stabilizers into stabilizers and
/// implements `CNOT` from logical `i` of `ctrl` to logical `i` of `tgt`
/// for `i` below both codes' active logical counts.
pub fn verify_logical_cnot(ctrl: &CssCode, tgt: &CssCode, sched: &CnotSchedule) -> LogicalCnotReport {
    let tgt_x = RowSpace::new(&tgt.h_x);
    let ctrl_z = RowSpace::new(&ctrl.h_z);
    let x_stabilizer_failures = (0..ctrl.h_x.rows())
        .filter(|&r| !tgt_x.contains(&push_x_to_targets(sched, &ctrl.h_x.row_bitvec(r), tgt.n())))
        .collect();
    let z_stabilizer_failures = (0..tgt.h_z.rows())
        .filter(|&r| !ctrl_z.contains(&push_z_to_controls(sched, &tgt.h_z.row_bitvec(r), ctrl.n())))
        .collect();
    let x_images: Vec<BitVec> = (0..ctrl.k()).map(|i| push_x_to_targets(sched, &ctrl.x_logical(i), tgt.n())).collect();
    let z_images: Vec<BitVec> = (0..tgt.k()).map(|j| push_z_to_controls(sched, &tgt.z_logical(j), ctrl.n())).collect();
    let shared = ctrl.active_logicals().min(tgt.active_logicals());
    let x_logical_failures = (0..shared)
        .filter(|&i| !tgt_x.contains(&x_images[i].xor(&tgt.x_logical(i))))
        .collect();
    let z_logical_failures = (0..shared)
        .filter(|&i| !ctrl_z.contains(&z_images[i].xor(&ctrl.z_logical(i))))
        .collect();
    let action = |imgs: &[BitVec], basis: &SparseBitMatrix| {
        let rows = imgs
            .iter()
            .map(|v| (0..basis.rows()).filter(|&j| v.dot(&basis.row_bitvec(j))).collect())
            .collect();
        SparseBitMatrix::new(imgs.len(), basis.rows(), rows).expect("sorted")
    };
    let x_action = action(&x_images, &tgt.g_z);
    let z_action = action(&z_images, &ctrl.g_x);
    let no_logical_action = x_action.is_zero() && z_action.is_zero();
    LogicalCnotReport {
        x_stabilizer_failures,
        z_stabilizer_failures,
        x_logical_failures,
        z_logical_failures,
        x_action,
        z_action,
        no_logical_action,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgp::{qg_family, CssCode};

    #[test]
    fn toric_layer_embedding() {
        let (q, qg) = qg_family(3).unwrap();
        let phi = layer_embedding(&qg, &q, 0).unwrap();
        let rep = verify_chain_map(&phi);
        assert!(rep.passed());
        assert_eq!(rep.limit_width, 1);
        for i in 0..=2 {
            assert!(phi.map(i).max_row_weight() <= 1 && phi.map(i).max_col_weight() <= 1);
        }
        let s = cnot_schedule(&phi).unwrap();
        assert_eq!(s.pairs.len(), 18);
        assert!(s.depth_one);
        let layers: Vec<usize> = s.pairs.iter().map(|&(c, _)| qg.qubit_labels[c].b).collect();
        assert!(layers.iter().all(|&b| b == 0));
        assert!(s.pairs.iter().all(|&(c, _)| qg.qubit_labels[c].block == 0));
        let v = verify_logical_cnot(&qg, &q, &s);
        assert!(v.passed(), "{v:?}");
    }

    #[test]
    fn layers_differ_by_permutation() {
        let (q, qg) = qg_family(3).unwrap();
        let s0 = cnot_schedule(&layer_embedding(&qg, &q, 0).unwrap()).unwrap();
        let s2 = cnot_schedule(&layer_embedding(&qg, &q, 2).unwrap()).unwrap();
        for (a, b) in s0.pairs.iter().zip(&s2.pairs) {
            assert_eq!(a.1, b.1);
            assert_eq!(b.0, a.0 + 2);
        }
        assert!(verify_logical_cnot(&qg, &q, &s2).passed());
        assert!(matches!(layer_embedding(&qg, &q, 3), Err(ChainMapError::InvalidLayer { .. })));
    }

    #[test]
    fn corrupted_map_localized() {
        let (q, qg) = qg_family(3).unwrap();
        let phi = layer_embedding(&qg, &q, 0).unwrap();
        let mut rows = phi.map(1).row_supports().to_vec();
        rows[1].push(5);
        rows[1].sort_unstable();
        rows[1].dedup();
        let bad = phi.with_map(1, SparseBitMatrix::new(rows.len(), q.n(), rows).unwrap()).unwrap();
        let rep = verify_chain_map(&bad);
        assert!(!rep.passed());
        assert!(rep.failures.iter().any(|(_, cols)| cols.contains(&5)));
        assert!(matches!(cnot_schedule(&bad), Err(ChainMapError::NotTransversal(_))));
    }

    #[test]
    fn zero_map_is_trivial() {
        let (q, qg) = qg_family(3).unwrap();
        let (s, t) = (q.complex(), qg.complex());
        let maps = s.degrees().map(|i| SparseBitMatrix::zeros(t.dim(i), s.dim(i))).collect();
        let zero = ChainMap::new(s, t, maps).unwrap();
        let rep = verify_chain_map(&zero);
        assert!(rep.passed() && rep.trivial && rep.limit_width == 0);
        assert!(cnot_schedule(&zero).unwrap().pairs.is_empty());
    }

    #[test]
    fn composition() {
        let (q, qg) = qg_family(3).unwrap();
        let phi = layer_embedding(&qg, &q, 1).unwrap();
        let id = ChainMap::identity(phi.target());
        assert_eq!(compose(&id, &phi).unwrap(), phi);
        let shift = ChainMap::identity(phi.source());
        let c = compose(&phi, &shift).unwrap();
        assert!(verify_chain_map(&c).passed());
        assert!(c.limit_width() <= phi.limit_width() * shift.limit_width());
        assert_eq!(compose(&phi, &phi), Err(ChainMapError::Mismatch));
    }

    #[test]
    fn dropped_pair_breaks_stabilizers() {
        let (q, qg) = qg_family(3).unwrap();
        let s = cnot_schedule(&layer_embedding(&qg, &q, 0).unwrap()).unwrap();
        let (ctrl_q, tgt_q) = s.pairs[4];
        let v = verify_logical_cnot(&qg, &q, &s.without_pair(4));
        assert!(!v.x_stabilizer_failures.is_empty());
        assert!(v.x_stabilizer_failures.iter().all(|&r| qg.h_x.row(r).contains(&ctrl_q)));
        let _ = tgt_q;
    }

    #[test]
    fn empty_schedule_has_no_logical_action() {
        let id = CssCode::from_checks(SparseBitMatrix::zeros(0, 2), SparseBitMatrix::zeros(0, 2), None, "bare").unwrap();
        let v = verify_logical_cnot(&id, &id, &CnotSchedule { pairs: vec![], depth_one: true });
        assert!(v.x_stabilizer_failures.is_empty() && v.z_stabilizer_failures.is_empty());
        assert!(!v.x_logical_failures.is_empty() && !v.z_logical_failures.is_empty());
        assert!(v.no_logical_action);
        assert!(!v.passed());
    }

    #[test]
    fn schedule_csv() {
        let s = CnotSchedule { pairs: vec![(3, 1), (5, 2)], depth_one: true };
        assert_eq!(s.to_csv(), "control_index,target_index\n3,1\n5,2\n");
    }
}
