//! 2D and 3D hypergraph-product CSS codes, metachecks and canonical logicals.
//!
//! 2D qubits are ordered left block `(bit of H1, check of H2)` then right
//! block `(check of H1, bit of H2)`. 3D qubits are ordered `(qubit of Q,
//! classical bit)` then `(X-check of Q, classical check)`.

use thiserror::Error;

use crate::codes::{local_repetition, tanner, CodeError, LinearCode};
use crate::complex::{min_weight_nontrivial, ChainComplex, ComplexError};
use crate::gf2::{block_concat, kernel_basis, rank, BitVec, Block, Gf2Error, LinearSolver, SparseBitMatrix, XorBasis};
use crate::graphs::{ring, GraphError, RegularGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HgpError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no admissible unit vectors: {0}")]
    NoAdmissibleUnitVectors(String),
    #[error("code was not built by the expected product construction")]
    WrongConstruction,
    #[error("symplectic pairing of the logical bases is singular")]
    SingularPairing,
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Block provenance of a physical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitLabel {
    pub block: u8,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    Raw,
    Hgp2 { h1: SparseBitMatrix, h2: SparseBitMatrix },
    Hgp3 { inner: Box<CssCode>, hc: SparseBitMatrix },
}

/// CSS code with optional metacheck and a symplectic logical basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub h_x: SparseBitMatrix,
    pub h_z: SparseBitMatrix,
    pub m_z: Option<SparseBitMatrix>,
    /// X-logical representatives, one per row.
    pub g_x: SparseBitMatrix,
    /// Z-logical representatives, paired with `g_x` into the identity.
    pub g_z: SparseBitMatrix,
    pub qubit_labels: Vec<QubitLabel>,
    /// Logicals `0..primary_logicals` form the left (2D) or product (3D) sector.
    pub primary_logicals: usize,
    pub d_x: Option<usize>,
    pub d_z: Option<usize>,
    pub d_ss: Option<usize>,
    pub construction: Construction,
    pub descriptor: String,
}

impl CssCode {
    /// Generic CSS code; logical bases come from [`logical_basis`].
    pub fn from_checks(
        h_x: SparseBitMatrix,
        h_z: SparseBitMatrix,
        m_z: Option<SparseBitMatrix>,
        descriptor: impl Into<String>,
    ) -> Result<Self, HgpError> {
        let n = h_x.cols();
        let (gx, gz) = logical_basis(&h_x, &h_z)?;
        let k = gx.len();
        Ok(Self {
            g_x: SparseBitMatrix::from_bitvecs(n, &gx),
            g_z: SparseBitMatrix::from_bitvecs(n, &gz),
            h_x,
            h_z,
            m_z,
            qubit_labels: (0..n).map(|q| QubitLabel { block: 0, a: q, b: 0 }).collect(),
            primary_logicals: k,
            d_x: None,
            d_z: None,
            d_ss: None,
            construction: Construction::Raw,
            descriptor: descriptor.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.h_x.cols()
    }

    pub fn k(&self) -> usize {
        self.g_x.rows()
    }

    /// `n − rank H_X − rank H_Z`, independent of the stored bases.
    pub fn k_from_ranks(&self) -> usize {
        self.n() - rank(&self.h_x) - rank(&self.h_z)
    }

    pub fn locality(&self) -> usize {
        [&self.h_x, &self.h_z].iter().map(|m| m.max_row_weight().max(m.max_col_weight())).max().unwrap_or(0)
    }

    /// Chain complex with X-checks at degree 0, qubits at 1, Z-checks at 2
    /// and, when present, metachecks at 3.
    pub fn complex(&self) -> ChainComplex {
        let mut dims = vec![self.h_x.rows(), self.n(), self.h_z.rows()];
        let mut maps = vec![self.h_x.clone(), self.h_z.transpose()];
        if let Some(m) = &self.m_z {
            dims.push(m.rows());
            maps.push(m.transpose());
        }
        ChainComplex::new(0, dims, maps).expect("CSS commutation")
    }

    pub fn x_logical(&self, i: usize) -> BitVec {
        self.g_x.row_bitvec(i)
    }

    pub fn z_logical(&self, i: usize) -> BitVec {
        self.g_z.row_bitvec(i)
    }

    /// Logicals that carry data through the protocol: the product sector of
    /// a 3D code, every logical of any other code.
    pub fn active_logicals(&self) -> usize {
        match self.construction {
            Construction::Hgp3 { .. } => self.primary_logicals,
            _ => self.k(),
        }
    }

    /// Inner 2D code and classical check of a 3D code.
    pub fn hgp3_parts(&self) -> Option<(&CssCode, &SparseBitMatrix)> {
        match &self.construction {
            Construction::Hgp3 { inner, hc } => Some((inner, hc)),
            _ => None,
        }
    }

    /// Number of classical bits (layers) of a 3D code.
    pub fn layer_count(&self) -> Option<usize> {
        self.hgp3_parts().map(|(_, hc)| hc.cols())
    }

    /// Certifies `d_X`, `d_Z` and, for metachecked codes, `d_ss` within `cap`
    /// visited vectors each. Distances that exceed the budget stay `None`.
    pub fn certify_distances(&mut self, cap: u64) {
        self.d_x = self.x_distance(cap).ok();
        self.d_z = self.z_distance(cap).ok();
        self.d_ss = self.single_shot_distance(cap).ok();
    }

    pub fn x_distance(&self, cap: u64) -> Result<usize, HgpError> {
        Ok(self.min_x_logical(cap)?.weight())
    }

    pub fn z_distance(&self, cap: u64) -> Result<usize, HgpError> {
        Ok(self.min_z_logical(cap)?.weight())
    }

    /// Minimum-weight nontrivial X-logical operator.
    pub fn min_x_logical(&self, cap: u64) -> Result<BitVec, HgpError> {
        if self.k() == 0 {
            return Err(ComplexError::NoNontrivialClass { degree: 1 }.into());
        }
        Ok(min_weight_nontrivial(&self.h_z, &self.g_z.row_bitvecs(), cap)?)
    }

    pub fn min_z_logical(&self, cap: u64) -> Result<BitVec, HgpError> {
        if self.k() == 0 {
            return Err(ComplexError::NoNontrivialClass { degree: 1 }.into());
        }
        Ok(min_weight_nontrivial(&self.h_x, &self.g_x.row_bitvecs(), cap)?)
    }

    /// Minimum weight of a Z-syndrome that passes every metacheck yet is not
    /// produced by any X error.
    pub fn single_shot_distance(&self, cap: u64) -> Result<usize, HgpError> {
        Ok(self.metacode_systole(cap)?.weight())
    }

    pub fn metacode_systole(&self, cap: u64) -> Result<BitVec, HgpError> {
        let m = self.m_z.as_ref().ok_or(HgpError::WrongConstruction)?;
        let reps = quotient_duals(m, &self.h_z);
        if reps.is_empty() {
            return Err(ComplexError::NoNontrivialClass { degree: 2 }.into());
        }
        Ok(min_weight_nontrivial(m, &reps, cap)?)
    }
}

/// Vectors in `ker b^T` that span it modulo the row space of `a`, for `a b = 0`.
/// A vector of `ker a` lies outside `im b` iff it pairs to 1 with one of them.
pub fn quotient_duals(a: &SparseBitMatrix, b: &SparseBitMatrix) -> Vec<BitVec> {
    let mut basis = XorBasis::new(a.cols());
    for r in a.row_bitvecs() {
        basis.insert(&r);
    }
    kernel_basis(&b.transpose()).into_iter().filter(|z| basis.insert(z)).collect()
}

/// Logical bases for generic checks: representatives of `ker H_Z / row(H_X)`
/// and `ker H_X / row(H_Z)`, with the Z side rotated so the pairing is the identity.
pub fn logical_basis(h_x: &SparseBitMatrix, h_z: &SparseBitMatrix) -> Result<(Vec<BitVec>, Vec<BitVec>), HgpError> {
    let xs = quotient_duals(h_x, &h_z.transpose());
    let zs = quotient_duals(h_z, &h_x.transpose());
    let zs = pair_to_identity(&xs, &zs)?;
    Ok((xs, zs))
}

/// Replaces `zs` by combinations `z'_j` with `x_i · z'_j = δ_ij`.
pub fn pair_to_identity(xs: &[BitVec], zs: &[BitVec]) -> Result<Vec<BitVec>, HgpError> {
    let k = xs.len();
    if zs.len() != k {
        return Err(HgpError::SingularPairing);
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = xs[0].len();
    let p = gram(xs, zs);
    let solver = LinearSolver::new(&p);
    if solver.rank() != k {
        return Err(HgpError::SingularPairing);
    }
    (0..k)
        .map(|j| {
            let y = solver.solve(&BitVec::from_support(k, &[j])).into_option().ok_or(HgpError::SingularPairing)?;
            Ok(y.iter_ones().fold(BitVec::zeros(n), |acc, l| acc.xor(&zs[l])))
        })
        .collect()
}

/// Symplectic Gram matrix `P[i][j] = x_i · z_j`.
pub fn gram(xs: &[BitVec], zs: &[BitVec]) -> SparseBitMatrix {
    let rows = xs.iter().map(|x| zs.iter().enumerate().filter(|(_, z)| x.dot(z)).map(|(j, _)| j).collect()).collect();
    SparseBitMatrix::new(xs.len(), zs.len(), rows).expect("sorted")
}

/// Systematic basis of `ker h` with its information set.
fn systematic_kernel(h: &SparseBitMatrix) -> (Vec<BitVec>, Vec<usize>) {
    let c = LinearCode::from_parity_check(h.clone(), "");
    (c.generator().row_bitvecs(), c.information_set())
}

fn kron_vec(a: &BitVec, b: &BitVec) -> BitVec {
    let mut out = BitVec::zeros(a.len() * b.len());
    for i in a.iter_ones() {
        for j in b.iter_ones() {
            out.set(i * b.len() + j, true);
        }
    }
    out
}

/// Hypergraph product `H_X = (I ⊗ H2^T | H1^T ⊗ I)`, `H_Z = (H1 ⊗ I | I ⊗ H2)`.
pub fn hgp2(h1: &SparseBitMatrix, h2: &SparseBitMatrix) -> CssCode {
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let h_x = SparseBitMatrix::hstack(&[
        &SparseBitMatrix::identity(n1).kron(&h2.transpose()),
        &h1.transpose().kron(&SparseBitMatrix::identity(n2)),
    ])
    .expect("equal heights");
    let h_z = SparseBitMatrix::hstack(&[&h1.kron(&SparseBitMatrix::identity(m2)), &SparseBitMatrix::identity(m1).kron(h2)])
        .expect("equal heights");
    let mut labels = Vec::with_capacity(n1 * m2 + m1 * n2);
    labels.extend((0..n1).flat_map(|i| (0..m2).map(move |j| QubitLabel { block: 0, a: i, b: j })));
    labels.extend((0..m1).flat_map(|i| (0..n2).map(move |j| QubitLabel { block: 1, a: i, b: j })));
    let (gx, gz, left) = canonical_logicals_2d(h1, h2);
    let n = h_x.cols();
    CssCode {
        h_x,
        h_z,
        m_z: None,
        g_x: SparseBitMatrix::from_bitvecs(n, &gx),
        g_z: SparseBitMatrix::from_bitvecs(n, &gz),
        qubit_labels: labels,
        primary_logicals: left,
        d_x: None,
        d_z: None,
        d_ss: None,
        construction: Construction::Hgp2 { h1: h1.clone(), h2: h2.clone() },
        descriptor: format!("hgp2({}x{}, {}x{})", m1, n1, m2, n2),
    }
}

/// Canonical product logicals of `hgp2(h1, h2)`: the left sector
/// `Z̄ = (e_i ⊗ g | 0)`, `X̄ = (g1 ⊗ e_j | 0)` followed by the right sector
/// `Z̄ = (0 | g1' ⊗ e_j)`, `X̄ = (0 | e_i ⊗ g2)`. Unit vectors sit on
/// information sets, so the pairing is the identity. Returns `(G_X, G_Z, left count)`.
pub fn canonical_logicals_2d(h1: &SparseBitMatrix, h2: &SparseBitMatrix) -> (Vec<BitVec>, Vec<BitVec>, usize) {
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let left_len = n1 * m2;
    let n = left_len + m1 * n2;
    let (k1, info1) = systematic_kernel(h1);
    let (k2t, info2t) = systematic_kernel(&h2.transpose());
    let (k1t, info1t) = systematic_kernel(&h1.transpose());
    let (k2, info2) = systematic_kernel(h2);
    let unit = |len: usize, i: usize| BitVec::from_support(len, &[i]);
    let place = |v: BitVec, right: bool| {
        let mut out = BitVec::zeros(n);
        let off = if right { left_len } else { 0 };
        for q in v.iter_ones() {
            out.set(off + q, true);
        }
        out
    };
    let mut gx = Vec::new();
    let mut gz = Vec::new();
    for (a, g1) in k1.iter().enumerate() {
        for (b, g) in k2t.iter().enumerate() {
            gz.push(place(kron_vec(&unit(n1, info1[a]), g), false));
            gx.push(place(kron_vec(g1, &unit(m2, info2t[b])), false));
        }
    }
    let left = gx.len();
    for (a, g1t) in k1t.iter().enumerate() {
        for (b, g2) in k2.iter().enumerate() {
            gz.push(place(kron_vec(g1t, &unit(n2, info2[b])), true));
            gx.push(place(kron_vec(&unit(m1, info1t[a]), g2), true));
        }
    }
    (gx, gz, left)
}

/// 3D product of a CSS code with a classical check `hc`:
/// `H̃_X = (H_X ⊗ I | I ⊗ hc^T)`, `H̃_Z = [[H_Z ⊗ I, 0], [I ⊗ hc, H_X^T ⊗ I]]`,
/// metacheck `M̃_Z = (I ⊗ hc | H_Z ⊗ I)` (all rows kept).
pub fn hgp3(q: &CssCode, hc: &SparseBitMatrix) -> CssCode {
    let (mc, nc) = (hc.rows(), hc.cols());
    let (mx, mz, nq) = (q.h_x.rows(), q.h_z.rows(), q.n());
    let i = SparseBitMatrix::identity;
    let hx_blk = q.h_x.kron(&i(nc));
    let hct = hc.transpose();
    let h_x = block_concat(&[vec![Block::Mat(&hx_blk), Block::Mat(&i(mx).kron(&hct))]]).expect("shapes");
    let hz_top = q.h_z.kron(&i(nc));
    let hz_bl = i(nq).kron(hc);
    let hz_br = q.h_x.transpose().kron(&i(mc));
    let h_z = block_concat(&[
        vec![Block::Mat(&hz_top), Block::Zero],
        vec![Block::Mat(&hz_bl), Block::Mat(&hz_br)],
    ])
    .expect("shapes");
    let m_z = block_concat(&[vec![Block::Mat(&i(mz).kron(hc)), Block::Mat(&q.h_z.kron(&i(mc)))]]).expect("shapes");
    let mut labels = Vec::with_capacity(nq * nc + mx * mc);
    labels.extend((0..nq).flat_map(|a| (0..nc).map(move |b| QubitLabel { block: 0, a, b })));
    labels.extend((0..mx).flat_map(|a| (0..mc).map(move |b| QubitLabel { block: 1, a, b })));
    let (gx, gz, primary) = canonical_logicals_3d(q, hc);
    let n = h_x.cols();
    CssCode {
        h_x,
        h_z,
        m_z: Some(m_z),
        g_x: SparseBitMatrix::from_bitvecs(n, &gx),
        g_z: SparseBitMatrix::from_bitvecs(n, &gz),
        qubit_labels: labels,
        primary_logicals: primary,
        d_x: None,
        d_z: None,
        d_ss: None,
        construction: Construction::Hgp3 { inner: Box::new(q.clone()), hc: hc.clone() },
        descriptor: format!("hgp3({}, {}x{})", q.descriptor, mc, nc),
    }
}

/// Canonical logicals of `hgp3(q, hc)`. Product sector (index `a·k_c + i`):
/// strings `Z̄ = (z_a ⊗ e_i | 0)` and membranes `X̄ = (x_a ⊗ g_i | 0)` with
/// `g_i ∈ ker hc` and `e_i` on its information set. The remaining sector is
/// `X̄ = (0 | u ⊗ b)`, `Z̄ = (0 | e_r ⊗ h)` with `u ∈ ker H_X^T`, `h ∈ ker hc^T`,
/// paired to the identity. Returns `(G_X, G_Z, product count)`.
pub fn canonical_logicals_3d(q: &CssCode, hc: &SparseBitMatrix) -> (Vec<BitVec>, Vec<BitVec>, usize) {
    let (mc, nc) = (hc.rows(), hc.cols());
    let (mx, nq) = (q.h_x.rows(), q.n());
    let left_len = nq * nc;
    let n = left_len + mx * mc;
    let place = |v: BitVec, right: bool| {
        let mut out = BitVec::zeros(n);
        let off = if right { left_len } else { 0 };
        for p in v.iter_ones() {
            out.set(off + p, true);
        }
        out
    };
    let (gc, infoc) = systematic_kernel(hc);
    let mut gx = Vec::new();
    let mut gz = Vec::new();
    for a in 0..q.k() {
        let (xa, za) = (q.x_logical(a), q.z_logical(a));
        for (i, g) in gc.iter().enumerate() {
            gx.push(place(kron_vec(&xa, g), false));
            gz.push(place(kron_vec(&za, &BitVec::from_support(nc, &[infoc[i]])), false));
        }
    }
    let primary = gx.len();
    let us = kernel_basis(&q.h_x.transpose());
    let hs = kernel_basis(&hc.transpose());
    if !us.is_empty() && !hs.is_empty() {
        let unit_reps = |kernel: &[BitVec], len: usize| -> Vec<BitVec> {
            let info = kernel_info_set(kernel);
            info.iter().map(|&p| BitVec::from_support(len, &[p])).collect()
        };
        let es = unit_reps(&us, mx);
        let bvecs = unit_reps(&hs, mc);
        let (us_sys, hs_sys) = (systematize(&us), systematize(&hs));
        for (u, e) in us_sys.iter().zip(&es) {
            for (h, b) in hs_sys.iter().zip(&bvecs) {
                gx.push(place(kron_vec(u, b), true));
                gz.push(place(kron_vec(e, h), true));
            }
        }
    }
    (gx, gz, primary)
}

/// Reduced row echelon form of a set of independent vectors.
fn systematize(vs: &[BitVec]) -> Vec<BitVec> {
    let len = vs.first().map_or(0, BitVec::len);
    let m = SparseBitMatrix::from_bitvecs(len, vs);
    let mut d = m.to_dense();
    let pivots = d.rref();
    (0..pivots.len()).map(|r| d.row_bitvec(r)).collect()
}

/// Pivot columns of the reduced form: `systematize(vs)[a]` is the only
/// vector with a 1 at position `a`.
fn kernel_info_set(vs: &[BitVec]) -> Vec<usize> {
    let len = vs.first().map_or(0, BitVec::len);
    let mut d = SparseBitMatrix::from_bitvecs(len, vs).to_dense();
    d.rref()
}

/// The 3D code `Q_G = hgp3(Q, H_G)` with `H_G` the Tanner code of `g` with
/// the loop-forming repetition local code.
#[allow(non_snake_case)]
pub fn build_QG(q: &CssCode, g: &RegularGraph) -> Result<CssCode, HgpError> {
    if !matches!(q.construction, Construction::Hgp2 { .. }) {
        return Err(HgpError::WrongConstruction);
    }
    if !g.is_connected() {
        return Err(HgpError::Disconnected);
    }
    let cg = tanner(g, &local_repetition(g.degree())?)?;
    let mut code = hgp3(q, cg.h());
    code.descriptor = format!("Q_G({}, {} vertices, degree {})", q.descriptor, g.vertex_count(), g.degree());
    Ok(code)
}

/// Ring code of length `l` as a Tanner code on the cycle graph.
pub fn ring_check(l: usize) -> Result<SparseBitMatrix, HgpError> {
    Ok(tanner(&ring(l)?, &local_repetition(2)?)?.h().clone())
}

/// Toric code `hgp2(ring_l, ring_l)`.
pub fn toric(l: usize) -> Result<CssCode, HgpError> {
    let h = ring_check(l)?;
    let mut c = hgp2(&h, &h);
    c.descriptor = format!("toric({l})");
    Ok(c)
}

/// The pair `(Q, Q_G)` with `Q` the toric code of size `l` and `G = ring(l)`.
pub fn qg_family(l: usize) -> Result<(CssCode, CssCode), HgpError> {
    let q = toric(l)?;
    let qg = build_QG(&q, &ring(l)?)?;
    Ok((q, qg))
}

/// Outcome of [`css_validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CssReport {
    pub commutation: bool,
    pub metacheck: bool,
    pub x_logicals_commute: bool,
    pub z_logicals_commute: bool,
    pub pairing_identity: bool,
    pub logical_rank: bool,
    pub k_consistent: bool,
    pub locality: usize,
    pub failures: Vec<String>,
}

impl CssReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn css_validate(code: &CssCode) -> CssReport {
    let mut r = CssReport { locality: code.locality(), ..Default::default() };
    let commute = |a: &SparseBitMatrix, b: &SparseBitMatrix| a.matmul(&b.transpose()).map(|p| p.is_zero()).unwrap_or(false);
    r.commutation = commute(&code.h_x, &code.h_z);
    if !r.commutation {
        r.failures.push("H_X H_Z^T != 0".into());
    }
    r.metacheck = code.m_z.as_ref().map_or(true, |m| m.matmul(&code.h_z).map(|p| p.is_zero()).unwrap_or(false));
    if !r.metacheck {
        r.failures.push("M_Z H_Z != 0".into());
    }
    r.x_logicals_commute = commute(&code.g_x, &code.h_z);
    if !r.x_logicals_commute {
        r.failures.push("G_X does not commute with H_Z".into());
    }
    r.z_logicals_commute = commute(&code.g_z, &code.h_x);
    if !r.z_logicals_commute {
        r.failures.push("G_Z does not commute with H_X".into());
    }
    let k = code.k();
    r.pairing_identity = code.g_z.rows() == k
        && code.g_x.matmul(&code.g_z.transpose()).map(|p| p == SparseBitMatrix::identity(k)).unwrap_or(false);
    if !r.pairing_identity {
        r.failures.push("G_X G_Z^T != I".into());
    }
    let independent = |h: &SparseBitMatrix, g: &SparseBitMatrix| {
        SparseBitMatrix::vstack(&[h, g]).map(|m| rank(&m)) == Ok(rank(h) + k)
    };
    r.logical_rank = independent(&code.h_x, &code.g_x) && independent(&code.h_z, &code.g_z);
    if !r.logical_rank {
        r.failures.push("logicals not independent modulo stabilizers".into());
    }
    r.k_consistent = code.k_from_ranks() == k;
    if !r.k_consistent {
        r.failures.push(format!("k = {} from ranks but {} logical pairs", code.k_from_ranks(), k));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{random_code, repetition_ring};
    use crate::graphs::random_regular;
    use crate::gf2::RowSpace;

    const CAP: u64 = 1 << 30;

    #[test]
    fn toric_18() {
        let mut t = toric(3).unwrap();
        assert_eq!(t.n(), 18);
        assert_eq!(t.k(), 2);
        t.certify_distances(CAP);
        assert_eq!((t.d_x, t.d_z), (Some(3), Some(3)));
        let rep = css_validate(&t);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.locality, 4);
        assert_eq!(t.h_z.rows(), 9);
        assert!(t.h_z.row_supports().iter().all(|r| r.len() == 4));
    }

    #[test]
    fn ring_check_matches_circulant() {
        for l in 3..7 {
            let h = ring_check(l).unwrap();
            assert_eq!(rank(&h), l - 1);
            assert_eq!(LinearCode::from_parity_check(h, "").k(), 1);
            assert_eq!(RowSpace::new(repetition_ring(l).unwrap().h()).dim(), l - 1);
        }
    }

    #[test]
    fn canonical_2d_shapes() {
        let t = toric(3).unwrap();
        assert_eq!(t.primary_logicals, 1);
        for i in 0..2 {
            let z = t.z_logical(i);
            assert_eq!(z.weight(), 3);
            let blocks: Vec<u8> = z.iter_ones().map(|q| t.qubit_labels[q].block).collect();
            assert!(blocks.iter().all(|&b| b == blocks[0]));
            // Single line of the block grid.
            let labels: Vec<QubitLabel> = z.iter_ones().map(|q| t.qubit_labels[q]).collect();
            assert!(labels.iter().all(|l| l.a == labels[0].a) || labels.iter().all(|l| l.b == labels[0].b));
        }
        assert_eq!(t.qubit_labels[t.z_logical(0).first_one().unwrap()].block, 0);
        assert_eq!(t.qubit_labels[t.z_logical(1).first_one().unwrap()].block, 1);
    }

    #[test]
    fn hgp2_commutes_on_tanner_inputs() {
        for seed in 0..20u64 {
            let g1 = random_regular(8, 4, seed).unwrap();
            let g2 = random_regular(6, 4, seed + 1000).unwrap();
            let c1 = tanner(&g1, &random_code(4, 2, seed).unwrap()).unwrap();
            let c2 = tanner(&g2, &random_code(4, 3, seed + 7).unwrap()).unwrap();
            let code = hgp2(c1.h(), c2.h());
            let rep = css_validate(&code);
            assert!(rep.passed(), "seed {seed}: {:?}", rep.failures);
            assert_eq!(code.n(), c1.n() * c2.m() + c1.m() * c2.n());
            let w_bound = c1.h().max_row_weight().max(c1.h().max_col_weight())
                + c2.h().max_row_weight().max(c2.h().max_col_weight());
            assert!(rep.locality <= w_bound);
        }
    }

    #[test]
    fn hgp3_on_toric_and_ring() {
        let q = toric(3).unwrap();
        let hc = repetition_ring(3).unwrap().h().clone();
        let c = hgp3(&q, &hc);
        assert_eq!(c.n(), q.n() * 3 + q.h_x.rows() * 3);
        let rep = css_validate(&c);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(c.k() >= q.k());
        assert_eq!(c.k(), 3);
        assert!(c.m_z.as_ref().unwrap().matmul(&c.h_z).unwrap().is_zero());
        let tensor = q.complex().tensor(&ChainComplex::from_check_matrix(&hc));
        assert_eq!(tensor.homology_dim(1), c.k());
    }

    #[test]
    fn hgp3_matches_tensor_up_to_relabeling() {
        let q = toric(3).unwrap();
        let hc = ring_check(3).unwrap();
        let c = hgp3(&q, &hc);
        let t = q.complex().tensor(&ChainComplex::from_check_matrix(&hc));
        // Tensor degree-1 order is (X-check ⊗ check) then (qubit ⊗ bit).
        let (mx, mc, nq, nc) = (q.h_x.rows(), hc.rows(), q.n(), hc.cols());
        let mut perm = vec![0; c.n()];
        for x in 0..mx * mc {
            perm[x] = nq * nc + x;
        }
        for y in 0..nq * nc {
            perm[mx * mc + y] = y;
        }
        let t1 = t.permuted(1, &perm);
        assert_eq!(t1.boundary(1), c.h_x);
        // Degree 2 of the tensor: (qubit ⊗ check) then (Z-check ⊗ bit).
        let mz = q.h_z.rows();
        let mut perm2 = vec![0; t.dim(2)];
        for x in 0..nq * mc {
            perm2[x] = mz * nc + x;
        }
        for y in 0..mz * nc {
            perm2[nq * mc + y] = y;
        }
        let t2 = t1.permuted(2, &perm2);
        assert_eq!(t2.boundary(2).transpose(), c.h_z);
        assert_eq!(t2.boundary(3).transpose(), *c.m_z.as_ref().unwrap());
    }

    #[test]
    fn qg_toric3() {
        let (q, mut qg) = qg_family(3).unwrap();
        assert_eq!(qg.n(), 81);
        assert_eq!(qg.layer_count(), Some(3));
        assert!(qg.m_z.as_ref().unwrap().rows() > 0);
        assert!(css_validate(&qg).passed());
        qg.certify_distances(CAP);
        assert_eq!(qg.d_z, Some(3));
        assert_eq!(qg.d_x, Some(9));
        assert!(qg.d_ss.unwrap() > 0);
        assert_eq!(qg.primary_logicals, q.k());
        for i in 0..q.k() {
            assert_eq!(qg.x_logical(i).weight(), 9);
            assert_eq!(qg.z_logical(i).weight(), 3);
            let layers: Vec<usize> = qg.z_logical(i).iter_ones().map(|p| qg.qubit_labels[p].b).collect();
            assert!(layers.iter().all(|&b| b == layers[0]));
        }
    }

    #[test]
    fn qg_small_sizes() {
        let (_, qg2) = qg_family(2).unwrap();
        assert_eq!(qg2.n(), 24);
        assert!(css_validate(&qg2).passed());
        let (_, qg3) = qg_family(3).unwrap();
        assert_eq!(qg3.n(), 81);
    }

    #[test]
    fn build_qg_rejects_disconnected() {
        let q = toric(3).unwrap();
        let g = RegularGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], false).unwrap();
        assert_eq!(build_QG(&q, &g), Err(HgpError::Disconnected));
    }

    #[test]
    fn corrupted_code_reports_failure() {
        let mut t = toric(3).unwrap();
        let mut rows = t.h_z.row_supports().to_vec();
        rows[0] = vec![rows[0][0]];
        t.h_z = SparseBitMatrix::new(t.h_z.rows(), t.h_z.cols(), rows).unwrap();
        let rep = css_validate(&t);
        assert!(!rep.commutation);
        assert!(!rep.passed());
    }

    #[test]
    fn generic_logical_basis_pairs_to_identity() {
        let t = toric(4).unwrap();
        let c = CssCode::from_checks(t.h_x.clone(), t.h_z.clone(), None, "raw").unwrap();
        assert!(css_validate(&c).passed());
        assert_eq!(c.k(), 2);
    }
}
