//! Three-block CCZ construction from cup products on a product of Tanner
//! complexes, with algebraic verification of the logical action.
//!
//! Each direction `i` carries a graph `G_i`; block `b` uses the local code
//! `C_{b,i}` there. In a direction the bits (edges) are degree-0 cochains and
//! the check coordinates `(vertex, row)` are degree-1 cochains. The local
//! diagonal form `Σ_j u_j v_j w_j` on `F_2^Δ` is written as
//! `Σ_b Σ_a ⟨h_{b,a}, ·⟩ Φ^b_a(·, ·)`, with `h_{b,a}` the check rows of
//! `C_{b,i}`. Such `Φ` exist iff the direction's triple has the
//! multiplication property. The per-direction trilinear piece with block `b`
//! active is `t^b((x, a); e, e') = Φ^b_a[pos_x(e)][pos_x(e')]`. The total form
//! on qubits is the product of the three pieces over every assignment of the
//! blocks to distinct active directions.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{dual, local_repetition, tanner, CodeError, LinearCode};
use crate::gf2::{solve, BitVec, RowSpace, SparseBitMatrix};
use crate::graphs::RegularGraph;
use crate::hgp::{hgp2, hgp3, CssCode};
use crate::noise::substream;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CczError {
    #[error("local codes have lengths {0}, {1}, {2}")]
    LengthMismatch(usize, usize, usize),
    #[error("direction {0}: blocks use different graphs")]
    GraphMismatch(usize),
    #[error("direction {0}: graph is disconnected")]
    Disconnected(usize),
    #[error("direction {0}: local codes lack the multiplication property")]
    NoMultiplication(usize),
    #[error("vector is not an X logical of block 1")]
    NotALogical,
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// True iff `Σ_i c1_i c2_i c3_i = 0` for all generator triples.
pub fn multiplication_check(c1: &LinearCode, c2: &LinearCode, c3: &LinearCode) -> Result<bool, CczError> {
    if c1.n() != c2.n() || c1.n() != c3.n() {
        return Err(CczError::LengthMismatch(c1.n(), c2.n(), c3.n()));
    }
    let (g1, g2, g3) = (c1.generator().row_bitvecs(), c2.generator().row_bitvecs(), c3.generator().row_bitvecs());
    for a in &g1 {
        for b in &g2 {
            let ab = BitVec::from_support(a.len(), &a.iter_ones().filter(|&i| b.get(i)).collect::<Vec<_>>());
            if g3.iter().any(|c| ab.dot(c)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Φ^b_a` as `Δ` row vectors of length `Δ`, per block and check row.
pub type LocalForms = [Vec<Vec<BitVec>>; 3];

/// Solves `Σ_j u_j v_j w_j = Σ_b Σ_a ⟨h_{b,a}, arg_b⟩ Φ^b_a(other two args)`.
/// `None` iff the triple lacks the multiplication property.
pub fn local_decomposition(codes: [&LinearCode; 3]) -> Option<LocalForms> {
    let d = codes[0].n();
    if codes.iter().any(|c| c.n() != d) {
        return None;
    }
    let d2 = d * d;
    let rows: Vec<usize> = codes.iter().map(|c| c.m()).collect();
    let offsets = [0, rows[0] * d2, (rows[0] + rows[1]) * d2];
    let unknowns = offsets[2] + rows[2] * d2;
    let mut eqs = Vec::with_capacity(d * d2);
    let mut rhs = BitVec::zeros(d * d2);
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                let mut row = Vec::new();
                let coords = [j, k, l];
                for b in 0..3 {
                    let (p, q) = match b {
                        0 => (k, l),
                        1 => (j, l),
                        _ => (j, k),
                    };
                    for a in 0..rows[b] {
                        if codes[b].h().get(a, coords[b]) {
                            row.push(offsets[b] + a * d2 + p * d + q);
                        }
                    }
                }
                if j == k && k == l {
                    rhs.set(j * d2 + k * d + l, true);
                }
                eqs.push(row);
            }
        }
    }
    let m = SparseBitMatrix::from_rows_mod2(d * d2, unknowns, eqs);
    let sol = solve(&m, &rhs).into_option()?;
    let mut out: LocalForms = Default::default();
    for b in 0..3 {
        for a in 0..rows[b] {
            let phi = (0..d)
                .map(|p| {
                    let s: Vec<usize> = (0..d).filter(|&q| sol.get(offsets[b] + a * d2 + p * d + q)).collect();
                    BitVec::from_support(d, &s)
                })
                .collect();
            out[b].push(phi);
        }
    }
    Some(out)
}

/// Cochain coordinates of a qubit of a three-direction product block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellCoords {
    /// Direction in which the qubit has degree 1.
    pub active: usize,
    /// Edge index in passive directions, check index in the active one.
    pub coords: [usize; 3],
}

/// Sizes of a block's three directional complexes: `(bits, checks)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub n: [usize; 3],
    pub m: [usize; 3],
}

impl BlockShape {
    /// Qubit count of `hgp3(hgp2(H1, H2), H3)`.
    pub fn qubits(&self) -> usize {
        let [n1, n2, n3] = self.n;
        let [m1, m2, m3] = self.m;
        (n1 * m2 + m1 * n2) * n3 + n1 * n2 * m3
    }

    pub fn decode(&self, idx: usize) -> CellCoords {
        let [n1, n2, n3] = self.n;
        let [m1, m2, m3] = self.m;
        let nq = n1 * m2 + m1 * n2;
        if idx < nq * n3 {
            let (q, c3) = (idx / n3, idx % n3);
            if q < n1 * m2 {
                CellCoords { active: 1, coords: [q / m2, q % m2, c3] }
            } else {
                let r = q - n1 * m2;
                CellCoords { active: 0, coords: [r / n2, r % n2, c3] }
            }
        } else {
            let r = idx - nq * n3;
            let (x, c3) = (r / m3, r % m3);
            CellCoords { active: 2, coords: [x / n2, x % n2, c3] }
        }
    }

    pub fn encode(&self, c: CellCoords) -> usize {
        let [n1, n2, n3] = self.n;
        let [m1, m2, m3] = self.m;
        let nq = n1 * m2 + m1 * n2;
        let [a, b, z] = c.coords;
        match c.active {
            1 => (a * m2 + b) * n3 + z,
            0 => (n1 * m2 + a * n2 + b) * n3 + z,
            _ => nq * n3 + (a * n2 + b) * m3 + z,
        }
    }
}

/// Three product blocks sharing a graph per direction.
#[derive(Clone, Debug)]
pub struct CczTriple {
    pub blocks: [CssCode; 3],
    pub shapes: [BlockShape; 3],
    pub graphs: [RegularGraph; 3],
    /// `local[b][i]`: local code of block `b` in direction `i`.
    pub local: [[LinearCode; 3]; 3],
    /// `forms[i]`: local decomposition of direction `i`.
    pub forms: [LocalForms; 3],
    pub support: Vec<[usize; 3]>,
}

/// Three blocks from explicit per-block, per-direction `(graph, local code)`.
pub fn assemble_triple(spec: [[(RegularGraph, LinearCode); 3]; 3]) -> Result<CczTriple, CczError> {
    for i in 0..3 {
        let g = &spec[0][i].0;
        if spec[1][i].0 != *g || spec[2][i].0 != *g {
            return Err(CczError::GraphMismatch(i));
        }
        if !g.is_connected() {
            return Err(CczError::Disconnected(i));
        }
    }
    let graphs = [spec[0][0].0.clone(), spec[0][1].0.clone(), spec[0][2].0.clone()];
    let local: [[LinearCode; 3]; 3] = std::array::from_fn(|b| std::array::from_fn(|i| spec[b][i].1.clone()));
    let mut forms: [LocalForms; 3] = Default::default();
    for i in 0..3 {
        let trio = [&local[0][i], &local[1][i], &local[2][i]];
        if !multiplication_check(trio[0], trio[1], trio[2])? {
            return Err(CczError::NoMultiplication(i));
        }
        forms[i] = local_decomposition(trio).ok_or(CczError::NoMultiplication(i))?;
    }
    let mut blocks = Vec::with_capacity(3);
    let mut shapes = Vec::with_capacity(3);
    for b in 0..3 {
        let hs: Vec<SparseBitMatrix> =
            (0..3).map(|i| tanner(&graphs[i], &local[b][i]).map(|c| c.h().clone())).collect::<Result<_, _>>()?;
        let code = hgp3(&hgp2(&hs[0], &hs[1]), &hs[2]);
        shapes.push(BlockShape {
            n: [hs[0].cols(), hs[1].cols(), hs[2].cols()],
            m: [hs[0].rows(), hs[1].rows(), hs[2].rows()],
        });
        blocks.push(code);
    }
    let mut triple = CczTriple {
        blocks: blocks.try_into().expect("three blocks"),
        shapes: shapes.try_into().expect("three shapes"),
        graphs,
        local,
        forms,
        support: Vec::new(),
    };
    triple.support = cup_support(&triple);
    Ok(triple)
}

/// Blocks `T(G1,C1)⊗T(G2,C2^⊥)⊗T(G3,C0)`, `T(G1,C0)⊗T(G2,C2)⊗T(G3,C3^⊥)`
/// and `T(G1,C1^⊥)⊗T(G2,C0)⊗T(G3,C3)`, with `C0` the loop-forming
/// repetition code of each degree.
pub fn build_ccz_triple(
    g1: &RegularGraph,
    g2: &RegularGraph,
    g3: &RegularGraph,
    c1: &LinearCode,
    c2: &LinearCode,
    c3: &LinearCode,
) -> Result<CczTriple, CczError> {
    for (g, c) in [(g1, c1), (g2, c2), (g3, c3)] {
        if g.degree() != c.n() {
            return Err(CodeError::LengthMismatch { local: c.n(), degree: g.degree() }.into());
        }
    }
    let c0 = |g: &RegularGraph| local_repetition(g.degree());
    let spec = [
        [(g1.clone(), c1.clone()), (g2.clone(), dual(c2)), (g3.clone(), c0(g3)?)],
        [(g1.clone(), c0(g1)?), (g2.clone(), c2.clone()), (g3.clone(), dual(c3))],
        [(g1.clone(), dual(c1)), (g2.clone(), c0(g2)?), (g3.clone(), c3.clone())],
    ];
    assemble_triple(spec)
}

/// Per-direction nonzero local entries `(active check, passive edge of the
/// lower block, passive edge of the higher block)` with block `active` active.
fn direction_triples(t: &CczTriple, dir: usize, active: usize) -> Vec<(usize, usize, usize)> {
    let g = &t.graphs[dir];
    let forms = &t.forms[dir][active];
    let r = t.local[active][dir].m();
    let mut out = Vec::new();
    for x in 0..g.vertex_count() {
        let inc = g.incident(x);
        for (a, phi) in forms.iter().enumerate().take(r) {
            for (p, row) in phi.iter().enumerate() {
                for q in row.iter_ones() {
                    out.push((x * r + a, inc[p], inc[q]));
                }
            }
        }
    }
    out
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Support `{(j1, j2, j3) : f(e_j1, e_j2, e_j3) = 1}` of the trilinear form,
/// sorted and reduced mod 2.
pub fn cup_support(t: &CczTriple) -> Vec<[usize; 3]> {
    let mut set = BTreeSet::new();
    for perm in PERMUTATIONS {
        // perm[b]: active direction of block b; owner[i]: block active in direction i.
        let mut owner = [0usize; 3];
        for b in 0..3 {
            owner[perm[b]] = b;
        }
        let lists: Vec<Vec<(usize, usize, usize)>> = (0..3).map(|i| direction_triples(t, i, owner[i])).collect();
        for &l0 in &lists[0] {
            for &l1 in &lists[1] {
                for &l2 in &lists[2] {
                    let per_dir = [l0, l1, l2];
                    let mut coords = [[0usize; 3]; 3];
                    for (i, &(chk, e_lo, e_hi)) in per_dir.iter().enumerate() {
                        let act = owner[i];
                        let passive: Vec<usize> = (0..3).filter(|&b| b != act).collect();
                        coords[act][i] = chk;
                        coords[passive[0]][i] = e_lo;
                        coords[passive[1]][i] = e_hi;
                    }
                    let js: [usize; 3] =
                        std::array::from_fn(|b| t.shapes[b].encode(CellCoords { active: perm[b], coords: coords[b] }));
                    if !set.insert(js) {
                        set.remove(&js);
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

/// Trilinear form with a given support.
#[derive(Clone, Debug)]
pub struct TrilinearForm {
    pub n: [usize; 3],
    by_first: Vec<Vec<(usize, usize)>>,
}

impl TrilinearForm {
    pub fn new(n: [usize; 3], support: &[[usize; 3]]) -> Self {
        let mut by_first = vec![Vec::new(); n[0]];
        for s in support {
            by_first[s[0]].push((s[1], s[2]));
        }
        Self { n, by_first }
    }

    /// Bilinear form `f(a, ·, ·)` as rows indexed by the second argument.
    pub fn contract_first(&self, a: &BitVec) -> Vec<BitVec> {
        let mut rows = vec![BitVec::zeros(self.n[2]); self.n[1]];
        for j1 in a.iter_ones() {
            for &(j2, j3) in &self.by_first[j1] {
                rows[j2].flip(j3);
            }
        }
        rows
    }

    pub fn eval(&self, a: &BitVec, b: &BitVec, c: &BitVec) -> bool {
        bilinear_eval(&self.contract_first(a), b, c)
    }
}

/// `bᵀ M c` with `M` given by rows.
pub fn bilinear_eval(rows: &[BitVec], b: &BitVec, c: &BitVec) -> bool {
    let mut acc = BitVec::zeros(c.len());
    for j in b.iter_ones() {
        acc.xor_assign(&rows[j]);
    }
    acc.dot(c)
}

/// Invariance failure: `(argument slot of the stabilizer, generator index,
/// spanning-set indices of the other two arguments)`.
pub type InvarianceFailure = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CczReport {
    pub support_size: usize,
    pub invariance_failures: usize,
    pub first_failures: Vec<InvarianceFailure>,
    /// `L[i1][i2][i3]`.
    pub logical_tensor: Vec<Vec<Vec<u8>>>,
    pub nontrivial: bool,
}

impl CczReport {
    pub fn invariant(&self) -> bool {
        self.invariance_failures == 0
    }

    pub fn passed(&self) -> bool {
        self.invariant() && self.nontrivial
    }
}

const FAILURE_SAMPLE: usize = 20;

/// X-cocycle spanning set: stabilizer rows followed by logicals.
fn cocycle_span(code: &CssCode) -> Vec<BitVec> {
    let mut v = code.h_x.row_bitvecs();
    v.extend((0..code.k()).map(|i| code.x_logical(i)));
    v
}

fn permute_support(support: &[[usize; 3]], order: [usize; 3]) -> Vec<[usize; 3]> {
    support.iter().map(|s| [s[order[0]], s[order[1]], s[order[2]]]).collect()
}

/// Coboundary invariance and logical tensor for an arbitrary support on
/// three CSS blocks.
pub fn verify_support(blocks: [&CssCode; 3], support: &[[usize; 3]]) -> CczReport {
    let spans: Vec<Vec<BitVec>> = blocks.iter().map(|c| cocycle_span(c)).collect();
    let mut failures = 0usize;
    let mut first = Vec::new();
    for slot in 0..3 {
        let others = [(slot + 1) % 3, (slot + 2) % 3];
        let (o1, o2) = (others[0].min(others[1]), others[0].max(others[1]));
        let order = [slot, o1, o2];
        let n = [blocks[slot].n(), blocks[o1].n(), blocks[o2].n()];
        let form = TrilinearForm::new(n, &permute_support(support, order));
        for (gi, gen) in blocks[slot].h_x.row_bitvecs().iter().enumerate() {
            let rows = form.contract_first(gen);
            for (a, z1) in spans[o1].iter().enumerate() {
                let mut acc = BitVec::zeros(n[2]);
                for j in z1.iter_ones() {
                    acc.xor_assign(&rows[j]);
                }
                for (b, z2) in spans[o2].iter().enumerate() {
                    if acc.dot(z2) {
                        failures += 1;
                        if first.len() < FAILURE_SAMPLE {
                            first.push((slot, gi, a, b));
                        }
                    }
                }
            }
        }
    }
    let form = TrilinearForm::new([blocks[0].n(), blocks[1].n(), blocks[2].n()], support);
    let ks = [blocks[0].k(), blocks[1].k(), blocks[2].k()];
    let xs: Vec<Vec<BitVec>> = blocks.iter().map(|c| (0..c.k()).map(|i| c.x_logical(i)).collect()).collect();
    let mut tensor = vec![vec![vec![0u8; ks[2]]; ks[1]]; ks[0]];
    let mut nontrivial = false;
    for (i1, x1) in xs[0].iter().enumerate() {
        let rows = form.contract_first(x1);
        for (i2, x2) in xs[1].iter().enumerate() {
            for (i3, x3) in xs[2].iter().enumerate() {
                if bilinear_eval(&rows, x2, x3) {
                    tensor[i1][i2][i3] = 1;
                    nontrivial = true;
                }
            }
        }
    }
    CczReport {
        support_size: support.len(),
        invariance_failures: failures,
        first_failures: first,
        logical_tensor: tensor,
        nontrivial,
    }
}

pub fn ccz_verify(t: &CczTriple) -> CczReport {
    verify_support([&t.blocks[0], &t.blocks[1], &t.blocks[2]], &t.support)
}

/// Uniformly random support of the given size on the triple's qubits.
pub fn random_support(t: &CczTriple, size: usize, seed: u64) -> Vec<[usize; 3]> {
    let mut rng = substream(seed, 0xCC2, 0);
    let n = [t.blocks[0].n(), t.blocks[1].n(), t.blocks[2].n()];
    let mut set = BTreeSet::new();
    while set.len() < size.min(n[0] * n[1] * n[2]) {
        set.insert([rng.gen_range(0..n[0]), rng.gen_range(0..n[1]), rng.gen_range(0..n[2])]);
    }
    set.into_iter().collect()
}

/// Fraction of `trials` random supports of the triple's support size that
/// fail coboundary invariance.
pub fn negative_control(t: &CczTriple, trials: usize, seed: u64) -> f64 {
    let size = t.support.len();
    let blocks = [&t.blocks[0], &t.blocks[1], &t.blocks[2]];
    let fails = (0..trials)
        .filter(|&i| !verify_support(blocks, &random_support(t, size, seed.wrapping_add(i as u64))).invariant())
        .count();
    fails as f64 / trials.max(1) as f64
}

/// CZ support on blocks 2 and 3 obtained by fixing the first argument to an
/// X logical of block 1.
pub fn descend_to_cz(t: &CczTriple, xbar: &BitVec) -> Result<Vec<(usize, usize)>, CczError> {
    let q1 = &t.blocks[0];
    if xbar.len() != q1.n() || !q1.h_z.mul_vec(xbar).is_zero() || RowSpace::new(&q1.h_x).contains(xbar) {
        return Err(CczError::NotALogical);
    }
    let form = TrilinearForm::new([q1.n(), t.blocks[1].n(), t.blocks[2].n()], &t.support);
    let rows = form.contract_first(xbar);
    Ok(rows.iter().enumerate().flat_map(|(j2, r)| r.iter_ones().map(move |j3| (j2, j3))).collect())
}

/// Invariance and logical matrix of a CZ support between two blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CzReport {
    pub invariance_failures: usize,
    pub logical_matrix: Vec<Vec<u8>>,
}

pub fn verify_cz(q2: &CssCode, q3: &CssCode, support: &[(usize, usize)]) -> CzReport {
    let mut rows = vec![BitVec::zeros(q3.n()); q2.n()];
    for &(a, b) in support {
        rows[a].flip(b);
    }
    let mut cols = vec![BitVec::zeros(q2.n()); q3.n()];
    for &(a, b) in support {
        cols[b].flip(a);
    }
    let (s2, s3) = (cocycle_span(q2), cocycle_span(q3));
    let mut failures = 0;
    for g in q2.h_x.row_bitvecs() {
        failures += s3.iter().filter(|z| bilinear_eval(&rows, &g, z)).count();
    }
    for g in q3.h_x.row_bitvecs() {
        failures += s2.iter().filter(|z| bilinear_eval(&cols, &g, z)).count();
    }
    let logical_matrix = (0..q2.k())
        .map(|i| (0..q3.k()).map(|j| u8::from(bilinear_eval(&rows, &q2.x_logical(i), &q3.x_logical(j)))).collect())
        .collect();
    CzReport { invariance_failures: failures, logical_matrix }
}

/// Support as CSV with header `j1,j2,j3`.
pub fn support_csv(support: &[[usize; 3]]) -> String {
    let mut s = String::from("j1,j2,j3\n");
    for t in support {
        s.push_str(&format!("{},{},{}\n", t[0], t[1], t[2]));
    }
    s
}

/// The `ring(2)` triple with repetition local codes in every direction.
pub fn ring2_triple() -> Result<CczTriple, CczError> {
    let g = crate::graphs::ring(2).map_err(|e| CodeError::InvalidParameters(e.to_string()))?;
    let rep = crate::codes::repetition_path(2)?;
    build_ccz_triple(&g, &g, &g, &rep, &rep, &rep)
}
