//! Reproducible construction recipes and the on-disk code bundle format.
//!
//! A bundle is one line of JSON metadata followed by named sections
//! (`# H_X`, `# H_Z`, optional `# M_Z`, `# G_X`, `# G_Z`), each holding a
//! matrix in the gf2 text format. A CCZ support file is one line of JSON
//! naming the triple followed by the `j1,j2,j3` CSV.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccz::{build_ccz_triple, support_csv, CczError, CczTriple};
use crate::codes::{full_space, local_repetition, random_code, repetition_path, repetition_ring, tanner, CodeError, LinearCode};
use crate::gf2::{Gf2Error, SparseBitMatrix};
use crate::graphs::{complete, random_regular, ring, spectral_lambda, GraphError, RegularGraph};
use crate::hgp::{build_QG, css_validate, hgp2, hgp3, ring_check, toric, Construction, CssCode, CssReport, HgpError, QubitLabel};

pub const BUNDLE_FORMAT: &str = "codeswitch-bundle/1";
pub const CCZ_FORMAT: &str = "codeswitch-ccz/1";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing section {0}")]
    MissingSection(String),
    #[error("section {section}: {source}")]
    Matrix { section: String, source: Gf2Error },
    #[error("header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("unsupported format {0:?}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Hgp(#[from] HgpError),
    #[error(transparent)]
    Ccz(#[from] CczError),
    #[error("invalid recipe: {0}")]
    Recipe(String),
}

impl BundleError {
    /// True for requests that can never succeed (bad parameters rather than bad data).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            BundleError::Graph(GraphError::InfeasibleParameters(_))
                | BundleError::Hgp(HgpError::Graph(GraphError::InfeasibleParameters(_)))
                | BundleError::Code(CodeError::InvalidParameters(_))
                | BundleError::Hgp(HgpError::Code(CodeError::InvalidParameters(_)))
                | BundleError::Recipe(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Ring { n: usize },
    Complete { n: usize },
    RandomRegular { n: usize, degree: usize, seed: u64 },
    /// Inline edge list text: `n Δ` then one `u v` pair per line.
    EdgeList { text: String },
}

impl GraphSpec {
    pub fn build(&self) -> Result<RegularGraph, GraphError> {
        match *self {
            GraphSpec::Ring { n } => ring(n),
            GraphSpec::Complete { n } => complete(n),
            GraphSpec::RandomRegular { n, degree, seed } => random_regular(n, degree, seed),
            GraphSpec::EdgeList { ref text } => RegularGraph::from_edge_list(text),
        }
    }

    fn seed(&self) -> Option<u64> {
        match *self {
            GraphSpec::RandomRegular { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

/// Local code placed on every vertex of a Tanner graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalSpec {
    /// Loop-forming repetition code of the graph degree.
    Repetition,
    Path { delta: usize },
    Ring { delta: usize },
    Full { delta: usize },
    Random { delta: usize, k: usize, seed: u64 },
}

impl LocalSpec {
    pub fn build(&self, degree: usize) -> Result<LinearCode, CodeError> {
        match *self {
            LocalSpec::Repetition => local_repetition(degree),
            LocalSpec::Path { delta } => repetition_path(delta),
            LocalSpec::Ring { delta } => repetition_ring(delta),
            LocalSpec::Full { delta } => Ok(full_space(delta)),
            LocalSpec::Random { delta, k, seed } => random_code(delta, k, seed),
        }
    }

    fn seed(&self) -> Option<u64> {
        match *self {
            LocalSpec::Random { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

/// Classical parity-check matrix used as a product factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalSpec {
    /// Cycle code of length `l`.
    RingCode { l: usize },
    Tanner { graph: GraphSpec, local: LocalSpec },
    Random { n: usize, k: usize, seed: u64 },
}

/// Spectral data of one graph used by a recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub role: String,
    pub vertices: usize,
    pub degree: usize,
    pub lambda: Option<f64>,
}

fn graph_info(role: &str, g: &RegularGraph) -> GraphInfo {
    let lambda = spectral_lambda(g, 1e-10).ok().map(|l| (l * 1e9).round() / 1e9);
    GraphInfo { role: role.into(), vertices: g.vertex_count(), degree: g.degree(), lambda }
}

impl ClassicalSpec {
    fn build(&self, role: &str, graphs: &mut Vec<GraphInfo>) -> Result<SparseBitMatrix, BundleError> {
        Ok(match self {
            ClassicalSpec::RingCode { l } => {
                graphs.push(graph_info(role, &ring(*l)?));
                ring_check(*l)?
            }
            ClassicalSpec::Tanner { graph, local } => {
                let g = graph.build()?;
                graphs.push(graph_info(role, &g));
                tanner(&g, &local.build(g.degree())?)?.h().clone()
            }
            ClassicalSpec::Random { n, k, seed } => random_code(*n, *k, *seed)?.h().clone(),
        })
    }

    fn seeds(&self, out: &mut Vec<u64>) {
        match self {
            ClassicalSpec::RingCode { .. } => {}
            ClassicalSpec::Tanner { graph, local } => out.extend(graph.seed().into_iter().chain(local.seed())),
            ClassicalSpec::Random { seed, .. } => out.push(*seed),
        }
    }
}

/// Construction recipe of a CSS code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    Toric { l: usize },
    /// `Q_G` over the 2D code `base` with the generalized repetition code of `graph`.
    Qg { base: Box<Recipe>, graph: GraphSpec },
    Hgp2 { h1: ClassicalSpec, h2: ClassicalSpec },
    Hgp3 { inner: Box<Recipe>, classical: ClassicalSpec },
}

/// A code built from a recipe, with the spectral data of its graphs.
#[derive(Clone, Debug)]
pub struct Built {
    pub code: CssCode,
    pub graphs: Vec<GraphInfo>,
}

impl Recipe {
    /// The Q_G family member of size `l`: toric base and `ring(l)`.
    pub fn qg(l: usize) -> Self {
        Recipe::Qg { base: Box::new(Recipe::Toric { l }), graph: GraphSpec::Ring { n: l } }
    }

    pub fn build(&self) -> Result<Built, BundleError> {
        let mut graphs = Vec::new();
        let code = self.build_into(&mut graphs)?;
        Ok(Built { code, graphs })
    }

    fn build_into(&self, graphs: &mut Vec<GraphInfo>) -> Result<CssCode, BundleError> {
        match self {
            Recipe::Toric { l } => {
                graphs.push(graph_info("toric", &ring(*l)?));
                Ok(toric(*l)?)
            }
            Recipe::Qg { base, graph } => {
                let q = base.build_into(graphs)?;
                let g = graph.build()?;
                graphs.push(graph_info("qg", &g));
                Ok(build_QG(&q, &g)?)
            }
            Recipe::Hgp2 { h1, h2 } => {
                let a = h1.build("h1", graphs)?;
                let b = h2.build("h2", graphs)?;
                Ok(hgp2(&a, &b))
            }
            Recipe::Hgp3 { inner, classical } => {
                let q = inner.build_into(graphs)?;
                if !matches!(q.construction, Construction::Hgp2 { .. }) {
                    return Err(BundleError::Recipe("hgp3 needs a 2D product inner code".into()));
                }
                let hc = classical.build("classical", graphs)?;
                Ok(hgp3(&q, &hc))
            }
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_seeds(&mut out);
        out
    }

    fn collect_seeds(&self, out: &mut Vec<u64>) {
        match self {
            Recipe::Toric { .. } => {}
            Recipe::Qg { base, graph } => {
                base.collect_seeds(out);
                out.extend(graph.seed());
            }
            Recipe::Hgp2 { h1, h2 } => {
                h1.seeds(out);
                h2.seeds(out);
            }
            Recipe::Hgp3 { inner, classical } => {
                inner.collect_seeds(out);
                classical.seeds(out);
            }
        }
    }

    /// The 2D code a 3D recipe was built on.
    pub fn base(&self) -> Option<&Recipe> {
        match self {
            Recipe::Qg { base, .. } => Some(base),
            Recipe::Hgp3 { inner, .. } => Some(inner),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    /// Size of the left (2D) or product (3D) logical sector.
    pub primary_logicals: usize,
    pub active_logicals: usize,
    pub m_x: usize,
    pub m_z: usize,
    pub metachecks: Option<usize>,
    pub d_x: Option<usize>,
    pub d_z: Option<usize>,
    pub d_ss: Option<usize>,
    pub locality: usize,
}

impl CodeParams {
    pub fn of(code: &CssCode) -> Self {
        Self {
            n: code.n(),
            k: code.k(),
            primary_logicals: code.primary_logicals,
            active_logicals: code.active_logicals(),
            m_x: code.h_x.rows(),
            m_z: code.h_z.rows(),
            metachecks: code.m_z.as_ref().map(SparseBitMatrix::rows),
            d_x: code.d_x,
            d_z: code.d_z,
            d_ss: code.d_ss,
            locality: code.locality(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleHeader {
    pub format: String,
    pub name: String,
    pub descriptor: String,
    pub recipe: Recipe,
    pub seeds: Vec<u64>,
    pub graphs: Vec<GraphInfo>,
    pub params: CodeParams,
}

/// In-memory bundle: header plus the five matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub header: BundleHeader,
    pub h_x: SparseBitMatrix,
    pub h_z: SparseBitMatrix,
    pub m_z: Option<SparseBitMatrix>,
    pub g_x: SparseBitMatrix,
    pub g_z: SparseBitMatrix,
}

const SECTIONS: [&str; 5] = ["H_X", "H_Z", "M_Z", "G_X", "G_Z"];

impl Bundle {
    /// Builds the recipe and certifies distances within `cap` visited vectors.
    pub fn build(name: &str, recipe: &Recipe, cap: u64) -> Result<(Self, CssCode), BundleError> {
        let Built { mut code, graphs } = recipe.build()?;
        if cap > 0 {
            code.certify_distances(cap);
        }
        let header = BundleHeader {
            format: BUNDLE_FORMAT.into(),
            name: name.into(),
            descriptor: code.descriptor.clone(),
            recipe: recipe.clone(),
            seeds: recipe.seeds(),
            graphs,
            params: CodeParams::of(&code),
        };
        let bundle = Self {
            header,
            h_x: code.h_x.clone(),
            h_z: code.h_z.clone(),
            m_z: code.m_z.clone(),
            g_x: code.g_x.clone(),
            g_z: code.g_z.clone(),
        };
        Ok((bundle, code))
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(&self.header).expect("header serializes");
        s.push('\n');
        let mats = [Some(&self.h_x), Some(&self.h_z), self.m_z.as_ref(), Some(&self.g_x), Some(&self.g_z)];
        for (name, m) in SECTIONS.iter().zip(mats) {
            if let Some(m) = m {
                s.push_str(&format!("# {name}\n"));
                s.push_str(&m.to_text());
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, BundleError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or(BundleError::Parse { line: 1, msg: "empty file".into() })?;
        let header: BundleHeader = serde_json::from_str(first)?;
        if header.format != BUNDLE_FORMAT {
            return Err(BundleError::Format(header.format));
        }
        let mut sections: Vec<(String, usize, String)> = Vec::new();
        for (i, line) in lines {
            if let Some(name) = line.strip_prefix("# ") {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(BundleError::Parse { line: i + 1, msg: format!("unknown section {name:?}") });
                }
                if sections.iter().any(|(n, _, _)| n == name) {
                    return Err(BundleError::Parse { line: i + 1, msg: format!("duplicate section {name}") });
                }
                sections.push((name.into(), i + 1, String::new()));
            } else {
                let Some(cur) = sections.last_mut() else {
                    return Err(BundleError::Parse { line: i + 1, msg: "content before the first section".into() });
                };
                cur.2.push_str(line);
                cur.2.push('\n');
            }
        }
        let take = |name: &str| -> Result<Option<SparseBitMatrix>, BundleError> {
            match sections.iter().find(|(n, _, _)| n == name) {
                None => Ok(None),
                Some((_, _, body)) => SparseBitMatrix::from_text(body)
                    .map(Some)
                    .map_err(|source| BundleError::Matrix { section: name.into(), source }),
            }
        };
        let need = |name: &str| -> Result<SparseBitMatrix, BundleError> {
            take(name)?.ok_or_else(|| BundleError::MissingSection(name.into()))
        };
        Ok(Self { h_x: need("H_X")?, h_z: need("H_Z")?, m_z: take("M_Z")?, g_x: need("G_X")?, g_z: need("G_Z")?, header })
    }

    /// The stored matrices as a code, without construction provenance.
    pub fn to_code(&self) -> CssCode {
        let n = self.h_x.cols();
        CssCode {
            h_x: self.h_x.clone(),
            h_z: self.h_z.clone(),
            m_z: self.m_z.clone(),
            g_x: self.g_x.clone(),
            g_z: self.g_z.clone(),
            qubit_labels: (0..n).map(|q| QubitLabel { block: 0, a: q, b: 0 }).collect(),
            primary_logicals: self.header.params.primary_logicals.min(self.g_x.rows()),
            d_x: self.header.params.d_x,
            d_z: self.header.params.d_z,
            d_ss: self.header.params.d_ss,
            construction: Construction::Raw,
            descriptor: self.header.descriptor.clone(),
        }
    }

    /// Validates the stored matrices and compares them with a fresh build of the recipe.
    pub fn verify(&self) -> BundleReport {
        let code = self.to_code();
        let css = css_validate(&code);
        let mut failures: Vec<String> = css.failures.iter().map(|f| format!("css: {f}")).collect();
        let dims_ok = [&self.h_z, &self.g_x, &self.g_z].iter().all(|m| m.cols() == self.h_x.cols())
            && self.m_z.as_ref().map_or(true, |m| m.cols() == self.h_z.rows());
        if !dims_ok {
            failures.push("shape: matrix dimensions are inconsistent".into());
        }
        match self.header.recipe.build() {
            Ok(built) => {
                let fresh = &built.code;
                let pairs = [
                    ("H_X", Some(&self.h_x), Some(&fresh.h_x)),
                    ("H_Z", Some(&self.h_z), Some(&fresh.h_z)),
                    ("M_Z", self.m_z.as_ref(), fresh.m_z.as_ref()),
                    ("G_X", Some(&self.g_x), Some(&fresh.g_x)),
                    ("G_Z", Some(&self.g_z), Some(&fresh.g_z)),
                ];
                for (name, stored, rebuilt) in pairs {
                    if let Some(msg) = matrix_diff(stored, rebuilt) {
                        failures.push(format!("recipe: {name} {msg}"));
                    }
                }
                let p = &self.header.params;
                if (p.n, p.k) != (fresh.n(), fresh.k()) {
                    failures.push(format!("header: [[{}, {}]] but recipe gives [[{}, {}]]", p.n, p.k, fresh.n(), fresh.k()));
                }
            }
            Err(e) => failures.push(format!("recipe: rebuild failed: {e}")),
        }
        BundleReport { name: self.header.name.clone(), css, failures }
    }
}

fn matrix_diff(a: Option<&SparseBitMatrix>, b: Option<&SparseBitMatrix>) -> Option<String> {
    match (a, b) {
        (None, None) => None,
        (Some(_), None) => Some("present but the recipe has none".into()),
        (None, Some(_)) => Some("missing".into()),
        (Some(a), Some(b)) => {
            if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
                return Some(format!("is {}x{}, expected {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
            }
            let rows: Vec<usize> = (0..a.rows()).filter(|&r| a.row(r) != b.row(r)).collect();
            (!rows.is_empty()).then(|| format!("differs from the recipe at rows {rows:?}"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleReport {
    pub name: String,
    pub css: CssReport,
    pub failures: Vec<String>,
}

impl BundleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recipe of a CCZ triple: one graph and one local code per direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub graphs: [GraphSpec; 3],
    pub locals: [LocalSpec; 3],
}

impl TripleSpec {
    pub fn ring2() -> Self {
        let g = GraphSpec::Ring { n: 2 };
        let c = LocalSpec::Path { delta: 2 };
        Self { graphs: [g.clone(), g.clone(), g], locals: [c.clone(), c.clone(), c] }
    }

    pub fn build(&self) -> Result<CczTriple, BundleError> {
        let g: Vec<RegularGraph> = self.graphs.iter().map(GraphSpec::build).collect::<Result<_, _>>()?;
        let c: Vec<LinearCode> =
            self.locals.iter().zip(&g).map(|(l, g)| l.build(g.degree())).collect::<Result<_, _>>()?;
        Ok(build_ccz_triple(&g[0], &g[1], &g[2], &c[0], &c[1], &c[2])?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CczHeader {
    pub format: String,
    pub name: String,
    pub triple: TripleSpec,
    pub block_qubits: [usize; 3],
}

pub fn ccz_support_text(name: &str, spec: &TripleSpec, triple: &CczTriple) -> String {
    let header = CczHeader {
        format: CCZ_FORMAT.into(),
        name: name.into(),
        triple: spec.clone(),
        block_qubits: [triple.blocks[0].n(), triple.blocks[1].n(), triple.blocks[2].n()],
    };
    let mut s = serde_json::to_string(&header).expect("header serializes");
    s.push('\n');
    s.push_str(&support_csv(&triple.support));
    s
}

pub fn parse_ccz_support(text: &str) -> Result<(CczHeader, Vec<[usize; 3]>), BundleError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(BundleError::Parse { line: 1, msg: "empty file".into() })?;
    let header: CczHeader = serde_json::from_str(first)?;
    if header.format != CCZ_FORMAT {
        return Err(BundleError::Format(header.format));
    }
    match lines.next() {
        Some((_, "j1,j2,j3")) => {}
        _ => return Err(BundleError::Parse { line: 2, msg: "expected header j1,j2,j3".into() }),
    }
    let mut support = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<usize> = line
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|e| BundleError::Parse { line: i + 1, msg: format!("bad index: {e}") })?;
        let [a, b, c] = v[..] else {
            return Err(BundleError::Parse { line: i + 1, msg: "expected three indices".into() });
        };
        for (j, x) in [a, b, c].into_iter().enumerate() {
            if x >= header.block_qubits[j] {
                return Err(BundleError::Parse { line: i + 1, msg: format!("index {x} out of range for block {j}") });
            }
        }
        support.push([a, b, c]);
    }
    Ok((header, support))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccz::verify_support;

    #[test]
    fn toric_round_trip() {
        let (b, code) = Bundle::build("toric3", &Recipe::Toric { l: 3 }, 1 << 24).unwrap();
        assert_eq!((b.header.params.n, b.header.params.k), (18, 2));
        assert_eq!((b.header.params.d_x, b.header.params.d_z), (Some(3), Some(3)));
        let text = b.to_text();
        let back = Bundle::parse(&text).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.to_text(), text);
        assert!(back.verify().passed());
        assert_eq!(back.to_code().h_z, code.h_z);
    }

    #[test]
    fn qg_bundle_has_metacheck_and_lambda() {
        let (b, _) = Bundle::build("qg2", &Recipe::qg(2), 0).unwrap();
        assert_eq!(b.header.params.n, 24);
        assert!(b.m_z.is_some());
        assert!(b.header.graphs.iter().all(|g| g.degree == 2));
        let back = Bundle::parse(&b.to_text()).unwrap();
        assert!(back.verify().passed(), "{:?}", back.verify().failures);
    }

    #[test]
    fn flipped_bit_is_named() {
        let (b, _) = Bundle::build("toric3", &Recipe::Toric { l: 3 }, 0).unwrap();
        let text = b.to_text();
        let start = text.find("# H_Z\n").unwrap() + "# H_Z\n".len();
        let row_start = text[start..].find('\n').unwrap() + start + 1;
        let row_end = text[row_start..].find('\n').unwrap() + row_start;
        let mut idx: Vec<usize> = text[row_start..row_end].split(' ').map(|x| x.parse().unwrap()).collect();
        let fresh = (0..18).find(|c| !idx.contains(c)).unwrap();
        idx.push(fresh);
        idx.sort_unstable();
        let line: Vec<String> = idx.iter().map(ToString::to_string).collect();
        let tampered = format!("{}{}{}", &text[..row_start], line.join(" "), &text[row_end..]);
        let rep = Bundle::parse(&tampered).unwrap().verify();
        assert!(!rep.passed());
        assert!(!rep.css.commutation);
        assert!(rep.failures.iter().any(|f| f.contains("H_Z differs from the recipe at rows [0]")), "{:?}", rep.failures);
    }

    #[test]
    fn recipes_serialize() {
        let r = Recipe::Hgp3 {
            inner: Box::new(Recipe::Hgp2 {
                h1: ClassicalSpec::Tanner {
                    graph: GraphSpec::RandomRegular { n: 6, degree: 3, seed: 5 },
                    local: LocalSpec::Repetition,
                },
                h2: ClassicalSpec::Random { n: 4, k: 2, seed: 9 },
            }),
            classical: ClassicalSpec::RingCode { l: 3 },
        };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Recipe>(&json).unwrap(), r);
        assert_eq!(r.seeds(), vec![5, 9]);
        let built = r.build().unwrap();
        assert!(css_validate(&built.code).passed());
    }

    #[test]
    fn odd_degree_sum_is_infeasible() {
        let r = Recipe::Qg { base: Box::new(Recipe::Toric { l: 2 }), graph: GraphSpec::RandomRegular { n: 5, degree: 3, seed: 1 } };
        let err = r.build().unwrap_err();
        assert!(err.is_infeasible(), "{err}");
    }

    #[test]
    fn ccz_support_round_trip() {
        let spec = TripleSpec::ring2();
        let t = spec.build().unwrap();
        let text = ccz_support_text("ring2", &spec, &t);
        let (h, support) = parse_ccz_support(&text).unwrap();
        assert_eq!(support, t.support);
        let blocks = h.triple.build().unwrap().blocks;
        assert!(verify_support([&blocks[0], &blocks[1], &blocks[2]], &support).invariant());
        assert!(parse_ccz_support(&text.replace("j1,j2,j3", "a,b,c")).is_err());
    }
}
