//! Regular graphs for Tanner-code constructions and their spectral gap.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::SparseBitMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("no simple connected graph found after {0} attempts")]
    RetryLimitExceeded(usize),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

const RETRY_CAP: usize = 10_000;
const POWER_ITERATION_CAP: usize = 200_000;

/// Δ-regular graph with oriented edges.
///
/// Edge `e` runs from `edges[e].1` (tail) to `edges[e].0` (head). Each vertex
/// lists its incident edges by ascending edge id; the position of an edge in
/// that list is the local-code coordinate it occupies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    vertex_count: usize,
    degree: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl RegularGraph {
    /// Builds a graph from `(u, v)` pairs, orienting each edge with head = min(u, v).
    /// Parallel edges are accepted only when `allow_parallel` is set.
    pub fn from_edges(
        vertex_count: usize,
        pairs: &[(usize, usize)],
        allow_parallel: bool,
    ) -> Result<Self, GraphError> {
        let mut incident = vec![Vec::new(); vertex_count];
        let mut edges = Vec::with_capacity(pairs.len());
        let mut seen = std::collections::HashSet::new();
        for (e, &(u, v)) in pairs.iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(GraphError::Invalid(format!("edge {e} has an out-of-range endpoint")));
            }
            if u == v {
                return Err(GraphError::Invalid(format!("edge {e} is a loop")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) && !allow_parallel {
                return Err(GraphError::Invalid(format!("edge {e} duplicates {key:?}")));
            }
            edges.push(key);
            incident[u].push(e);
            incident[v].push(e);
        }
        let degree = incident.first().map_or(0, Vec::len);
        if incident.iter().any(|i| i.len() != degree) {
            return Err(GraphError::Invalid("graph is not regular".into()));
        }
        Ok(Self { vertex_count, degree, edges, incident })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(head, tail)` of edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn head(&self, e: usize) -> usize {
        self.edges[e].0
    }

    pub fn tail(&self, e: usize) -> usize {
        self.edges[e].1
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Local coordinate of edge `e` at its endpoint `v`.
    pub fn position(&self, v: usize, e: usize) -> usize {
        self.incident[v].iter().position(|&x| x == e).expect("edge not incident to vertex")
    }

    /// Swaps head and tail of one edge.
    pub fn reverse_edge(&mut self, e: usize) {
        let (h, t) = self.edges[e];
        self.edges[e] = (t, h);
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.incident[v] {
                let (a, b) = self.edges[e];
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![None; self.vertex_count];
        for s in 0..self.vertex_count {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                let cv = color[v].unwrap();
                for &e in &self.incident[v] {
                    let (a, b) = self.edges[e];
                    let w = if a == v { b } else { a };
                    match color[w] {
                        None => {
                            color[w] = Some(!cv);
                            stack.push(w);
                        }
                        Some(cw) if cw == cv => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Checks regularity, incidence consistency and orientation.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.edges.len() * 2 != self.vertex_count * self.degree {
            return Err(GraphError::Invalid("edge count differs from nΔ/2".into()));
        }
        for v in 0..self.vertex_count {
            let inc = &self.incident[v];
            if inc.len() != self.degree {
                return Err(GraphError::Invalid(format!("vertex {v} has degree {}", inc.len())));
            }
            if inc.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::Invalid(format!("vertex {v} edge order is not ascending")));
            }
            for &e in inc {
                let (h, t) = self.edges[e];
                if h != v && t != v {
                    return Err(GraphError::Invalid(format!("edge {e} listed at non-endpoint {v}")));
                }
            }
        }
        Ok(())
    }

    /// Edge list text: `n Δ` then one `head tail` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.vertex_count, self.degree);
        for &(h, t) in &self.edges {
            s.push_str(&format!("{h} {t}\n"));
        }
        s
    }

    /// Parses [`RegularGraph::to_edge_list`] output, keeping the recorded orientation.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse_pair = |l: &str| -> Result<(usize, usize), GraphError> {
            let v: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| GraphError::Parse(format!("{e}")))?;
            match v.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(GraphError::Parse(format!("expected two integers in {l:?}"))),
            }
        };
        let (n, degree) = parse_pair(lines.next().ok_or(GraphError::Parse("empty input".into()))?)?;
        let oriented: Vec<(usize, usize)> = lines.map(parse_pair).collect::<Result<_, _>>()?;
        let mut g = Self::from_edges(n, &oriented, true)?;
        if g.degree != degree {
            return Err(GraphError::Parse(format!("header degree {degree} but graph degree {}", g.degree)));
        }
        for (e, &(h, t)) in oriented.iter().enumerate() {
            g.edges[e] = (h, t);
        }
        Ok(g)
    }
}

/// Seeded random simple connected Δ-regular graph (configuration model with rejection).
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<RegularGraph, GraphError> {
    if (n * degree) % 2 == 1 || degree >= n || degree == 0 {
        return Err(GraphError::InfeasibleParameters(format!("n = {n}, degree = {degree}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * degree).map(|p| p / degree).collect();
    for _ in 0..RETRY_CAP {
        points.shuffle(&mut rng);
        let pairs: Vec<(usize, usize)> = points.chunks(2).map(|c| (c[0], c[1])).collect();
        let Ok(g) = RegularGraph::from_edges(n, &canonical_order(&pairs), false) else { continue };
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::RetryLimitExceeded(RETRY_CAP))
}

fn canonical_order(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut p: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    p.sort_unstable();
    p
}

/// Cycle graph on `n` vertices with edge `i` joining `i` and `i + 1 mod n`.
///
/// `n = 2` yields the two-vertex cycle with a doubled edge, the smallest
/// member of the ring family.
pub fn ring(n: usize) -> Result<RegularGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InfeasibleParameters(format!("ring needs n >= 2, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    RegularGraph::from_edges(n, &pairs, n == 2)
}

/// Complete graph K_n.
pub fn complete(n: usize) -> Result<RegularGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InfeasibleParameters(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    RegularGraph::from_edges(n, &pairs, false)
}

/// |V|×|E| vertex–edge incidence matrix.
pub fn incidence(g: &RegularGraph) -> SparseBitMatrix {
    let supports = (0..g.vertex_count).map(|v| g.incident[v].clone()).collect();
    SparseBitMatrix::new(g.vertex_count, g.edge_count(), supports).expect("incident lists are sorted")
}

fn adjacency_apply(g: &RegularGraph, x: &[f64], out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for &(a, b) in &g.edges {
        out[a] += x[b];
        out[b] += x[a];
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

/// Power iteration on `A + shift·I` restricted to the complement of
/// `deflate` (if given). Returns the Rayleigh quotient of `A`.
fn shifted_power(g: &RegularGraph, shift: f64, deflate: bool, tol: f64) -> Result<f64, GraphError> {
    let n = g.vertex_count;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
    let project = |x: &mut Vec<f64>| {
        if deflate {
            let mean = x.iter().sum::<f64>() / n as f64;
            for v in x.iter_mut() {
                *v -= mean;
            }
        }
    };
    project(&mut x);
    if normalize(&mut x) == 0.0 {
        return Ok(-shift);
    }
    let mut y = vec![0.0; n];
    for _ in 0..POWER_ITERATION_CAP {
        adjacency_apply(g, &x, &mut y);
        let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual = x.iter().zip(&y).map(|(a, b)| (b - mu * a).powi(2)).sum::<f64>().sqrt();
        if residual <= tol {
            return Ok(mu);
        }
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        project(&mut y);
        std::mem::swap(&mut x, &mut y);
        if normalize(&mut x) == 0.0 {
            return Ok(-shift);
        }
    }
    Err(GraphError::NoConvergence(POWER_ITERATION_CAP))
}

/// Second-largest adjacency eigenvalue.
///
/// The all-ones eigenvector is projected out and `A + Δ·I` is iterated so
/// the largest remaining eigenvalue dominates.
pub fn spectral_lambda(g: &RegularGraph, tol: f64) -> Result<f64, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    if g.vertex_count < 2 {
        return Err(GraphError::InfeasibleParameters("spectral gap needs two vertices".into()));
    }
    shifted_power(g, g.degree as f64, true, tol)
}

/// Largest adjacency eigenvalue (equals Δ for regular graphs).
pub fn top_eigenvalue(g: &RegularGraph, tol: f64) -> Result<f64, GraphError> {
    shifted_power(g, g.degree as f64, false, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rank;

    #[test]
    fn random_regular_examples() {
        let g = random_regular(6, 3, 1).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert!(matches!(random_regular(5, 3, 1), Err(GraphError::InfeasibleParameters(_))));
        assert!(matches!(random_regular(4, 4, 1), Err(GraphError::InfeasibleParameters(_))));
        for seed in [3, 4] {
            let g = random_regular(8, 3, seed).unwrap();
            g.validate().unwrap();
            assert!(g.is_simple() && g.is_connected());
            assert!((0..8).all(|v| g.incident(v).len() == 3));
        }
        assert_eq!(random_regular(10, 3, 9).unwrap(), random_regular(10, 3, 9).unwrap());
    }

    #[test]
    fn ring_examples() {
        let t = ring(3).unwrap();
        assert_eq!(t.edge_count(), 3);
        assert!(!t.is_bipartite());
        let sq = ring(4).unwrap();
        assert!(sq.is_bipartite());
        assert!(ring(1).is_err());
        let two = ring(2).unwrap();
        assert_eq!(two.edge_count(), 2);
        assert!(!two.is_simple());
        two.validate().unwrap();
        for n in 3..9 {
            let lam = spectral_lambda(&ring(n).unwrap(), 1e-9).unwrap();
            let expected = 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
            assert!((lam - expected).abs() < 1e-6, "n={n}: {lam} vs {expected}");
        }
    }

    #[test]
    fn spectral_examples() {
        let k4 = complete(4).unwrap();
        assert!((spectral_lambda(&k4, 1e-9).unwrap() + 1.0).abs() < 1e-6);
        assert!((top_eigenvalue(&k4, 1e-9).unwrap() - 3.0).abs() < 1e-6);
        let c6 = ring(6).unwrap();
        assert!((spectral_lambda(&c6, 1e-9).unwrap() - 1.0).abs() < 1e-6);
        for seed in 0..5 {
            let g = random_regular(12, 3, seed).unwrap();
            let lam = spectral_lambda(&g, 1e-8).unwrap();
            if !g.is_bipartite() {
                assert!(lam < 3.0 - 1e-6);
            }
        }
    }

    #[test]
    fn incidence_examples() {
        let m = incidence(&ring(3).unwrap());
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert!(m.col_weights().iter().all(|&w| w == 2));
        for seed in 0..4 {
            let g = random_regular(10, 3, seed).unwrap();
            assert!(incidence(&g).col_weights().iter().all(|&w| w == 2));
        }
        for n in 3..10 {
            assert_eq!(rank(&incidence(&ring(n).unwrap())), n - 1);
        }
    }

    #[test]
    fn incident_orders_are_permutations() {
        let g = random_regular(10, 4, 2).unwrap();
        for v in 0..10 {
            let mut from_edges: Vec<usize> = (0..g.edge_count())
                .filter(|&e| g.head(e) == v || g.tail(e) == v)
                .collect();
            from_edges.sort_unstable();
            assert_eq!(g.incident(v), from_edges.as_slice());
        }
        assert!((0..g.edge_count()).all(|e| g.head(e) < g.tail(e)));
    }

    #[test]
    fn edge_list_round_trip_keeps_orientation() {
        let mut g = random_regular(8, 3, 5).unwrap();
        g.reverse_edge(2);
        let back = RegularGraph::from_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(back, g);
    }
}
