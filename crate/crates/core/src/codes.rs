//! Classical linear codes: repetition variants, duals, random local codes
//! and Tanner codes on regular graphs.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::{kernel_basis, rank, BitVec, SparseBitMatrix};
use crate::graphs::RegularGraph;
use crate::search::{for_each_combination, for_each_span_element, words_weight, PackedColumns};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("local code length {local} does not match graph degree {degree}")]
    LengthMismatch { local: usize, degree: usize },
    #[error("could not draw a full-rank parity check after {0} attempts")]
    RankDeficient(usize),
    #[error("code has no nonzero codeword")]
    ZeroCode,
}

const RANDOM_RETRY_CAP: usize = 1000;
const FULL_ENUMERATION_MAX_K: usize = 20;

/// Tanner layout: the graph and the local code placed on each vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TannerLayout {
    pub graph: RegularGraph,
    pub local: Box<LinearCode>,
}

/// Binary linear code given by a parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    h: SparseBitMatrix,
    generator: SparseBitMatrix,
    distance: Option<usize>,
    descriptor: String,
    seed: Option<u64>,
    tanner: Option<TannerLayout>,
}

/// Result of a distance search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exact(usize),
    /// Budget ran out; no nonzero codeword below this weight exists.
    AtLeast(usize),
}

impl Distance {
    pub fn exact(self) -> Option<usize> {
        match self {
            Distance::Exact(d) => Some(d),
            Distance::AtLeast(_) => None,
        }
    }
}

impl LinearCode {
    pub fn from_parity_check(h: SparseBitMatrix, descriptor: impl Into<String>) -> Self {
        let basis = kernel_basis(&h);
        let generator = SparseBitMatrix::from_bitvecs(h.cols(), &basis);
        Self { h, generator, distance: None, descriptor: descriptor.into(), seed: None, tanner: None }
    }

    pub fn h(&self) -> &SparseBitMatrix {
        &self.h
    }

    /// Generator rows spanning `ker H`.
    pub fn generator(&self) -> &SparseBitMatrix {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn tanner_layout(&self) -> Option<&TannerLayout> {
        self.tanner.as_ref()
    }

    pub fn contains(&self, x: &BitVec) -> bool {
        self.h.mul_vec(x).is_zero()
    }

    /// Coordinates where the generator is in identity form: generator row `a`
    /// is the only one with a 1 at `information_set()[a]`.
    pub fn information_set(&self) -> Vec<usize> {
        (0..self.k())
            .map(|a| {
                *self
                    .generator
                    .row(a)
                    .iter()
                    .find(|&&c| (0..self.k()).all(|b| b == a || !self.generator.get(b, c)))
                    .expect("kernel basis is in systematic form")
            })
            .collect()
    }

    /// Caches the exact distance after an exhaustive search.
    pub fn with_certified_distance(mut self, cap: u64) -> Self {
        if let Ok(Distance::Exact(d)) = distance_exhaustive(&self, cap) {
            self.distance = Some(d);
        }
        self
    }

    /// All codewords (only for small `k`).
    pub fn codewords(&self) -> Vec<BitVec> {
        assert!(self.k() <= FULL_ENUMERATION_MAX_K);
        let gens: Vec<Vec<u64>> = self.generator.row_bitvecs().iter().map(|v| v.words().to_vec()).collect();
        let words = self.n().div_ceil(64).max(1);
        let gens: Vec<Vec<u64>> = gens
            .into_iter()
            .map(|mut g| {
                g.resize(words, 0);
                g
            })
            .collect();
        let mut out = Vec::with_capacity(1 << self.k());
        let _ = for_each_span_element(&gens, words, |v, _| {
            out.push(BitVec::from_words(self.n(), v[..self.n().div_ceil(64)].to_vec()));
            ControlFlow::Continue(())
        });
        out
    }
}

/// `[Δ, 1, Δ]` repetition code with the Δ−1 path checks `e_i + e_{i+1}`.
pub fn repetition_path(delta: usize) -> Result<LinearCode, CodeError> {
    if delta < 2 {
        return Err(CodeError::InvalidParameters(format!("repetition_path needs Δ >= 2, got {delta}")));
    }
    let rows = (0..delta - 1).map(|i| vec![i, i + 1]).collect();
    let h = SparseBitMatrix::new(delta - 1, delta, rows).expect("path rows are sorted");
    Ok(LinearCode::from_parity_check(h, format!("repetition_path({delta})")))
}

/// `[Δ, 1, Δ]` repetition code with the Δ cyclic checks `e_i + e_{i+1 mod Δ}`.
pub fn repetition_ring(delta: usize) -> Result<LinearCode, CodeError> {
    if delta < 3 {
        return Err(CodeError::InvalidParameters(format!("repetition_ring needs Δ >= 3, got {delta}")));
    }
    let rows = (0..delta).map(|i| vec![i, (i + 1) % delta]).collect();
    let h = SparseBitMatrix::from_rows_mod2(delta, delta, rows);
    Ok(LinearCode::from_parity_check(h, format!("repetition_ring({delta})")))
}

/// Loop-forming repetition local code: the cyclic checks for Δ ≥ 3 and the
/// single check `[1 1]` for Δ = 2, where the cycle degenerates.
pub fn local_repetition(delta: usize) -> Result<LinearCode, CodeError> {
    if delta == 2 {
        repetition_path(2)
    } else {
        repetition_ring(delta)
    }
}

/// Dual code: the parity check is the generator of `c`.
pub fn dual(c: &LinearCode) -> LinearCode {
    LinearCode::from_parity_check(c.generator.clone(), format!("dual({})", c.descriptor))
}

/// Whole space `F_2^Δ` (no checks).
pub fn full_space(delta: usize) -> LinearCode {
    LinearCode::from_parity_check(SparseBitMatrix::zeros(0, delta), format!("full_space({delta})"))
}

/// Seeded random `[Δ, k]` code from a uniformly drawn full-rank `(Δ−k)×Δ` check.
pub fn random_code(delta: usize, k: usize, seed: u64) -> Result<LinearCode, CodeError> {
    if k == 0 || k >= delta {
        return Err(CodeError::InvalidParameters(format!("random_code needs 0 < k < Δ, got k={k}, Δ={delta}")));
    }
    let m = delta - k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_RETRY_CAP {
        let rows: Vec<Vec<u8>> = (0..m).map(|_| (0..delta).map(|_| rng.gen_range(0..2u8)).collect()).collect();
        let h = SparseBitMatrix::from_dense_rows(&rows);
        if rank(&h) == m {
            let mut c = LinearCode::from_parity_check(h, format!("random_code({delta},{k},seed={seed})"));
            c.seed = Some(seed);
            return Ok(c);
        }
    }
    Err(CodeError::RankDeficient(RANDOM_RETRY_CAP))
}

/// Tanner code on the edges of `g` with local code `c0` at every vertex.
/// Check row `v·m0 + a` applies row `a` of `c0`'s check to the incident
/// edges of `v` in their recorded order.
pub fn tanner(g: &RegularGraph, c0: &LinearCode) -> Result<LinearCode, CodeError> {
    if c0.n() != g.degree() {
        return Err(CodeError::LengthMismatch { local: c0.n(), degree: g.degree() });
    }
    let m0 = c0.m();
    let mut rows = Vec::with_capacity(g.vertex_count() * m0);
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        for a in 0..m0 {
            rows.push(c0.h.row(a).iter().map(|&j| inc[j]).collect());
        }
    }
    let h = SparseBitMatrix::from_rows_mod2(g.vertex_count() * m0, g.edge_count(), rows);
    let mut code = LinearCode::from_parity_check(h, format!("tanner({} vertices, {})", g.vertex_count(), c0.descriptor));
    code.tanner = Some(TannerLayout { graph: g.clone(), local: Box::new(c0.clone()) });
    Ok(code)
}

/// Exact minimum distance within `cap` visited vectors.
///
/// Enumerates the whole code when `2^k` fits the budget, otherwise searches
/// by increasing weight and reports a lower bound when the budget runs out.
pub fn distance_exhaustive(c: &LinearCode, cap: u64) -> Result<Distance, CodeError> {
    let k = c.k();
    if k == 0 {
        return Err(CodeError::ZeroCode);
    }
    if k <= FULL_ENUMERATION_MAX_K && (1u64 << k) <= cap {
        let words = c.n().div_ceil(64).max(1);
        let gens: Vec<Vec<u64>> = c
            .generator
            .row_bitvecs()
            .iter()
            .map(|v| {
                let mut w = v.words().to_vec();
                w.resize(words, 0);
                w
            })
            .collect();
        let mut best = usize::MAX;
        let _ = for_each_span_element(&gens, words, |v, mask| {
            if mask != 0 {
                best = best.min(words_weight(v));
            }
            ControlFlow::Continue(())
        });
        return Ok(Distance::Exact(best));
    }
    let cols = PackedColumns::new(&c.h);
    let mut work = 0u64;
    for w in 1..=c.n() {
        let mut found = false;
        let mut exhausted = false;
        let _ = for_each_combination(&cols, w, |_, syn| {
            work += 1;
            if work > cap {
                exhausted = true;
                return ControlFlow::Break(());
            }
            if syn.iter().all(|&x| x == 0) {
                found = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if found {
            return Ok(Distance::Exact(w));
        }
        if exhausted {
            return Ok(Distance::AtLeast(w));
        }
    }
    unreachable!("a code with k > 0 has a nonzero codeword")
}
