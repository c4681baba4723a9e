//! Empirical confinement, soundness and product-expansion scans.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::LinearCode;
use crate::decoders::{detecting_checks, detecting_logicals, Basis, DecodeStatus, MitmDecoder};
use crate::gf2::{BitVec, LinearSolver, SparseBitMatrix};
use crate::hgp::CssCode;
use crate::noise::{adversarial_weight_sweep, substream};
use crate::search::{ball_size, binomial, for_each_combination, PackedColumns};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("search needs {0} steps, over the budget")]
    BudgetExceeded(u64),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

impl ScanMode {
    pub fn name(self) -> &'static str {
        match self {
            ScanMode::Exhaustive => "exhaustive",
            ScanMode::Sampled => "sampled",
        }
    }
}

/// Scan budget: enumerations larger than `max_enumeration` switch to
/// stratified sampling with `samples_per_weight` draws per weight class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanBudget {
    pub max_enumeration: u64,
    pub samples_per_weight: usize,
    pub decode_cap: u64,
    pub seed: u64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        Self { max_enumeration: 1 << 20, samples_per_weight: 2000, decode_cap: 1 << 26, seed: 0 }
    }
}

/// Exact coset-minimum weight: `min |x + s|` over same-type stabilizers `s`.
#[derive(Debug)]
pub struct ReducedWeight {
    stacked: SparseBitMatrix,
    decoder: MitmDecoder,
    cap: u64,
}

impl ReducedWeight {
    pub fn new(code: &CssCode, basis: Basis, cap: u64) -> Self {
        let h = detecting_checks(code, basis);
        let g = detecting_logicals(code, basis);
        let stacked = SparseBitMatrix::vstack(&[h, g]).expect("equal widths");
        let decoder = MitmDecoder::auto(&stacked);
        Self { stacked, decoder, cap }
    }

    pub fn weight(&self, x: &BitVec) -> Option<usize> {
        let s = self.stacked.mul_vec(x);
        let r = self.decoder.decode(&s, x.weight(), self.cap);
        (r.status == DecodeStatus::Ok).then(|| r.correction.weight())
    }
}

/// Row of a scan table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub instance_id: String,
    pub basis: Basis,
    pub x_weight: usize,
    pub syndrome_weight: usize,
    pub mode: ScanMode,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfinementTable {
    pub instance_id: String,
    pub basis: Basis,
    pub t: usize,
    pub mode: ScanMode,
    pub seed: u64,
    pub samples: u64,
    /// Reduced weight → smallest syndrome weight observed.
    pub min_syndrome: BTreeMap<usize, usize>,
    /// Nonzero-coset errors with zero syndrome (logicals within the scan).
    pub logical_hits: u64,
    /// Smallest `c` with `‖σ(x)‖ ≥ ‖x‖/c` over the nonzero-syndrome points.
    pub worst_ratio: f64,
    /// `‖σ(x)‖ ≥ ‖x‖/3` at every scanned point.
    pub benchmark_third: bool,
    pub rows: Vec<ScanRow>,
}

fn stratified_samples(n: usize, w: usize, count: usize, rng: &mut impl Rng) -> Vec<BitVec> {
    let mut idx: Vec<usize> = (0..n).collect();
    (0..count)
        .map(|_| {
            let (chosen, _) = idx.partial_shuffle(rng, w);
            BitVec::from_support(n, chosen)
        })
        .collect()
}

/// Syndrome weight against coset-minimum error weight for every error of
/// weight `≤ t` (or stratified samples per weight when over budget).
pub fn confinement_scan(code: &CssCode, t: usize, basis: Basis, budget: ScanBudget) -> ConfinementTable {
    let n = code.n();
    let h = detecting_checks(code, basis);
    let reduced = ReducedWeight::new(code, basis, budget.decode_cap);
    let exhaustive = ball_size(n, t) <= budget.max_enumeration;
    let errors: Box<dyn Iterator<Item = BitVec>> = if exhaustive {
        Box::new(adversarial_weight_sweep(n, t).expect("within sweep cap"))
    } else {
        let mut rng = substream(budget.seed, 0x5CA9, 0);
        let all: Vec<BitVec> =
            (1..=t).flat_map(|w| stratified_samples(n, w, budget.samples_per_weight, &mut rng)).collect();
        Box::new(all.into_iter())
    };
    let mode = if exhaustive { ScanMode::Exhaustive } else { ScanMode::Sampled };
    let id = code.descriptor.clone();
    let mut table = ConfinementTable {
        instance_id: id.clone(),
        basis,
        t,
        mode,
        seed: budget.seed,
        samples: 0,
        min_syndrome: BTreeMap::new(),
        logical_hits: 0,
        worst_ratio: 0.0,
        benchmark_third: true,
        rows: Vec::new(),
    };
    let mut seen = std::collections::HashSet::new();
    for x in errors {
        table.samples += 1;
        let Some(r) = reduced.weight(&x) else { continue };
        if r == 0 {
            continue;
        }
        let s = h.mul_vec(&x).weight();
        if s == 0 {
            table.logical_hits += 1;
            continue;
        }
        let e = table.min_syndrome.entry(r).or_insert(s);
        *e = (*e).min(s);
        table.worst_ratio = table.worst_ratio.max(r as f64 / s as f64);
        if 3 * s < r {
            table.benchmark_third = false;
        }
        if seen.insert((r, s)) {
            table.rows.push(ScanRow { instance_id: id.clone(), basis, x_weight: r, syndrome_weight: s, mode, seed: budget.seed });
        }
    }
    table.rows.sort_by_key(|r| (r.x_weight, r.syndrome_weight));
    table
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessTable {
    pub instance_id: String,
    pub basis: Basis,
    pub t: usize,
    pub mode: ScanMode,
    pub seed: u64,
    /// Physical syndromes examined.
    pub syndromes: u64,
    /// Syndrome weight → largest minimum preimage weight.
    pub max_preimage: BTreeMap<usize, usize>,
    /// Envelope slope `max_s preimage(s)/|s|`.
    pub alpha: f64,
    /// Least-squares slope through the origin of the per-weight maxima.
    pub fitted_slope: f64,
    /// Largest relative deviation of a per-weight maximum from the fitted line.
    pub max_relative_residual: f64,
    pub budget_exceeded: u64,
    pub rows: Vec<ScanRow>,
}

impl SoundnessTable {
    fn finish(&mut self) {
        let (mut num, mut den) = (0.0, 0.0);
        self.alpha = 0.0;
        for (&w, &p) in &self.max_preimage {
            let (w, p) = (w as f64, p as f64);
            num += w * p;
            den += w * w;
            self.alpha = self.alpha.max(p / w);
        }
        self.fitted_slope = if den > 0.0 { num / den } else { 0.0 };
        self.max_relative_residual = self
            .max_preimage
            .iter()
            .map(|(&w, &p)| {
                let fit = self.fitted_slope * w as f64;
                ((p as f64 - fit) / fit).abs()
            })
            .fold(0.0, f64::max);
    }
}

/// Minimum preimage weight of every physical syndrome of weight `< t`.
/// Physical syndromes are the low-weight words annihilated by the left
/// kernel of the check matrix. Over budget, syndromes of random errors of
/// weight `< t·(column weight)` are sampled instead.
pub fn soundness_scan(code: &CssCode, t: usize, basis: Basis, budget: ScanBudget) -> SoundnessTable {
    let h = detecting_checks(code, basis);
    let m = h.rows();
    let decoder = MitmDecoder::auto(h);
    let id = code.descriptor.clone();
    let total: u64 = (1..t).map(|w| binomial(m, w)).fold(0u64, u64::saturating_add);
    let exhaustive = total <= budget.max_enumeration.saturating_mul(64);
    let mode = if exhaustive { ScanMode::Exhaustive } else { ScanMode::Sampled };
    let mut table = SoundnessTable {
        instance_id: id.clone(),
        basis,
        t,
        mode,
        seed: budget.seed,
        syndromes: 0,
        max_preimage: BTreeMap::new(),
        alpha: 0.0,
        fitted_slope: 0.0,
        max_relative_residual: 0.0,
        budget_exceeded: 0,
        rows: Vec::new(),
    };
    let mut seen = std::collections::HashSet::new();
    let mut record = |table: &mut SoundnessTable, s: &BitVec| {
        let r = decoder.decode(s, usize::MAX, budget.decode_cap);
        if r.status != DecodeStatus::Ok {
            table.budget_exceeded += 1;
            return;
        }
        table.syndromes += 1;
        let (w, p) = (s.weight(), r.correction.weight());
        let e = table.max_preimage.entry(w).or_insert(p);
        *e = (*e).max(p);
        if seen.insert((p, w)) {
            table.rows.push(ScanRow { instance_id: id.clone(), basis, x_weight: p, syndrome_weight: w, mode, seed: budget.seed });
        }
    };
    if exhaustive {
        let left = LinearSolver::new(h).left_kernel();
        let cols: Vec<BitVec> = (0..m)
            .map(|r| BitVec::from_support(left.len(), &(0..left.len()).filter(|&i| left[i].get(r)).collect::<Vec<_>>()))
            .collect();
        let packed = PackedColumns::from_columns(left.len(), &cols);
        for w in 1..t {
            let mut hits = Vec::new();
            let _ = for_each_combination(&packed, w, |sup, acc| {
                if acc.iter().all(|&x| x == 0) {
                    hits.push(BitVec::from_support(m, sup));
                }
                ControlFlow::Continue(())
            });
            for s in hits {
                record(&mut table, &s);
            }
        }
    } else {
        let n = code.n();
        let mut rng = substream(budget.seed, 0x50D, 0);
        let reach = (t * h.max_col_weight().max(1)).min(n);
        let mut seen_s = std::collections::HashSet::new();
        for w in 1..=reach {
            for e in stratified_samples(n, w, budget.samples_per_weight, &mut rng) {
                let s = h.mul_vec(&e);
                if s.weight() > 0 && s.weight() < t && seen_s.insert(s.clone()) {
                    record(&mut table, &s);
                }
            }
        }
    }
    table.rows.sort_by_key(|r| (r.syndrome_weight, r.x_weight));
    table.finish();
    table
}

/// Scan rows as CSV.
pub fn scan_csv(rows: &[ScanRow], second: &str) -> String {
    let mut s = format!("instance_id,basis,x_weight,{second},mode,seed\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.instance_id,
            r.basis.name(),
            r.x_weight,
            r.syndrome_weight,
            r.mode.name(),
            r.seed
        ));
    }
    s
}

/// Largest `Δ^D` handled by the product-expansion routines.
const TENSOR_BITS: usize = 64;
const PE_ENUMERATION_CAP: u32 = 26;

/// Tensors in `F_2^{Δ^D}` as bit masks with index `i_1 + Δ i_2 + Δ² i_3`.
#[derive(Clone, Debug)]
struct Grid {
    delta: usize,
    /// `lines[a]`: masks of the lines parallel to axis `a`.
    lines: Vec<Vec<u64>>,
}

impl Grid {
    fn new(delta: usize, dims: usize) -> Self {
        let size = delta.pow(dims as u32);
        let lines = (0..dims)
            .map(|a| {
                let stride = delta.pow(a as u32);
                (0..size)
                    .filter(|&p| (p / stride) % delta == 0)
                    .map(|base| (0..delta).fold(0u64, |m, i| m | 1u64 << (base + i * stride)))
                    .collect()
            })
            .collect();
        Self { delta, lines }
    }

    fn line_weight(&self, x: u64, axis: usize) -> usize {
        self.lines[axis].iter().filter(|&&l| x & l != 0).count()
    }

    /// Generators of `C^{(a)}`: codewords of `c` along every axis-`a` line.
    fn axis_generators(&self, c: &LinearCode, axis: usize) -> Vec<u64> {
        let stride = self.delta.pow(axis as u32);
        let gens = c.generator().row_bitvecs();
        let mut out = Vec::new();
        for &line in &self.lines[axis] {
            let base = line.trailing_zeros() as usize;
            for g in &gens {
                out.push(g.iter_ones().fold(0u64, |m, i| m | 1u64 << (base + i * stride)));
            }
        }
        out
    }
}

fn span(gens: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &g in gens {
        let mut v = g;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

fn all_elements(basis: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &b in basis {
        let more: Vec<u64> = out.iter().map(|&x| x ^ b).collect();
        out.extend(more);
    }
    out
}

/// Minimum decomposition cost `|a_1|_1 + |a_2|_2` for every codeword of
/// `C_1 ⊞ C_2`, by enumerating `C^{(1)} × C^{(2)}`.
fn cost_table_2d(grid: &Grid, c1: &LinearCode, c2: &LinearCode) -> Result<std::collections::HashMap<u64, usize>, ScanError> {
    let b1 = span(&grid.axis_generators(c1, 0));
    let b2 = span(&grid.axis_generators(c2, 1));
    if (b1.len() + b2.len()) as u32 > PE_ENUMERATION_CAP {
        return Err(ScanError::BudgetExceeded(1u64.checked_shl((b1.len() + b2.len()) as u32).unwrap_or(u64::MAX)));
    }
    let a1: Vec<(u64, usize)> = all_elements(&b1).into_iter().map(|x| (x, grid.line_weight(x, 0))).collect();
    let a2: Vec<(u64, usize)> = all_elements(&b2).into_iter().map(|x| (x, grid.line_weight(x, 1))).collect();
    let mut table = std::collections::HashMap::new();
    for &(x, wx) in &a1 {
        for &(y, wy) in &a2 {
            let e = table.entry(x ^ y).or_insert(usize::MAX);
            *e = (*e).min(wx + wy);
        }
    }
    Ok(table)
}

/// One row of a product-expansion table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub weight: usize,
    pub min_cost: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductExpansionTable {
    pub delta: usize,
    pub dims: usize,
    pub mode: ScanMode,
    pub seed: u64,
    pub checked: usize,
    /// `min |c| / (Δ · cost(c))` over the checked nonzero codewords.
    pub rho: f64,
    /// Exhaustive `ρ` of the first two codes (three-code tables only).
    pub rho2: Option<f64>,
    /// Checked codewords violating `(ρ₂/3) Δ cost(c) ≤ |c|`.
    pub bound_violations: usize,
    pub rows: Vec<ExpansionRow>,
}

/// Empirical product expansion of two or three codes of equal length `Δ`.
/// Two codes: exhaustive over every codeword of `C_1 ⊞ C_2`. Three codes:
/// exhaustive when the sum code has at most 2^16 words, otherwise `samples`
/// uniform codewords; each is checked against the two-code `ρ₂/3` bound.
pub fn product_expansion_check(codes: &[&LinearCode], samples: usize, seed: u64) -> Result<ProductExpansionTable, ScanError> {
    let dims = codes.len();
    if !(2..=3).contains(&dims) {
        return Err(ScanError::Invalid(format!("expected 2 or 3 codes, got {dims}")));
    }
    let delta = codes[0].n();
    if codes.iter().any(|c| c.n() != delta) {
        return Err(ScanError::Invalid("codes have different lengths".into()));
    }
    if delta.pow(dims as u32) > TENSOR_BITS {
        return Err(ScanError::Invalid(format!("Δ^D = {} exceeds {TENSOR_BITS}", delta.pow(dims as u32))));
    }
    let grid2 = Grid::new(delta, 2);
    let table2 = cost_table_2d(&grid2, codes[0], codes[1])?;
    let rho_of = |rows: &[ExpansionRow]| rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let row = |c: u64, cost: usize| ExpansionRow {
        weight: c.count_ones() as usize,
        min_cost: cost,
        ratio: c.count_ones() as f64 / (delta * cost) as f64,
    };
    let mut rows2: Vec<ExpansionRow> = table2.iter().filter(|(&c, _)| c != 0).map(|(&c, &k)| row(c, k)).collect();
    rows2.sort_by(|a, b| (a.weight, a.min_cost).cmp(&(b.weight, b.min_cost)));
    let rho2 = rho_of(&rows2);
    if dims == 2 {
        return Ok(ProductExpansionTable {
            delta,
            dims,
            mode: ScanMode::Exhaustive,
            seed,
            checked: rows2.len(),
            rho: rho2,
            rho2: None,
            bound_violations: 0,
            rows: rows2,
        });
    }
    let grid3 = Grid::new(delta, 3);
    let basis3 = span(&[0, 1, 2].iter().flat_map(|&a| grid3.axis_generators(codes[a], a)).collect::<Vec<_>>());
    let b3 = span(&grid3.axis_generators(codes[2], 2));
    if b3.len() as u32 > PE_ENUMERATION_CAP {
        return Err(ScanError::BudgetExceeded(1u64.checked_shl(b3.len() as u32).unwrap_or(u64::MAX)));
    }
    let third: Vec<(u64, usize)> = all_elements(&b3).into_iter().map(|x| (x, grid3.line_weight(x, 2))).collect();
    let slice_mask = (1u64 << (delta * delta)) - 1;
    let cost3 = |c: u64| -> usize {
        let mut best = usize::MAX;
        for &(a3, w3) in &third {
            let rem = c ^ a3;
            let mut total = w3;
            for l in 0..delta {
                match table2.get(&((rem >> (l * delta * delta)) & slice_mask)) {
                    Some(&k) => total += k,
                    None => {
                        total = usize::MAX;
                        break;
                    }
                }
            }
            best = best.min(total);
        }
        best
    };
    let exhaustive = basis3.len() <= 16;
    let words: Vec<u64> = if exhaustive {
        all_elements(&basis3).into_iter().filter(|&c| c != 0).collect()
    } else {
        let mut rng = substream(seed, 0x9E, 0);
        (0..samples)
            .map(|_| basis3.iter().fold(0u64, |acc, &b| if rng.gen_bool(0.5) { acc ^ b } else { acc }))
            .filter(|&c| c != 0)
            .collect()
    };
    let mut rows = Vec::with_capacity(words.len());
    let mut violations = 0;
    for c in words {
        let k = cost3(c);
        let r = row(c, k);
        if (rho2 / 3.0) * (delta * k) as f64 > r.weight as f64 + 1e-12 {
            violations += 1;
        }
        rows.push(r);
    }
    Ok(ProductExpansionTable {
        delta,
        dims,
        mode: if exhaustive { ScanMode::Exhaustive } else { ScanMode::Sampled },
        seed,
        checked: rows.len(),
        rho: rho_of(&rows),
        rho2: Some(rho2),
        bound_violations: violations,
        rows,
    })
}
