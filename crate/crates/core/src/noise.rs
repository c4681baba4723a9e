//! I.i.d. local-stochastic samplers, adversarial enumeration and cluster statistics.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::{BitVec, SparseBitMatrix};
use crate::search::ball_size;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("enumeration of {0} vectors exceeds the budget")]
    BudgetExceeded(u64),
}

/// Data and syndrome error rates with the master seed.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub p_data: f64,
    pub q_synd: f64,
    /// Output noise of the idealized 2D preparation is `c_bl · p_data`.
    pub c_bl: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(p_data: f64, q_synd: f64, seed: u64) -> Result<Self, NoiseError> {
        Self { p_data, q_synd, c_bl: 1.0, seed }.validated()
    }

    pub fn noiseless() -> Self {
        Self { p_data: 0.0, q_synd: 0.0, c_bl: 1.0, seed: 0 }
    }

    pub fn validated(self) -> Result<Self, NoiseError> {
        for p in [self.p_data, self.q_synd, self.c_bl * self.p_data] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NoiseError::Probability(p));
            }
        }
        Ok(self)
    }
}

/// SplitMix64 finalizer, used to derive independent substream seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for `(stream, trial)` derived from the master seed.
pub fn substream(master: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(master ^ splitmix64(stream)) ^ trial);
    ChaCha8Rng::seed_from_u64(s)
}

pub fn sample_iid<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(n);
    if p <= 0.0 {
        return v;
    }
    for i in 0..n {
        if p >= 1.0 || rng.gen_bool(p) {
            v.set(i, true);
        }
    }
    v
}

/// Largest enumeration [`adversarial_weight_sweep`] accepts.
pub const SWEEP_CAP: u64 = 1 << 28;

/// All vectors of weight `≤ wmax`, by weight then lexicographically.
pub fn adversarial_weight_sweep(space_dim: usize, wmax: usize) -> Result<WeightSweep, NoiseError> {
    let total = ball_size(space_dim, wmax);
    if total > SWEEP_CAP {
        return Err(NoiseError::BudgetExceeded(total));
    }
    Ok(WeightSweep { n: space_dim, wmax: wmax.min(space_dim), current: Some(Vec::new()) })
}

#[derive(Clone, Debug)]
pub struct WeightSweep {
    n: usize,
    wmax: usize,
    current: Option<Vec<usize>>,
}

impl WeightSweep {
    fn advance(&mut self) {
        let Some(cur) = self.current.as_mut() else { return };
        let w = cur.len();
        let n = self.n;
        // Next combination of the same size in lex order.
        let mut i = w;
        while i > 0 {
            i -= 1;
            if cur[i] < n - (w - i) {
                cur[i] += 1;
                for j in i + 1..w {
                    cur[j] = cur[j - 1] + 1;
                }
                return;
            }
        }
        if w < self.wmax {
            *cur = (0..w + 1).collect();
        } else {
            self.current = None;
        }
    }
}

impl Iterator for WeightSweep {
    type Item = BitVec;

    fn next(&mut self) -> Option<BitVec> {
        let out = BitVec::from_support(self.n, self.current.as_ref()?);
        self.advance();
        Some(out)
    }
}

/// Coordinates adjacent when they share a row of `h`.
pub fn column_adjacency(h: &SparseBitMatrix) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); h.cols()];
    for r in 0..h.rows() {
        let row = h.row(r);
        for &a in row {
            for &b in row {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Rows adjacent when they share a column of `h`.
pub fn row_adjacency(h: &SparseBitMatrix) -> Vec<Vec<usize>> {
    column_adjacency(&h.transpose())
}

/// Histogram `size → count` of connected components of `supp e` in the
/// graph induced by `adjacency`.
pub fn cluster_statistics(e: &BitVec, adjacency: &[Vec<usize>]) -> BTreeMap<usize, usize> {
    let mut seen = vec![false; e.len()];
    let mut hist = BTreeMap::new();
    for start in e.iter_ones() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in &adjacency[v] {
                if e.get(u) && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        *hist.entry(size).or_insert(0) += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgp::toric;
    use crate::search::binomial;

    #[test]
    fn iid_extremes_and_mean() {
        let mut rng = substream(1, 0, 0);
        assert!(sample_iid(50, 0.0, &mut rng).is_zero());
        assert_eq!(sample_iid(50, 1.0, &mut rng).weight(), 50);
        let (n, p, draws) = (100usize, 0.1f64, 10_000usize);
        let total: usize = (0..draws).map(|_| sample_iid(n, p, &mut rng).weight()).sum();
        let mean = total as f64 / draws as f64;
        let sigma = (n as f64 * p * (1.0 - p) / draws as f64).sqrt();
        assert!((mean - n as f64 * p).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn deterministic_substreams() {
        let a = sample_iid(64, 0.3, &mut substream(7, 1, 5));
        let b = sample_iid(64, 0.3, &mut substream(7, 1, 5));
        let c = sample_iid(64, 0.3, &mut substream(7, 2, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn local_stochastic_inequality() {
        let (n, p, draws) = (12usize, 0.2f64, 20_000usize);
        let mut rng = substream(3, 9, 0);
        let samples: Vec<BitVec> = (0..draws).map(|_| sample_iid(n, p, &mut rng)).collect();
        let mut pick = substream(3, 10, 0);
        for _ in 0..100 {
            let size = pick.gen_range(1..4);
            let mut v: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut pick);
            v.truncate(size);
            let hits = samples.iter().filter(|e| v.iter().all(|&i| e.get(i))).count();
            let bound = p.powi(size as i32);
            let freq = hits as f64 / draws as f64;
            let sigma = (bound * (1.0 - bound) / draws as f64).sqrt();
            assert!(freq <= bound + 3.0 * sigma, "subset {v:?}: {freq} > {bound}");
        }
    }

    #[test]
    fn sweep_counts() {
        assert_eq!(adversarial_weight_sweep(5, 0).unwrap().count(), 1);
        let all: Vec<BitVec> = adversarial_weight_sweep(4, 2).unwrap().collect();
        assert_eq!(all.len(), 11);
        assert_eq!(all[1].support(), vec![0]);
        assert_eq!(all[5].support(), vec![0, 1]);
        assert_eq!(all[10].support(), vec![2, 3]);
        let n = 9;
        assert_eq!(adversarial_weight_sweep(n, 3).unwrap().count() as u64, (0..=3).map(|w| binomial(n, w)).sum::<u64>());
        assert!(adversarial_weight_sweep(200, 10).is_err());
    }

    #[test]
    fn clusters() {
        let t = toric(3).unwrap();
        let adj = column_adjacency(&t.h_z);
        let single = BitVec::from_support(18, &[4]);
        assert_eq!(cluster_statistics(&single, &adj), BTreeMap::from([(1, 1)]));
        let a = 0;
        let b = adj[0][0];
        let pair = BitVec::from_support(18, &[a, b]);
        assert_eq!(cluster_statistics(&pair, &adj), BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn cluster_sizes_decay() {
        let t = toric(6).unwrap();
        let adj = column_adjacency(&t.h_z);
        let mut rng = substream(11, 0, 0);
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..5000 {
            for (s, c) in cluster_statistics(&sample_iid(t.n(), 0.02, &mut rng), &adj) {
                *hist.entry(s).or_insert(0) += c;
            }
        }
        let c1 = hist.get(&1).copied().unwrap_or(0);
        let c2 = hist.get(&2).copied().unwrap_or(0);
        let c3 = hist.get(&3).copied().unwrap_or(0);
        assert!(c1 > c2 && c2 > c3, "{hist:?}");
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(NoiseModel::new(1.5, 0.0, 0).is_err());
        assert!(NoiseModel::new(0.1, -0.1, 0).is_err());
    }
}
