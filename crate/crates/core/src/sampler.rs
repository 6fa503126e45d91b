//! Single-bond heat-bath dynamics for `phi_{n, lambda, q}`.
//!
//! The chain state is a symmetric bit matrix. An update of edge `{i, j}`
//! needs to know whether `i` and `j` are joined by a path avoiding that
//! edge; small graphs recompute this with a union-find pass, larger ones
//! run a bidirectional breadth-first search that always grows the smaller
//! frontier. Most updates never ask: when the uniform draw falls below the
//! smaller of the two opening probabilities or above the larger, the answer
//! does not matter.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.3) seeded with
//! `seed_from_u64`; record streams are reproducible for a fixed seed,
//! parameter set and build.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact::eps_size_cutoff;
use crate::graph::{components, edge_pairs, pair_count, Component, ModelParams, UnionFind};
use crate::numeric::{fmt_real, Real};
use crate::rate;

/// Graphs up to this size use the union-find connectivity query.
pub const SMALL_N: usize = 16;
/// Bit-matrix storage grows as `n^2`; larger graphs are refused.
pub const MAX_N: usize = 50_000;
/// Minimum number of batches for batched-means error bars.
pub const MIN_BATCHES: usize = 20;

/// A configuration stored as an adjacency bit matrix.
#[derive(Debug, Clone)]
pub struct ChainState {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    open: usize,
    mark: Vec<u32>,
    stamp: u32,
    front: [Vec<usize>; 2],
    next: Vec<usize>,
}

impl ChainState {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            adj: vec![0; n * words],
            open: 0,
            mark: vec![0; n],
            stamp: 0,
            front: [Vec::new(), Vec::new()],
            next: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                s.set(i, j, true);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn open_count(&self) -> usize {
        self.open
    }

    pub fn is_open(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, open: bool) {
        if self.is_open(i, j) == open {
            return;
        }
        let w = self.words;
        self.adj[i * w + j / 64] ^= 1 << (j % 64);
        self.adj[j * w + i / 64] ^= 1 << (i % 64);
        if open {
            self.open += 1;
        } else {
            self.open -= 1;
        }
    }

    /// Open edges `(i, j)` with `i < j`.
    pub fn open_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let row = &self.adj[i * self.words..(i + 1) * self.words];
            BitIter::new(row)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn components(&self) -> Vec<Component> {
        components(self.n, self.open_edges())
    }

    /// Whether `i` and `j` are joined by open edges, recomputed from scratch.
    fn connected_union_find(&self, i: usize, j: usize) -> bool {
        let mut uf = UnionFind::new(self.n);
        for (a, b) in self.open_edges() {
            uf.union(a, b);
        }
        uf.find(i) == uf.find(j)
    }

    /// Bidirectional BFS between `i` and `j`, growing the smaller frontier.
    fn connected_bfs(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        if self.stamp >= u32::MAX - 2 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 0;
        }
        self.stamp += 2;
        let tag = [self.stamp, self.stamp + 1];
        self.mark[i] = tag[0];
        self.mark[j] = tag[1];
        self.front[0].clear();
        self.front[1].clear();
        self.front[0].push(i);
        self.front[1].push(j);
        loop {
            let side = if self.front[0].len() <= self.front[1].len() {
                0
            } else {
                1
            };
            self.next.clear();
            let mut k = 0;
            while k < self.front[side].len() {
                let u = self.front[side][k];
                k += 1;
                let row = &self.adj[u * self.words..(u + 1) * self.words];
                for v in BitIter::new(row) {
                    let m = self.mark[v];
                    if m == tag[1 - side] {
                        return true;
                    }
                    if m != tag[side] {
                        self.mark[v] = tag[side];
                        self.next.push(v);
                    }
                }
            }
            if self.next.is_empty() {
                return false;
            }
            std::mem::swap(&mut self.front[side], &mut self.next);
        }
    }

    fn connected(&mut self, i: usize, j: usize) -> bool {
        if self.n <= SMALL_N {
            self.connected_union_find(i, j)
        } else {
            self.connected_bfs(i, j)
        }
    }
}

struct BitIter<'a> {
    row: &'a [u64],
    word: usize,
    bits: u64,
}

impl<'a> BitIter<'a> {
    fn new(row: &'a [u64]) -> Self {
        Self {
            row,
            word: 0,
            bits: row.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.bits == 0 {
            self.word += 1;
            if self.word >= self.row.len() {
                return None;
            }
            self.bits = self.row[self.word];
        }
        let tz = self.bits.trailing_zeros() as usize;
        self.bits &= self.bits - 1;
        Some(self.word * 64 + tz)
    }
}

/// The heat-bath kernel for one parameter set.
#[derive(Debug, Clone)]
pub struct HeatBath {
    params: ModelParams,
    p: f64,
    p_bridge: f64,
    pairs: Vec<(u32, u32)>,
}

impl HeatBath {
    pub fn new(params: ModelParams) -> Result<Self> {
        if params.n > MAX_N {
            return Err(Error::ResourceLimit {
                records: 0,
                reason: format!("n = {} exceeds the supported maximum {MAX_N}", params.n),
            });
        }
        let p = params.p();
        Ok(Self {
            params,
            p,
            p_bridge: p / (p + params.q * (1.0 - p)),
            pairs: edge_pairs(params.n)
                .into_iter()
                .map(|(i, j)| (i as u32, j as u32))
                .collect(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn edge_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let (i, j) = self.pairs[edge];
        (i as usize, j as usize)
    }

    /// Conditional probability that `edge` is open given all other edges:
    /// `p` when its endpoints are otherwise connected, `p / (p + q(1-p))`
    /// when opening it would merge two components.
    pub fn open_probability(&self, state: &mut ChainState, edge: usize) -> f64 {
        let (i, j) = self.endpoints(edge);
        let was_open = state.is_open(i, j);
        state.set(i, j, false);
        let joined = state.connected(i, j);
        state.set(i, j, was_open);
        if joined {
            self.p
        } else {
            self.p_bridge
        }
    }

    /// Resamples `edge` from its conditional law using the uniform draw `u`.
    pub fn step_with(&self, state: &mut ChainState, edge: usize, u: f64) {
        let (i, j) = self.endpoints(edge);
        self.update(state, i, j, u);
    }

    fn update(&self, state: &mut ChainState, i: usize, j: usize, u: f64) {
        let (lo, hi) = if self.p <= self.p_bridge {
            (self.p, self.p_bridge)
        } else {
            (self.p_bridge, self.p)
        };
        let open = if u < lo {
            true
        } else if u >= hi {
            false
        } else {
            state.set(i, j, false);
            let threshold = if state.connected(i, j) {
                self.p
            } else {
                self.p_bridge
            };
            u < threshold
        };
        state.set(i, j, open);
    }

    /// One heat-bath update of `edge`.
    pub fn step<R: Rng>(&self, state: &mut ChainState, edge: usize, rng: &mut R) {
        let u: f64 = rng.gen();
        self.step_with(state, edge, u);
    }

    /// `C(n, 2)` updates in the order of a fresh random permutation.
    /// `order` holds the edge list between calls and is reshuffled in place.
    pub fn sweep<R: Rng>(&self, state: &mut ChainState, order: &mut Vec<(u32, u32)>, rng: &mut R) {
        if order.len() != self.pairs.len() {
            order.clone_from(&self.pairs);
        }
        order.shuffle(rng);
        for &(i, j) in order.iter() {
            let u: f64 = rng.gen();
            self.update(state, i as usize, j as usize, u);
        }
    }
}

/// Backwards-compatible free function form of [`HeatBath::step`].
pub fn heatbath_step<R: Rng>(kernel: &HeatBath, state: &mut ChainState, edge: usize, rng: &mut R) {
    kernel.step(state, edge, rng);
}

/// Transition matrix of the edge-averaged kernel on all `2^{C(n,2)}`
/// configurations, indexed by edge mask.
pub fn transition_matrix(params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    let m = pair_count(params.n);
    if m > 10 {
        return Err(domain("transition matrix is limited to n <= 5"));
    }
    let kernel = HeatBath::new(*params)?;
    let size = 1usize << m;
    let mut mat = vec![vec![0.0; size]; size];
    for (from, row) in mat.iter_mut().enumerate() {
        let mut state = ChainState::empty(params.n);
        for e in 0..m {
            if from >> e & 1 == 1 {
                let (i, j) = kernel.endpoints(e);
                state.set(i, j, true);
            }
        }
        for e in 0..m {
            let p_open = kernel.open_probability(&mut state, e);
            let on = from | 1 << e;
            let off = from & !(1 << e);
            row[on] += p_open / m as f64;
            row[off] += (1.0 - p_open) / m as f64;
        }
    }
    Ok(mat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Empty,
    Full,
    /// Full above `lambda_c(q)`, empty otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub params: ModelParams,
    pub seed: u64,
    pub burn_in_sweeps: usize,
    pub sample_sweeps: usize,
    pub thin: usize,
    pub eps: Vec<f64>,
    pub init: Init,
    /// Wall-clock budget; exceeding it aborts with [`Error::ResourceLimit`].
    pub time_limit: Option<Duration>,
}

impl ChainConfig {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self {
            params,
            seed,
            burn_in_sweeps: 100,
            sample_sweeps: 1000,
            thin: 1,
            eps: Vec::new(),
            init: Init::Auto,
            time_limit: None,
        }
    }

    /// `q < 1` runs outside the regime the validation targets.
    pub fn is_experimental(&self) -> bool {
        self.params.q < 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(domain("thin must be at least 1"));
        }
        for &e in &self.eps {
            if !(0.0..=1.0).contains(&e) {
                return Err(domain(format!("eps must lie in [0, 1], got {e}")));
            }
        }
        Ok(())
    }

    fn initial_state(&self) -> Result<ChainState> {
        let n = self.params.n;
        let full = match self.init {
            Init::Empty => false,
            Init::Full => true,
            Init::Auto => self.params.lambda > rate::lambda_c(self.params.q)?,
        };
        Ok(if full {
            ChainState::full(n)
        } else {
            ChainState::empty(n)
        })
    }
}

/// Observables recorded after one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sweep: usize,
    pub largest_fraction: f64,
    pub k_over_n: f64,
    pub acyclic: bool,
    pub connected: bool,
    /// `|V_{eps n}| / n` for each configured `eps`.
    pub v_eps_fraction: Vec<f64>,
    /// Share of vertices outside the largest component that sit in
    /// components containing a cycle (0 when the largest component is everything).
    pub cyclic_outside_fraction: f64,
}

impl SampleRecord {
    pub fn observe(sweep: usize, state: &ChainState, eps: &[f64]) -> Self {
        let n = state.n();
        let comps = state.components();
        let nf = n as f64;
        let largest = comps.first().map_or(0, |c| c.size);
        let open: usize = comps.iter().map(|c| c.edges).sum();
        let outside = n - largest;
        let cyclic_outside: usize = comps
            .iter()
            .skip(1)
            .filter(|c| !c.is_tree())
            .map(|c| c.size)
            .sum();
        Self {
            sweep,
            largest_fraction: largest as f64 / nf,
            k_over_n: comps.len() as f64 / nf,
            acyclic: open + comps.len() == n,
            connected: comps.len() == 1,
            v_eps_fraction: eps
                .iter()
                .map(|&e| {
                    let cut = eps_size_cutoff(e, n);
                    comps
                        .iter()
                        .filter(|c| c.size > cut)
                        .map(|c| c.size)
                        .sum::<usize>() as f64
                        / nf
                })
                .collect(),
            cyclic_outside_fraction: if outside == 0 {
                0.0
            } else {
                cyclic_outside as f64 / outside as f64
            },
        }
    }
}

/// CSV header for `eps_count` configured fractions. The first fraction uses
/// the column `v_eps_fraction`; further ones are numbered from 2.
pub fn csv_header(eps_count: usize) -> String {
    let mut h = String::from("sweep,largest_fraction,k_over_n,acyclic,connected,v_eps_fraction");
    for i in 2..=eps_count {
        h.push_str(&format!(",v_eps_fraction_{i}"));
    }
    h
}

/// One CSV row matching [`csv_header`]; booleans as `0`/`1`, an empty
/// `v_eps_fraction` when no fraction is configured.
pub fn csv_row(r: &SampleRecord) -> String {
    let mut row = format!(
        "{},{},{},{},{},",
        r.sweep,
        fmt_real(r.largest_fraction),
        fmt_real(r.k_over_n),
        u8::from(r.acyclic),
        u8::from(r.connected)
    );
    let v: Vec<String> = r.v_eps_fraction.iter().map(|&x| fmt_real(x)).collect();
    row.push_str(&v.join(","));
    row
}

/// Runs the chain, handing each record to `sink` as it is produced.
/// Returns the number of records emitted.
pub fn run_chain_with<F>(cfg: &ChainConfig, mut sink: F) -> Result<usize>
where
    F: FnMut(&SampleRecord) -> Result<()>,
{
    cfg.validate()?;
    let kernel = HeatBath::new(cfg.params)?;
    let mut state = cfg.initial_state()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = Vec::new();
    let start = Instant::now();
    let mut emitted = 0;
    let total = cfg.burn_in_sweeps + cfg.sample_sweeps;
    for sweep in 1..=total {
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() > limit {
                return Err(Error::ResourceLimit {
                    records: emitted,
                    reason: format!("time limit {limit:?} exceeded at sweep {sweep}"),
                });
            }
        }
        kernel.sweep(&mut state, &mut order, &mut rng);
        if sweep > cfg.burn_in_sweeps && (sweep - cfg.burn_in_sweeps).is_multiple_of(cfg.thin) {
            sink(&SampleRecord::observe(sweep, &state, &cfg.eps))?;
            emitted += 1;
        }
    }
    Ok(emitted)
}

pub fn run_chain(cfg: &ChainConfig) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    run_chain_with(cfg, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Batched-means estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub batches: usize,
    pub samples: usize,
}

/// Splits `values` into `batches` equal consecutive batches (dropping the
/// remainder at the front) and returns the mean with the standard error of
/// the batch means.
pub fn batch_means(values: &[f64], batches: usize) -> Result<Estimate> {
    let batches = batches.max(MIN_BATCHES);
    if values.len() < batches * 2 {
        return Err(Error::InsufficientSamples {
            got: values.len(),
            batches,
        });
    }
    let size = values.len() / batches;
    let used = &values[values.len() - size * batches..];
    let means: Vec<f64> = used
        .chunks(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(Estimate {
        mean,
        stderr: (var / batches as f64).sqrt(),
        batches,
        samples: used.len(),
    })
}

/// Mean largest-component fraction with a batched-means error bar.
pub fn estimate_theta(cfg: &ChainConfig) -> Result<Estimate> {
    let records = run_chain(cfg)?;
    let xs: Vec<f64> = records.iter().map(|r| r.largest_fraction).collect();
    batch_means(&xs, MIN_BATCHES)
}

/// Runs the same chain from the empty and the full configuration.
pub fn compare_initialisations(cfg: &ChainConfig) -> Result<(Estimate, Estimate)> {
    let empty = estimate_theta(&ChainConfig {
        init: Init::Empty,
        ..cfg.clone()
    })?;
    let full = estimate_theta(&ChainConfig {
        init: Init::Full,
        ..cfg.clone()
    })?;
    Ok((empty, full))
}

#[derive(Serialize)]
struct EstimateJson {
    mean: Real,
    stderr: Real,
}

impl From<Estimate> for EstimateJson {
    fn from(e: Estimate) -> Self {
        Self {
            mean: Real(e.mean),
            stderr: Real(e.stderr),
        }
    }
}

#[derive(Serialize)]
struct SummaryJson {
    records: usize,
    batches: usize,
    experimental: bool,
    largest_fraction: EstimateJson,
    k_over_n: EstimateJson,
    acyclic: EstimateJson,
    connected: EstimateJson,
    cyclic_outside_fraction: EstimateJson,
    v_eps_fraction: Vec<(Real, EstimateJson)>,
}

/// Mean and standard error per observable, as JSON.
pub fn summary_json(cfg: &ChainConfig, records: &[SampleRecord]) -> Result<String> {
    let col = |f: &dyn Fn(&SampleRecord) -> f64| -> Result<EstimateJson> {
        let xs: Vec<f64> = records.iter().map(f).collect();
        Ok(batch_means(&xs, MIN_BATCHES)?.into())
    };
    let s = SummaryJson {
        records: records.len(),
        batches: MIN_BATCHES,
        experimental: cfg.is_experimental(),
        largest_fraction: col(&|r| r.largest_fraction)?,
        k_over_n: col(&|r| r.k_over_n)?,
        acyclic: col(&|r| f64::from(u8::from(r.acyclic)))?,
        connected: col(&|r| f64::from(u8::from(r.connected)))?,
        cyclic_outside_fraction: col(&|r| r.cyclic_outside_fraction)?,
        v_eps_fraction: cfg
            .eps
            .iter()
            .enumerate()
            .map(|(i, &e)| Ok((Real(e), col(&|r| r.v_eps_fraction[i])?)))
            .collect::<Result<_>>()?,
    };
    Ok(serde_json::to_string_pretty(&s).expect("plain struct serialises"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{enumerate, ExactOptions};
    use crate::graph::EdgeConfiguration;

    fn params(n: usize, l: f64, q: f64) -> ModelParams {
        ModelParams::new(n, l, q).unwrap()
    }

    #[test]
    fn percolation_kernel_ignores_connectivity() {
        let k = HeatBath::new(params(6, 2.0, 1.0)).unwrap();
        let mut s = ChainState::empty(6);
        assert_eq!(k.open_probability(&mut s, 0), 1.0 / 3.0);
        let mut s = ChainState::full(6);
        assert_eq!(k.open_probability(&mut s, 0), 1.0 / 3.0);
    }

    #[test]
    fn two_vertex_stationary_probability() {
        // weights: closed 0.5 * 2^2 = 2, open 0.5 * 2 = 1
        let k = HeatBath::new(params(2, 1.0, 2.0)).unwrap();
        let mut s = ChainState::empty(2);
        assert!((k.open_probability(&mut s, 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cycle_edge_opens_with_p() {
        let k = HeatBath::new(params(4, 1.0, 5.0)).unwrap();
        let mut s = ChainState::empty(4);
        s.set(0, 1, true);
        s.set(1, 2, true);
        // 0 and 2 are joined through 1
        let e = crate::graph::edge_index(0, 2, 4);
        assert_eq!(k.open_probability(&mut s, e), 0.25);
        let e = crate::graph::edge_index(0, 3, 4);
        assert!((k.open_probability(&mut s, e) - 0.25 / (0.25 + 5.0 * 0.75)).abs() < 1e-15);
    }

    #[test]
    fn detailed_balance_n3() {
        let pm = params(3, 1.3, 2.5);
        let mat = transition_matrix(&pm).unwrap();
        let pi: Vec<f64> = (0..8u64)
            .map(|m| crate::exact::weight(&EdgeConfiguration::from_mask(3, m), &pm))
            .collect();
        let z: f64 = pi.iter().sum();
        for j in 0..8 {
            let flow: f64 = (0..8).map(|i| pi[i] / z * mat[i][j]).sum();
            assert!((flow - pi[j] / z).abs() <= 1e-12);
        }
        for row in &mat {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bfs_agrees_with_union_find() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(2..40);
            let mut s = ChainState::empty(n);
            let density: f64 = rng.gen_range(0.0..0.2);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < density {
                        s.set(i, j, true);
                    }
                }
            }
            for _ in 0..20 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                assert_eq!(s.connected_bfs(i, j), s.connected_union_find(i, j));
            }
        }
    }

    #[test]
    fn lazy_step_matches_open_probability() {
        let k = HeatBath::new(params(30, 3.0, 2.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ChainState::empty(30);
        let mut order = Vec::new();
        for _ in 0..5 {
            k.sweep(&mut s, &mut order, &mut rng);
        }
        for e in 0..k.edge_count() {
            let p = k.open_probability(&mut s, e);
            for u in [0.0, p * 0.999, p, (p + 1.0) / 2.0] {
                let mut t = s.clone();
                k.step_with(&mut t, e, u);
                let (i, j) = k.endpoints(e);
                assert_eq!(t.is_open(i, j), u < p, "edge {e} u {u} p {p}");
            }
        }
    }

    #[test]
    fn chain_is_reproducible() {
        let mut cfg = ChainConfig::new(params(40, 2.5, 2.0), 11);
        cfg.burn_in_sweeps = 5;
        cfg.sample_sweeps = 30;
        cfg.thin = 3;
        cfg.eps = vec![0.1, 0.25];
        let a = run_chain(&cfg).unwrap();
        let b = run_chain(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert_eq!(a[0].sweep, 8);
        for r in &a {
            for x in [r.largest_fraction, r.k_over_n, r.cyclic_outside_fraction]
                .into_iter()
                .chain(r.v_eps_fraction.iter().copied())
            {
                assert!((0.0..=1.0).contains(&x));
            }
        }
        cfg.seed = 12;
        assert_ne!(run_chain(&cfg).unwrap(), a);
    }

    #[test]
    fn small_chain_matches_oracle_marginal() {
        let pm = params(4, 1.5, 2.0);
        let mut cfg = ChainConfig::new(pm, 5);
        cfg.burn_in_sweeps = 100;
        cfg.sample_sweeps = 40_000;
        let recs = run_chain(&cfg).unwrap();
        let rep = enumerate(&pm, &ExactOptions::default()).unwrap();
        let mut tv = 0.0;
        for size in 1..=4 {
            let emp = recs
                .iter()
                .filter(|r| (r.largest_fraction * 4.0).round() as usize == size)
                .count() as f64
                / recs.len() as f64;
            tv += (emp - rep.dist_largest.weight(size) / rep.z()).abs();
        }
        assert!(tv / 2.0 < 0.02, "tv = {}", tv / 2.0);
    }

    #[test]
    fn batch_means_errors_and_values() {
        assert!(matches!(
            batch_means(&[1.0; 10], 20),
            Err(Error::InsufficientSamples { .. })
        ));
        let xs: Vec<f64> = (0..400).map(|i| (i % 2) as f64).collect();
        let e = batch_means(&xs, 20).unwrap();
        assert!((e.mean - 0.5).abs() < 1e-15);
        assert!(e.stderr < 1e-12);
    }

    #[test]
    fn time_limit_aborts_cleanly() {
        let mut cfg = ChainConfig::new(params(200, 3.0, 2.0), 1);
        cfg.burn_in_sweeps = 0;
        cfg.sample_sweeps = 1_000_000;
        cfg.time_limit = Some(Duration::from_millis(50));
        let mut seen = 0;
        let err = run_chain_with(&cfg, |_| {
            seen += 1;
            Ok(())
        })
        .unwrap_err();
        match err {
            Error::ResourceLimit { records, .. } => assert_eq!(records, seen),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            csv_header(1),
            "sweep,largest_fraction,k_over_n,acyclic,connected,v_eps_fraction"
        );
        assert!(csv_header(3).ends_with(",v_eps_fraction_2,v_eps_fraction_3"));
        let r = SampleRecord {
            sweep: 3,
            largest_fraction: 0.5,
            k_over_n: 0.25,
            acyclic: true,
            connected: false,
            v_eps_fraction: vec![0.5],
            cyclic_outside_fraction: 0.0,
        };
        assert_eq!(
            csv_row(&r),
            "3,0.50000000000000000,0.25000000000000000,1,0,0.50000000000000000"
        );
    }
}
