//! Edge configurations of the complete graph and their component structure.

use crate::error::{domain, Result};

/// The triple fixing `phi_{n, lambda, q}`; the edge weight is `p = lambda / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub lambda: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(n: usize, lambda: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!("lambda must be positive, got {lambda}")));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(domain(format!("q must be positive, got {q}")));
        }
        if lambda >= n as f64 {
            return Err(domain(format!(
                "lambda = {lambda} must be below n = {n} (p < 1)"
            )));
        }
        Ok(Self { n, lambda, q })
    }

    pub fn p(&self) -> f64 {
        self.lambda / self.n as f64
    }

    pub fn edge_count(&self) -> usize {
        pair_count(self.n)
    }
}

/// `C(n, 2)`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Canonical index of the pair `{i, j}`, `i < j < n`.
pub fn edge_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs of `K_n` in canonical index order.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// A state `omega`: one bit per pair of `K_n`, set when the edge is open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfiguration {
    n: usize,
    bits: Vec<u64>,
}

impl EdgeConfiguration {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; pair_count(n).div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        for e in 0..pair_count(n) {
            c.set(e, true);
        }
        c
    }

    /// Configuration whose edge `e` is open iff bit `e` of `mask` is set.
    /// Only meaningful for `C(n, 2) <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut c = Self::empty(n);
        if let Some(w) = c.bits.first_mut() {
            let m = pair_count(n);
            *w = if m >= 64 {
                mask
            } else {
                mask & ((1u64 << m) - 1)
            };
        }
        c
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut c = Self::empty(n);
        for &(a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            c.set(edge_index(i, j, n), true);
        }
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.bits[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn set(&mut self, e: usize, open: bool) {
        assert!(e < pair_count(self.n), "edge index {e} out of range");
        if open {
            self.bits[e / 64] |= 1 << (e % 64);
        } else {
            self.bits[e / 64] &= !(1 << (e % 64));
        }
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        edge_pairs(self.n)
            .into_iter()
            .enumerate()
            .filter(|&(e, _)| self.is_open(e))
            .map(|(_, p)| p)
    }
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// One connected component: its vertex count and open-edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub size: usize,
    pub edges: usize,
}

impl Component {
    pub fn is_tree(&self) -> bool {
        self.edges + 1 == self.size
    }
}

/// Components of the graph on `n` vertices with the given open edges,
/// sorted by decreasing size.
pub fn components<I>(n: usize, open: I) -> Vec<Component>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut uf = UnionFind::new(n);
    let mut edge_list = Vec::new();
    for (a, b) in open {
        uf.union(a, b);
        edge_list.push(a);
    }
    let mut edges = vec![0usize; n];
    for a in edge_list {
        let r = uf.find(a);
        edges[r] += 1;
    }
    let roots: Vec<usize> = (0..n).filter(|&v| uf.find(v) == v).collect();
    let mut out: Vec<Component> = roots
        .into_iter()
        .map(|v| Component {
            size: uf.size[v],
            edges: edges[v],
        })
        .collect();
    out.sort_by(|a, b| b.size.cmp(&a.size).then(b.edges.cmp(&a.edges)));
    out
}

/// Per-configuration statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    /// Number of components `k(omega)`.
    pub k: usize,
    /// `m[l]` is the number of components of size `l`; `m[0]` is always 0.
    pub m: Vec<usize>,
    pub largest: usize,
    pub open_edges: usize,
    pub acyclic: bool,
    pub connected: bool,
}

impl ComponentSummary {
    pub fn from_components(n: usize, comps: &[Component]) -> Self {
        let mut m = vec![0; n + 1];
        for c in comps {
            m[c.size] += 1;
        }
        let open_edges = comps.iter().map(|c| c.edges).sum::<usize>();
        let k = comps.len();
        Self {
            k,
            m,
            largest: comps.first().map_or(0, |c| c.size),
            open_edges,
            acyclic: open_edges + k == n,
            connected: k == 1,
        }
    }
}

pub fn component_summary(config: &EdgeConfiguration) -> ComponentSummary {
    let comps = components(config.n(), config.open_edges());
    ComponentSummary::from_components(config.n(), &comps)
}
