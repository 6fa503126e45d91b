//! Brute-force ground truth: every edge configuration of `K_n` for small `n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{components, edge_pairs, pair_count, EdgeConfiguration, ModelParams};
use crate::numeric::{fmt_real, CompensatedSum, Real};

/// Largest `n` enumerated without the long-run override.
pub const N_MAX_DEFAULT: usize = 6;
/// Largest `n` enumerated with the override (`2^21` configurations).
pub const N_MAX_LONG: usize = 7;

const ROUNDING_SLACK: f64 = 1e-9;

/// `p^{|E|} (1-p)^{C(n,2)-|E|} q^{k(omega)}`.
pub fn weight(config: &EdgeConfiguration, params: &ModelParams) -> f64 {
    let s = crate::graph::component_summary(config);
    let p = params.p();
    let m = params.edge_count();
    p.powi(s.open_edges as i32)
        * (1.0 - p).powi((m - s.open_edges) as i32)
        * params.q.powi(s.k as i32)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactOptions {
    /// Thresholds `r` for the events `B_r`, `L ∩ B_r` and the `|V_r|`, `N_r` laws.
    pub r_list: Vec<usize>,
    /// Fractions `eps` for the `|V_{eps n}|`, `N_{eps n}` laws and `K_{eps,2}`.
    pub eps_list: Vec<f64>,
    /// Allow `n = 7`.
    pub long_run: bool,
}

/// Size cutoff for `eps`: components of size strictly larger than
/// `ceil(eps n)` count towards `V_{eps n}` and `N_{eps n}`.
pub fn eps_size_cutoff(eps: f64, n: usize) -> usize {
    (eps * n as f64 - ROUNDING_SLACK).ceil().max(0.0) as usize
}

/// Whether a component of `size` is "of size at least `eps n`" for `K_{eps,2}`.
fn at_least_eps(size: usize, eps: f64, n: usize) -> bool {
    size as f64 >= eps * n as f64 - ROUNDING_SLACK
}

/// Weight of a distribution over an integer statistic, indexed by value.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<CompensatedSum>);

impl Distribution {
    fn new(len: usize) -> Self {
        Self(vec![CompensatedSum::new(); len])
    }

    fn add(&mut self, k: usize, w: f64) {
        self.0[k].add(w);
    }

    fn merge(&mut self, other: &Distribution) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge(b);
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.0.get(k).map_or(0.0, CompensatedSum::value)
    }

    /// `(k, weight)` pairs with positive weight, sorted by `k`.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        self.0
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.value()))
            .filter(|&(_, w)| w > 0.0)
            .collect()
    }

    pub fn total(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for x in &self.0 {
            s.merge(x);
        }
        s.value()
    }

    fn to_json(&self) -> Vec<(usize, Real)> {
        self.entries()
            .into_iter()
            .map(|(k, w)| (k, Real(w)))
            .collect()
    }
}

/// Weights attached to a fixed size threshold `r` ("size larger than r").
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEvents {
    pub r: usize,
    z_b: CompensatedSum,
    z_lb: CompensatedSum,
    pub dist_v: Distribution,
    pub dist_n: Distribution,
}

impl ThresholdEvents {
    fn new(r: usize, n: usize) -> Self {
        Self {
            r,
            z_b: CompensatedSum::new(),
            z_lb: CompensatedSum::new(),
            dist_v: Distribution::new(n + 1),
            dist_n: Distribution::new(n + 1),
        }
    }

    /// `Z[B_r]`.
    pub fn z_b(&self) -> f64 {
        self.z_b.value()
    }

    /// `Z[L ∩ B_r]`.
    pub fn z_lb(&self) -> f64 {
        self.z_lb.value()
    }

    fn merge(&mut self, o: &ThresholdEvents) {
        self.z_b.merge(&o.z_b);
        self.z_lb.merge(&o.z_lb);
        self.dist_v.merge(&o.dist_v);
        self.dist_n.merge(&o.dist_n);
    }
}

/// Weights attached to a fraction `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsEvents {
    pub eps: f64,
    /// `ceil(eps n)`: `V_{eps n}` counts components strictly larger than this.
    pub size_cutoff: usize,
    z_k2: CompensatedSum,
    /// Law of `|V_{eps n}|`.
    pub dist_v: Distribution,
    /// Law of `N_{eps n}`.
    pub dist_n: Distribution,
    /// Weight of `{|V_{eps n}| = m, N_{eps n} = 1}` by `m`.
    pub dist_v_single: Distribution,
}

impl EpsEvents {
    fn new(eps: f64, n: usize) -> Self {
        Self {
            eps,
            size_cutoff: eps_size_cutoff(eps, n),
            z_k2: CompensatedSum::new(),
            dist_v: Distribution::new(n + 1),
            dist_n: Distribution::new(n + 1),
            dist_v_single: Distribution::new(n + 1),
        }
    }

    /// `Z[K_{eps,2}]`: connected, or exactly two components each of size at least `eps n`.
    pub fn z_k2(&self) -> f64 {
        self.z_k2.value()
    }

    fn merge(&mut self, o: &EpsEvents) {
        self.z_k2.merge(&o.z_k2);
        self.dist_v.merge(&o.dist_v);
        self.dist_n.merge(&o.dist_n);
        self.dist_v_single.merge(&o.dist_v_single);
    }
}

/// Exact partition function and event weights from full enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    pub params: ModelParams,
    z: CompensatedSum,
    z_k: CompensatedSum,
    z_l: CompensatedSum,
    pub thresholds: Vec<ThresholdEvents>,
    pub eps_events: Vec<EpsEvents>,
    /// Law of the largest component size.
    pub dist_largest: Distribution,
    /// Law of the number of components.
    pub dist_k: Distribution,
    pub configurations: u64,
    /// Unweighted count of connected acyclic configurations.
    pub spanning_trees: u64,
    /// Unweighted count of acyclic configurations.
    pub forests: u64,
}

impl ExactReport {
    fn empty(params: ModelParams, opts: &ExactOptions) -> Self {
        let n = params.n;
        Self {
            params,
            z: CompensatedSum::new(),
            z_k: CompensatedSum::new(),
            z_l: CompensatedSum::new(),
            thresholds: opts
                .r_list
                .iter()
                .map(|&r| ThresholdEvents::new(r, n))
                .collect(),
            eps_events: opts
                .eps_list
                .iter()
                .map(|&e| EpsEvents::new(e, n))
                .collect(),
            dist_largest: Distribution::new(n + 1),
            dist_k: Distribution::new(n + 1),
            configurations: 0,
            spanning_trees: 0,
            forests: 0,
        }
    }

    pub fn z(&self) -> f64 {
        self.z.value()
    }

    /// `Z[K]`.
    pub fn z_k(&self) -> f64 {
        self.z_k.value()
    }

    /// `Z[L]`.
    pub fn z_l(&self) -> f64 {
        self.z_l.value()
    }

    /// `(1/n) ln Z`.
    pub fn finite_free_energy(&self) -> f64 {
        self.z().ln() / self.params.n as f64
    }

    pub fn threshold(&self, r: usize) -> Option<&ThresholdEvents> {
        self.thresholds.iter().find(|t| t.r == r)
    }

    pub fn eps(&self, eps: f64) -> Option<&EpsEvents> {
        self.eps_events.iter().find(|e| e.eps == eps)
    }

    /// Folds a partial report over a disjoint configuration range into this one.
    pub fn merge(&mut self, o: &ExactReport) {
        self.z.merge(&o.z);
        self.z_k.merge(&o.z_k);
        self.z_l.merge(&o.z_l);
        for (a, b) in self.thresholds.iter_mut().zip(&o.thresholds) {
            a.merge(b);
        }
        for (a, b) in self.eps_events.iter_mut().zip(&o.eps_events) {
            a.merge(b);
        }
        self.dist_largest.merge(&o.dist_largest);
        self.dist_k.merge(&o.dist_k);
        self.configurations += o.configurations;
        self.spanning_trees += o.spanning_trees;
        self.forests += o.forests;
    }

    pub fn to_json(&self) -> String {
        let p = &self.params;
        let j = ReportJson {
            params: ParamsJson {
                n: p.n,
                lambda: Real(p.lambda),
                q: Real(p.q),
                p: Real(p.p()),
            },
            z: Real(self.z()),
            z_k: Real(self.z_k()),
            z_l: Real(self.z_l()),
            z_br: self
                .thresholds
                .iter()
                .map(|t| ThresholdJson {
                    r: t.r,
                    rule: "component size > r",
                    z_br: Real(t.z_b()),
                    z_lbr: Real(t.z_lb()),
                    dist_vr: t.dist_v.to_json(),
                    dist_nr: t.dist_n.to_json(),
                })
                .collect(),
            eps: self
                .eps_events
                .iter()
                .map(|e| EpsJson {
                    eps: Real(e.eps),
                    size_cutoff: e.size_cutoff,
                    v_rule: "component size > ceil(eps n)",
                    k2_rule: "component size >= eps n",
                    z_keps2: Real(e.z_k2()),
                    dist_v: e.dist_v.to_json(),
                    dist_n: e.dist_n.to_json(),
                    dist_v_single: e.dist_v_single.to_json(),
                })
                .collect(),
            dist_largest: self.dist_largest.to_json(),
            dist_k: self.dist_k.to_json(),
            configurations: self.configurations,
            spanning_trees: self.spanning_trees,
            forests: self.forests,
            finite_free_energy: Real(self.finite_free_energy()),
        };
        serde_json::to_string_pretty(&j).expect("plain struct serialises")
    }
}

#[derive(Serialize)]
struct ParamsJson {
    n: usize,
    lambda: Real,
    q: Real,
    p: Real,
}

#[derive(Serialize)]
struct ThresholdJson {
    r: usize,
    rule: &'static str,
    #[serde(rename = "Z_Br")]
    z_br: Real,
    #[serde(rename = "Z_LBr")]
    z_lbr: Real,
    #[serde(rename = "dist_Vr")]
    dist_vr: Vec<(usize, Real)>,
    #[serde(rename = "dist_Nr")]
    dist_nr: Vec<(usize, Real)>,
}

#[derive(Serialize)]
struct EpsJson {
    eps: Real,
    size_cutoff: usize,
    v_rule: &'static str,
    k2_rule: &'static str,
    #[serde(rename = "Z_Keps2")]
    z_keps2: Real,
    #[serde(rename = "dist_Veps")]
    dist_v: Vec<(usize, Real)>,
    #[serde(rename = "dist_Neps")]
    dist_n: Vec<(usize, Real)>,
    #[serde(rename = "dist_Veps_single")]
    dist_v_single: Vec<(usize, Real)>,
}

#[derive(Serialize)]
struct ReportJson {
    params: ParamsJson,
    #[serde(rename = "Z")]
    z: Real,
    #[serde(rename = "Z_K")]
    z_k: Real,
    #[serde(rename = "Z_L")]
    z_l: Real,
    #[serde(rename = "Z_Br")]
    z_br: Vec<ThresholdJson>,
    #[serde(rename = "Z_Keps2")]
    eps: Vec<EpsJson>,
    dist_largest: Vec<(usize, Real)>,
    dist_k: Vec<(usize, Real)>,
    configurations: u64,
    spanning_trees: u64,
    forests: u64,
    finite_free_energy: Real,
}

fn check_size(n: usize, opts: &ExactOptions) -> Result<()> {
    let max = if opts.long_run {
        N_MAX_LONG
    } else {
        N_MAX_DEFAULT
    };
    if n > max {
        return Err(Error::TooLarge { n, max });
    }
    Ok(())
}

/// Enumerates all `2^{C(n,2)}` configurations in one deterministic pass.
pub fn enumerate(params: &ModelParams, opts: &ExactOptions) -> Result<ExactReport> {
    check_size(params.n, opts)?;
    enumerate_chunked(params, opts, &edge_pairs(params.n), 1)
}

/// Enumeration split into `chunks` contiguous mask ranges, merged in order.
pub fn enumerate_chunked(
    params: &ModelParams,
    opts: &ExactOptions,
    pairs: &[(usize, usize)],
    chunks: u64,
) -> Result<ExactReport> {
    check_size(params.n, opts)?;
    let total = 1u64 << pair_count(params.n);
    let chunks = chunks.clamp(1, total);
    let mut report = ExactReport::empty(*params, opts);
    for c in 0..chunks {
        let lo = total * c / chunks;
        let hi = total * (c + 1) / chunks;
        report.merge(&enumerate_range(params, opts, pairs, lo..hi));
    }
    Ok(report)
}

fn enumerate_range(
    params: &ModelParams,
    opts: &ExactOptions,
    pairs: &[(usize, usize)],
    range: std::ops::Range<u64>,
) -> ExactReport {
    let n = params.n;
    let m = pairs.len();
    let p = params.p();
    let edge_w: Vec<f64> = (0..=m)
        .map(|e| p.powi(e as i32) * (1.0 - p).powi((m - e) as i32))
        .collect();
    let q_w: Vec<f64> = (0..=n).map(|k| params.q.powi(k as i32)).collect();
    let mut rep = ExactReport::empty(*params, opts);
    for mask in range {
        let open = (0..m).filter(|&e| mask >> e & 1 == 1).map(|e| pairs[e]);
        let comps = components(n, open);
        let k = comps.len();
        let e = mask.count_ones() as usize;
        let w = edge_w[e] * q_w[k];
        let acyclic = e + k == n;
        let largest = comps[0].size;

        rep.configurations += 1;
        rep.z.add(w);
        if k == 1 {
            rep.z_k.add(w);
        }
        if acyclic {
            rep.z_l.add(w);
            rep.forests += 1;
            if k == 1 {
                rep.spanning_trees += 1;
            }
        }
        rep.dist_largest.add(largest, w);
        rep.dist_k.add(k, w);

        for t in &mut rep.thresholds {
            let big = comps.iter().filter(|c| c.size > t.r);
            let n_big = big.clone().count();
            let v_big: usize = big.map(|c| c.size).sum();
            if n_big == 0 {
                t.z_b.add(w);
                if acyclic {
                    t.z_lb.add(w);
                }
            }
            t.dist_v.add(v_big, w);
            t.dist_n.add(n_big, w);
        }
        for ev in &mut rep.eps_events {
            let big = comps.iter().filter(|c| c.size > ev.size_cutoff);
            let n_big = big.clone().count();
            let v_big: usize = big.map(|c| c.size).sum();
            ev.dist_v.add(v_big, w);
            ev.dist_n.add(n_big, w);
            if n_big == 1 {
                ev.dist_v_single.add(v_big, w);
            }
            let two_large = k == 2 && comps.iter().all(|c| at_least_eps(c.size, ev.eps, n));
            if k == 1 || two_large {
                ev.z_k2.add(w);
            }
        }
    }
    rep
}

/// One row of the finite-`n` rate table for `|V_{eps n}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteRate {
    pub k: usize,
    pub theta: f64,
    pub weight: f64,
    /// `(1/n) ln Z[|V_{eps n}| = k]`.
    pub rate: f64,
}

/// `k -> (1/n) ln Z[|V_{eps n}| = k]` for every attainable `k`.
pub fn finite_rate_table(params: &ModelParams, eps: f64) -> Result<Vec<FiniteRate>> {
    let opts = ExactOptions {
        eps_list: vec![eps],
        ..ExactOptions::default()
    };
    let rep = enumerate(params, &opts)?;
    let n = params.n as f64;
    Ok(rep.eps_events[0]
        .dist_v
        .entries()
        .into_iter()
        .map(|(k, w)| FiniteRate {
            k,
            theta: k as f64 / n,
            weight: w,
            rate: w.ln() / n,
        })
        .collect())
}

/// `phi[N_{eps n} = 1 | |V_{eps n}| = m]` for `m = 1..=n`; `None` when the
/// conditioning event has zero weight.
pub fn uniqueness_check(params: &ModelParams, eps: f64) -> Result<Vec<(usize, Option<f64>)>> {
    let opts = ExactOptions {
        eps_list: vec![eps],
        ..ExactOptions::default()
    };
    let rep = enumerate(params, &opts)?;
    let ev = &rep.eps_events[0];
    Ok((1..=params.n)
        .map(|m| {
            let denom = ev.dist_v.weight(m);
            let ratio = (denom > 0.0).then(|| ev.dist_v_single.weight(m) / denom);
            (m, ratio)
        })
        .collect())
}

/// Uniqueness ratios as JSON, `null` where undefined.
pub fn uniqueness_json(rows: &[(usize, Option<f64>)]) -> String {
    let mut out = String::from("[");
    for (i, (m, r)) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match r {
            Some(x) => out.push_str(&format!("[{m},\"{}\"]", fmt_real(*x))),
            None => out.push_str(&format!("[{m},null]")),
        }
    }
    out.push(']');
    out
}
