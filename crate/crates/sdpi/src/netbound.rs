//! End-to-end contraction bounds on Bayesian networks via site percolation.
//!
//! A [`BayesNet`] is a DAG with a designated source node `X`; every other
//! node on a source-to-sink route carries a contraction coefficient
//! `η ∈ [0, 1]` (given directly or derived from an explicit kernel). The
//! central bound: the end-to-end contraction from the source to a sink set
//! `V` is at most the probability that a directed path from `X` to `V`
//! survives when each non-source node `v` is independently kept with
//! probability `η_v` (site percolation; the source is never removed).
//!
//! Three independent evaluations of that probability are provided —
//! exhaustive subset enumeration, the peeling recursion
//! `perc(S) = (1−η_W)·perc(S∖{W}) + η_W·perc(S∖{W} ∪ pa(W))` over the
//! topologically last sink `W`, and Monte Carlo — plus the weaker but
//! simpler path-sum bounds `∑_π η^π` over shortcut-free or all simple paths.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::contraction::{eta_kl_certified_upper, eta_tv};
use crate::probcore::Distribution;
use crate::{Error, Result};

/// Cap on the number of simple paths [`path_sum_bounds`] will enumerate.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// Relevant-node count up to which [`perc_exact`] uses subset enumeration
/// (the memoized recursion takes over beyond it; both are exact).
const SUBSET_ENUM_MAX: usize = 20;

/// A node of a [`BayesNet`].
///
/// Exactly one payload is populated: non-roots carry `eta` or `kernel`,
/// non-source roots carry `marginal`, and the source carries nothing (an
/// optional `marginal` is allowed on the source for joint computations).
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Parent indices, in declaration order (kernel inputs are indexed by
    /// parent values in this order, mixed-radix, first parent most
    /// significant).
    pub parents: Vec<usize>,
    pub eta: Option<f64>,
    pub kernel: Option<Channel>,
    pub marginal: Option<Distribution>,
}

/// Directed acyclic graphical model with a designated source node.
///
/// Serializes as `{"source": "X", "nodes": [{"id": "Y1", "parents": ["X"],
/// "eta": 0.36}, …]}`, where a node may carry `"eta"`, `"kernel"` (channel
/// JSON), or `"marginal"` (array) as its payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNet", into = "RawNet")]
pub struct BayesNet {
    nodes: Vec<Node>,
    source: usize,
    children: Vec<Vec<usize>>,
    topo_pos: Vec<usize>,
    by_id: HashMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawNode {
    id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<Channel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marginal: Option<Distribution>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawNet {
    source: String,
    nodes: Vec<RawNode>,
}

impl TryFrom<RawNet> for BayesNet {
    type Error = Error;
    fn try_from(raw: RawNet) -> Result<Self> {
        if raw.nodes.is_empty() {
            return Err(Error::InvalidNetwork("network has no nodes".into()));
        }
        let mut by_id = HashMap::new();
        for (i, n) in raw.nodes.iter().enumerate() {
            if by_id.insert(n.id.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node id {:?}", n.id)));
            }
        }
        let source = *by_id
            .get(&raw.source)
            .ok_or_else(|| Error::UnknownId(raw.source.clone()))?;
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for (i, n) in raw.nodes.iter().enumerate() {
            let mut parents = Vec::with_capacity(n.parents.len());
            for p in &n.parents {
                let pi = *by_id.get(p).ok_or_else(|| Error::UnknownId(p.clone()))?;
                if parents.contains(&pi) {
                    return Err(Error::InvalidNetwork(format!(
                        "node {:?} lists parent {:?} twice",
                        n.id, p
                    )));
                }
                parents.push(pi);
            }
            let is_source = i == source;
            let is_root = parents.is_empty();
            if is_source {
                if !is_root {
                    return Err(Error::InvalidNetwork(format!(
                        "source {:?} must not have parents",
                        n.id
                    )));
                }
                if n.eta.is_some() || n.kernel.is_some() {
                    return Err(Error::InvalidNetwork(format!(
                        "source {:?} must not carry eta or kernel",
                        n.id
                    )));
                }
            } else if is_root {
                if n.marginal.is_none() {
                    return Err(Error::InvalidNetwork(format!(
                        "non-source root {:?} must carry a marginal",
                        n.id
                    )));
                }
                if n.eta.is_some() || n.kernel.is_some() {
                    return Err(Error::InvalidNetwork(format!(
                        "root {:?} must not carry eta or kernel",
                        n.id
                    )));
                }
            } else {
                match (n.eta.is_some(), n.kernel.is_some()) {
                    (true, true) => {
                        return Err(Error::InvalidNetwork(format!(
                            "node {:?} carries both eta and kernel",
                            n.id
                        )))
                    }
                    (false, false) => {
                        return Err(Error::InvalidNetwork(format!(
                            "node {:?} carries neither eta nor kernel",
                            n.id
                        )))
                    }
                    _ => {}
                }
                if n.marginal.is_some() {
                    return Err(Error::InvalidNetwork(format!(
                        "non-root {:?} must not carry a marginal",
                        n.id
                    )));
                }
            }
            if let Some(e) = n.eta {
                if !(0.0..=1.0).contains(&e) {
                    return Err(Error::InvalidNetwork(format!(
                        "node {:?} has eta = {e} outside [0,1]",
                        n.id
                    )));
                }
            }
            nodes.push(Node {
                id: n.id.clone(),
                parents,
                eta: n.eta,
                kernel: n.kernel.clone(),
                marginal: n.marginal.clone(),
            });
        }
        // Kahn's algorithm: topological order (error on cycles).
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (i, node) in nodes.iter().enumerate() {
            indeg[i] = node.parents.len();
            for &p in &node.parents {
                children[p].push(i);
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo_pos = vec![usize::MAX; n];
        let mut placed = 0;
        while let Some(v) = queue.pop() {
            topo_pos[v] = placed;
            placed += 1;
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if placed != n {
            return Err(Error::InvalidNetwork("graph contains a cycle".into()));
        }
        Ok(BayesNet {
            nodes,
            source,
            children,
            topo_pos,
            by_id,
        })
    }
}

impl From<BayesNet> for RawNet {
    fn from(net: BayesNet) -> RawNet {
        let source = net.nodes[net.source].id.clone();
        let nodes = net
            .nodes
            .iter()
            .map(|n| RawNode {
                id: n.id.clone(),
                parents: n.parents.iter().map(|&p| net.nodes[p].id.clone()).collect(),
                eta: n.eta,
                kernel: n.kernel.clone(),
                marginal: n.marginal.clone(),
            })
            .collect();
        RawNet { source, nodes }
    }
}

impl BayesNet {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false (a network has at least its source).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the source node.
    pub fn source_index(&self) -> usize {
        self.source
    }

    /// Node by index.
    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    /// Index lookup by id.
    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Children of node `i`.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    fn resolve_sinks(&self, sinks: &[&str]) -> Result<Vec<usize>> {
        if sinks.is_empty() {
            return Err(Error::EmptySinks);
        }
        let mut out = Vec::new();
        for s in sinks {
            let i = self.index_of(s)?;
            if !out.contains(&i) {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Node indices reachable from the source (inclusive).
    fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    fn ancestors_of(&self, targets: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = targets.to_vec();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &p in &self.nodes[v].parents {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }
}

/// Fluent constructor for [`BayesNet`] values.
#[derive(Debug, Clone)]
pub struct NetBuilder {
    raw: RawNet,
}

impl NetBuilder {
    /// Starts a network whose source node is `source`.
    pub fn new(source: &str) -> Self {
        let raw = RawNet {
            source: source.to_string(),
            nodes: vec![RawNode {
                id: source.to_string(),
                parents: vec![],
                eta: None,
                kernel: None,
                marginal: None,
            }],
        };
        Self { raw }
    }

    /// Adds a node carrying a contraction coefficient.
    pub fn eta_node(mut self, id: &str, parents: &[&str], eta: f64) -> Self {
        self.raw.nodes.push(RawNode {
            id: id.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            eta: Some(eta),
            kernel: None,
            marginal: None,
        });
        self
    }

    /// Adds a node carrying an explicit kernel.
    pub fn kernel_node(mut self, id: &str, parents: &[&str], kernel: Channel) -> Self {
        self.raw.nodes.push(RawNode {
            id: id.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            eta: None,
            kernel: Some(kernel),
            marginal: None,
        });
        self
    }

    /// Adds an exogenous root with its marginal distribution.
    pub fn marginal_node(mut self, id: &str, marginal: Distribution) -> Self {
        self.raw.nodes.push(RawNode {
            id: id.to_string(),
            parents: vec![],
            eta: None,
            kernel: None,
            marginal: Some(marginal),
        });
        self
    }

    /// Validates and builds the network.
    pub fn build(self) -> Result<BayesNet> {
        BayesNet::try_from(self.raw)
    }
}

/// Which contraction coefficient to derive from explicit kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaMode {
    /// KL coefficients: exact for binary-input kernels, otherwise the
    /// total-variation value (a certified upper bound, keeping percolation
    /// bounds valid).
    Kl,
    /// Total-variation (Dobrushin) coefficients, always exact.
    Tv,
}

/// Per-node coefficients for percolation. Source and exogenous roots get
/// placeholder values (1 and 0); neither ever affects a result — the source
/// is never removed and roots other than the source cannot lie on a
/// source-to-sink path.
pub fn resolve_etas(net: &BayesNet, mode: EtaMode) -> Result<Vec<f64>> {
    let mut etas = vec![0.0; net.len()];
    for i in 0..net.len() {
        let node = net.node(i);
        etas[i] = if i == net.source_index() {
            1.0
        } else if let Some(e) = node.eta {
            e
        } else if let Some(k) = &node.kernel {
            match mode {
                EtaMode::Tv => eta_tv(k),
                // Exact for binary-input kernels, a certified upper bound
                // otherwise, so network bounds stay valid either way.
                EtaMode::Kl => eta_kl_certified_upper(k)?,
            }
        } else {
            0.0 // exogenous root; value never used
        };
    }
    Ok(etas)
}

/// How a [`PercResult`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PercMethod {
    ExactRecursion,
    ExactSubsetEnum,
    MonteCarlo,
}

impl std::fmt::Display for PercMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PercMethod::ExactRecursion => "EXACT_RECURSION",
            PercMethod::ExactSubsetEnum => "EXACT_SUBSET_ENUM",
            PercMethod::MonteCarlo => "MONTE_CARLO",
        };
        f.write_str(s)
    }
}

/// A percolation probability with its computation method and (for Monte
/// Carlo) the binomial standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercResult {
    pub value: f64,
    pub method: PercMethod,
    pub stderr: f64,
}

/// The percolation instance restricted to nodes that can matter: nodes
/// reachable from the source that are sinks or ancestors of sinks.
struct PercInstance {
    /// Relevant non-source nodes (original indices).
    relevant: Vec<usize>,
    /// Survival probability per relevant node.
    eta: Vec<f64>,
    /// Children masks within the compact index space; index `m` is the source.
    children_mask: Vec<u32>,
    sink_mask: u32,
    /// True when the source itself is a sink (probability 1).
    source_is_sink: bool,
    /// True when no sink is reachable at all (probability 0).
    unreachable: bool,
}

fn build_instance(net: &BayesNet, sinks: &[usize], etas: &[f64]) -> Result<PercInstance> {
    let source_is_sink = sinks.contains(&net.source_index());
    let reach = net.reachable_from_source();
    let live_sinks: Vec<usize> = sinks.iter().copied().filter(|&s| reach[s]).collect();
    if source_is_sink {
        return Ok(PercInstance {
            relevant: vec![],
            eta: vec![],
            children_mask: vec![],
            sink_mask: 0,
            source_is_sink: true,
            unreachable: false,
        });
    }
    if live_sinks.is_empty() {
        return Ok(PercInstance {
            relevant: vec![],
            eta: vec![],
            children_mask: vec![],
            sink_mask: 0,
            source_is_sink: false,
            unreachable: true,
        });
    }
    let anc = net.ancestors_of(&live_sinks);
    let relevant: Vec<usize> = (0..net.len())
        .filter(|&i| i != net.source_index() && reach[i] && anc[i])
        .collect();
    if relevant.len() > 31 {
        return Err(Error::SizeCap {
            requested: relevant.len(),
            cap: 31,
        });
    }
    let compact: HashMap<usize, usize> = relevant
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, k))
        .collect();
    let m = relevant.len();
    let mut children_mask = vec![0u32; m + 1];
    for (k, &i) in relevant.iter().enumerate() {
        for &c in net.children(i) {
            if let Some(&ck) = compact.get(&c) {
                children_mask[k] |= 1 << ck;
            }
        }
    }
    for &c in net.children(net.source_index()) {
        if let Some(&ck) = compact.get(&c) {
            children_mask[m] |= 1 << ck;
        }
    }
    let mut sink_mask = 0u32;
    for &s in &live_sinks {
        sink_mask |= 1 << compact[&s];
    }
    let eta = relevant.iter().map(|&i| etas[i]).collect();
    Ok(PercInstance {
        relevant,
        eta,
        children_mask,
        sink_mask,
        source_is_sink: false,
        unreachable: false,
    })
}

impl PercInstance {
    /// True iff a sink is reachable from the source through `survivors`.
    fn connects(&self, survivors: u32) -> bool {
        let m = self.relevant.len();
        let mut reach = self.children_mask[m] & survivors;
        if reach & self.sink_mask != 0 {
            return true;
        }
        let mut frontier = reach;
        while frontier != 0 {
            let mut next = 0u32;
            let mut f = frontier;
            while f != 0 {
                let k = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.children_mask[k];
            }
            next &= survivors & !reach;
            if next & self.sink_mask != 0 {
                return true;
            }
            reach |= next;
            frontier = next;
        }
        reach & self.sink_mask != 0
    }
}

/// Exact percolation probability that a directed source-to-sink path
/// survives, each non-source node `v` kept independently with probability
/// `η_v`. Uses subset enumeration for small relevant sets, the memoized
/// peeling recursion beyond.
pub fn perc_exact(net: &BayesNet, sinks: &[&str], mode: EtaMode) -> Result<PercResult> {
    let sink_idx = net.resolve_sinks(sinks)?;
    let etas = resolve_etas(net, mode)?;
    let inst = build_instance(net, &sink_idx, &etas)?;
    if inst.source_is_sink {
        return Ok(PercResult {
            value: 1.0,
            method: PercMethod::ExactRecursion,
            stderr: 0.0,
        });
    }
    if inst.unreachable {
        return Ok(PercResult {
            value: 0.0,
            method: PercMethod::ExactRecursion,
            stderr: 0.0,
        });
    }
    let m = inst.relevant.len();
    if m <= SUBSET_ENUM_MAX {
        let mut total = 0.0;
        for pattern in 0u32..(1u32 << m) {
            let mut prob = 1.0;
            for k in 0..m {
                prob *= if pattern & (1 << k) != 0 {
                    inst.eta[k]
                } else {
                    1.0 - inst.eta[k]
                };
                if prob == 0.0 {
                    break;
                }
            }
            if prob > 0.0 && inst.connects(pattern) {
                total += prob;
            }
        }
        return Ok(PercResult {
            value: total.clamp(0.0, 1.0),
            method: PercMethod::ExactSubsetEnum,
            stderr: 0.0,
        });
    }
    let value = peel_recursion(net, &sink_idx, &etas, true)?;
    Ok(PercResult {
        value,
        method: PercMethod::ExactRecursion,
        stderr: 0.0,
    })
}

/// The peeling recursion on sink sets, shared by [`es_recursion_bound`] and
/// the large-instance path of [`perc_exact`] (the latter additionally prunes
/// unreachable nodes from the state).
fn peel_recursion(net: &BayesNet, sinks: &[usize], etas: &[f64], prune: bool) -> Result<f64> {
    let reach = net.reachable_from_source();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    fn go(
        net: &BayesNet,
        etas: &[f64],
        reach: &[bool],
        prune: bool,
        set: &mut Vec<usize>,
        memo: &mut HashMap<Vec<usize>, f64>,
    ) -> f64 {
        if set.contains(&net.source_index()) {
            return 1.0;
        }
        if prune {
            set.retain(|&v| reach[v]);
        }
        if set.is_empty() {
            return 0.0;
        }
        set.sort_unstable();
        set.dedup();
        if let Some(&v) = memo.get(set.as_slice()) {
            return v;
        }
        let key = set.clone();
        // Peel the topologically last element.
        let (pos, &w) = set
            .iter()
            .enumerate()
            .max_by_key(|&(_, &v)| net.topo_pos[v])
            .expect("non-empty");
        let eta_w = etas[w];
        let mut without: Vec<usize> = set.clone();
        without.remove(pos);
        let mut with_parents = without.clone();
        for &p in &net.node(w).parents {
            with_parents.push(p);
        }
        let a = go(net, etas, reach, prune, &mut without, memo);
        let value = if eta_w == 0.0 {
            a
        } else {
            let b = go(net, etas, reach, prune, &mut with_parents, memo);
            (1.0 - eta_w) * a + eta_w * b
        };
        memo.insert(key, value);
        value
    }
    let mut set = sinks.to_vec();
    Ok(go(net, etas, &reach, prune, &mut set, &mut memo).clamp(0.0, 1.0))
}

/// The iterated network bound obtained by peeling the topologically last
/// sink: `bound(S) = (1−η_W)·bound(S∖{W}) + η_W·bound(S∖{W} ∪ pa(W))`, with
/// `bound = 1` once the source enters the set. Coincides with [`perc_exact`];
/// kept as an independent implementation (no pruning, no subset enumeration)
/// for cross-validation.
pub fn es_recursion_bound(net: &BayesNet, sinks: &[&str], mode: EtaMode) -> Result<f64> {
    let sink_idx = net.resolve_sinks(sinks)?;
    let etas = resolve_etas(net, mode)?;
    peel_recursion(net, &sink_idx, &etas, false)
}

/// Monte Carlo estimate of the percolation probability. Samples are drawn in
/// shards of 2¹⁶ whose generators are seeded by a SplitMix64 stream, so the
/// result is reproducible for a fixed seed regardless of scheduling.
pub fn perc_mc(
    net: &BayesNet,
    sinks: &[&str],
    mode: EtaMode,
    samples: usize,
    seed: u64,
) -> Result<PercResult> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let sink_idx = net.resolve_sinks(sinks)?;
    let etas = resolve_etas(net, mode)?;
    let inst = build_instance(net, &sink_idx, &etas)?;
    if inst.source_is_sink || inst.unreachable {
        return Ok(PercResult {
            value: if inst.source_is_sink { 1.0 } else { 0.0 },
            method: PercMethod::MonteCarlo,
            stderr: 0.0,
        });
    }
    let m = inst.relevant.len();
    const SHARD: usize = 1 << 16;
    let mut hits = 0u64;
    let mut done = 0usize;
    let mut shard_index = 0u64;
    while done < samples {
        let count = SHARD.min(samples - done);
        let mut rng =
            ChaCha8Rng::seed_from_u64(crate::numerics::splitmix64(seed.wrapping_add(shard_index)));
        for _ in 0..count {
            let mut survivors = 0u32;
            for k in 0..m {
                if rng.random::<f64>() < inst.eta[k] {
                    survivors |= 1 << k;
                }
            }
            if inst.connects(survivors) {
                hits += 1;
            }
        }
        done += count;
        shard_index += 1;
    }
    let value = hits as f64 / samples as f64;
    let stderr = (value * (1.0 - value) / samples as f64).sqrt();
    Ok(PercResult {
        value,
        method: PercMethod::MonteCarlo,
        stderr,
    })
}

/// Interpretation of "another path whose vertex set is a subset of π's" in
/// the shortcut-free test. On a DAG the two coincide (distinct simple paths
/// have distinct vertex sets); both are exposed for scrutiny.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortcutRule {
    /// π is a shortcut iff some other source-to-sink path uses a strict
    /// subset of π's vertices.
    StrictSubset,
    /// π is a shortcut iff some other source-to-sink path uses a subset
    /// (possibly equal) of π's vertices.
    NonStrictSubset,
}

/// Path-sum network bounds: `(∑ shortcut-free η^π, ∑ all η^π)` over simple
/// directed paths from the source to the sink set, where `η^π` multiplies
/// the coefficients of the path's non-source nodes. Both sums are clipped
/// at 1 (they bound a probability-like coefficient).
pub fn path_sum_bounds(
    net: &BayesNet,
    sinks: &[&str],
    mode: EtaMode,
    rule: ShortcutRule,
) -> Result<(f64, f64)> {
    path_sum_bounds_with_cap(net, sinks, mode, rule, DEFAULT_PATH_CAP)
}

/// [`path_sum_bounds`] with an explicit cap on enumerated paths.
pub fn path_sum_bounds_with_cap(
    net: &BayesNet,
    sinks: &[&str],
    mode: EtaMode,
    rule: ShortcutRule,
    cap: usize,
) -> Result<(f64, f64)> {
    let sink_idx = net.resolve_sinks(sinks)?;
    let etas = resolve_etas(net, mode)?;
    if sink_idx.contains(&net.source_index()) {
        return Ok((1.0, 1.0));
    }
    let is_sink: Vec<bool> = (0..net.len()).map(|i| sink_idx.contains(&i)).collect();

    // Depth-first enumeration of all simple paths from the source that end at
    // a sink (a path may continue through one sink to another; each sink
    // visit contributes the prefix ending there).
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = vec![net.source_index()];
    fn dfs(
        net: &BayesNet,
        is_sink: &[bool],
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        let cur = *stack.last().expect("non-empty stack");
        if is_sink[cur] {
            if paths.len() >= cap {
                return Err(Error::PathCapExceeded { cap });
            }
            paths.push(stack.clone());
        }
        for &c in net.children(cur) {
            // A DAG admits no repeats along a directed path, so no visited
            // check is needed; children are explored in declaration order.
            stack.push(c);
            dfs(net, is_sink, stack, paths, cap)?;
            stack.pop();
        }
        Ok(())
    }
    dfs(net, &is_sink, &mut stack, &mut paths, cap)?;

    let weight = |path: &[usize]| -> f64 { path[1..].iter().map(|&v| etas[v]).product() };
    let all_sum: f64 = paths.iter().map(|p| weight(p)).sum();

    // Shortcut-free test. A path π (vertex set S) admits a shortcut exactly
    // when some source-to-sink path survives inside the subgraph induced by
    // S minus one non-source vertex; under the non-strict rule, exactly when
    // S's induced subgraph carries more than one source-to-sink path.
    let mut sf_sum = 0.0;
    for path in &paths {
        let shortcut = match rule {
            ShortcutRule::StrictSubset => path[1..].iter().any(|&drop| {
                let allowed = |v: usize| path.contains(&v) && v != drop;
                connects_within(net, &is_sink, net.source_index(), &allowed)
            }),
            ShortcutRule::NonStrictSubset => {
                let allowed = |v: usize| path.contains(&v);
                count_paths_within(net, &is_sink, net.source_index(), &allowed, 2) >= 2
            }
        };
        if !shortcut {
            sf_sum += weight(path);
        }
    }
    Ok((sf_sum.min(1.0), all_sum.min(1.0)))
}

/// True iff a source-to-sink path exists inside the induced subgraph.
fn connects_within(
    net: &BayesNet,
    is_sink: &[bool],
    source: usize,
    allowed: &dyn Fn(usize) -> bool,
) -> bool {
    let mut seen = vec![false; net.len()];
    let mut stack = vec![source];
    seen[source] = true;
    while let Some(v) = stack.pop() {
        if v != source && is_sink[v] {
            return true;
        }
        for &c in net.children(v) {
            if !seen[c] && allowed(c) {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    false
}

/// Number of distinct source-to-sink paths inside the induced subgraph,
/// early-exiting at `limit`.
fn count_paths_within(
    net: &BayesNet,
    is_sink: &[bool],
    source: usize,
    allowed: &dyn Fn(usize) -> bool,
    limit: usize,
) -> usize {
    fn go(
        net: &BayesNet,
        is_sink: &[bool],
        v: usize,
        allowed: &dyn Fn(usize) -> bool,
        limit: usize,
        count: &mut usize,
    ) {
        if *count >= limit {
            return;
        }
        if is_sink[v] {
            *count += 1;
            if *count >= limit {
                return;
            }
        }
        for &c in net.children(v) {
            if allowed(c) {
                go(net, is_sink, c, allowed, limit, count);
            }
        }
    }
    let mut count = 0;
    go(net, is_sink, source, allowed, limit, &mut count);
    count
}

/// Percolation bound with total-variation coefficients (exact for explicit
/// kernels), bounding the end-to-end TV contraction from source to sinks.
pub fn tv_network_bound(net: &BayesNet, sinks: &[&str]) -> Result<f64> {
    Ok(perc_exact(net, sinks, EtaMode::Tv)?.value)
}

/// One row of the reference bound table emitted by the `table1` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table1Row {
    pub network: String,
    /// Percolation (recursion) bound.
    pub recursion_bound: f64,
    /// Shortcut-free path sum.
    pub shortcut_free_sum: f64,
    /// All-paths sum.
    pub all_paths_sum: f64,
}

/// The four-network reference table of bounds, evaluated at a common `η`.
///
/// Rows: the 4-node chain, the 4-node diamond chain, two parallel channels,
/// and parallel channels with a cross edge. The final column reproduces the
/// published coarser form `3η` for the last row (the two-hop path's weight
/// `η²` rounded up to `η`); the exact all-paths sum for that network is
/// `2η + η²`, which [`path_sum_bounds`] returns.
pub fn table1_rows(eta: f64) -> Result<Vec<Table1Row>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in [0,1], got {eta}"
        )));
    }
    let e = eta;
    Ok(vec![
        Table1Row {
            network: "Markov chain 1".into(),
            recursion_bound: e,
            shortcut_free_sum: e,
            all_paths_sum: e + e * e * e,
        },
        Table1Row {
            network: "Markov chain 2".into(),
            recursion_bound: e * e,
            shortcut_free_sum: e * e,
            all_paths_sum: e * e + e * e * e,
        },
        Table1Row {
            network: "Parallel channels".into(),
            recursion_bound: 2.0 * e - e * e,
            shortcut_free_sum: 2.0 * e,
            all_paths_sum: 2.0 * e,
        },
        Table1Row {
            network: "Parallel channels with feedback".into(),
            recursion_bound: 2.0 * e - e * e,
            shortcut_free_sum: 2.0 * e,
            all_paths_sum: 3.0 * e,
        },
    ])
}

/// The four networks behind [`table1_rows`], with their sink sets, for
/// cross-checking the table against the general machinery.
pub fn table1_networks(eta: f64) -> Result<Vec<(String, BayesNet, Vec<String>)>> {
    let chain1 = NetBuilder::new("X")
        .eta_node("Y1", &["X"], eta)
        .eta_node("B", &["Y1"], eta)
        .eta_node("Y2", &["B"], eta)
        .build()?;
    let chain2 = NetBuilder::new("X")
        .eta_node("A", &["X"], eta)
        .eta_node("B", &["X", "A"], eta)
        .eta_node("Y", &["B"], eta)
        .build()?;
    let parallel = NetBuilder::new("X")
        .eta_node("Y1", &["X"], eta)
        .eta_node("Y2", &["X"], eta)
        .build()?;
    let feedback = NetBuilder::new("X")
        .eta_node("Y1", &["X"], eta)
        .eta_node("Y2", &["X", "Y1"], eta)
        .build()?;
    Ok(vec![
        ("Markov chain 1".into(), chain1, vec!["Y1".into(), "Y2".into()]),
        ("Markov chain 2".into(), chain2, vec!["Y".into()]),
        ("Parallel channels".into(), parallel, vec!["Y1".into(), "Y2".into()]),
        (
            "Parallel channels with feedback".into(),
            feedback,
            vec!["Y1".into(), "Y2".into()],
        ),
    ])
}

/// Composes a kernel-explicit network into the channel from the source to
/// the product of the sink alphabets (sinks in the given order, mixed-radix,
/// first sink most significant). Exogenous roots are integrated out against
/// their marginals. Alphabet sizes are inferred from the kernels.
pub fn compose_network_channel(net: &BayesNet, sinks: &[&str]) -> Result<Channel> {
    let sink_idx = net.resolve_sinks(sinks)?;
    let n = net.len();
    // Infer alphabet sizes: kernel outputs and root marginals are known;
    // the source size is pinned down by its children's kernel input sizes.
    let mut size: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let node = net.node(i);
        if let Some(k) = &node.kernel {
            size[i] = Some(k.output_size());
        } else if let Some(m) = &node.marginal {
            size[i] = Some(m.len());
        } else if i != net.source_index() {
            return Err(Error::InvalidNetwork(format!(
                "node {:?} has no explicit kernel; composition needs kernels everywhere",
                node.id
            )));
        }
    }
    loop {
        let mut progressed = false;
        for i in 0..n {
            let node = net.node(i);
            let Some(k) = &node.kernel else { continue };
            let mut known_product = 1usize;
            let mut unknown: Option<usize> = None;
            let mut ok = true;
            for &p in &node.parents {
                match size[p] {
                    Some(s) => known_product *= s,
                    None if unknown.is_none() => unknown = Some(p),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            match unknown {
                None => {
                    if known_product != k.input_size() {
                        return Err(Error::InvalidNetwork(format!(
                            "kernel at {:?} has input size {} but parents supply {}",
                            node.id,
                            k.input_size(),
                            known_product
                        )));
                    }
                }
                Some(p) => {
                    if known_product == 0 || k.input_size() % known_product != 0 {
                        return Err(Error::InvalidNetwork(format!(
                            "kernel at {:?} has input size {} incompatible with parents",
                            node.id,
                            k.input_size()
                        )));
                    }
                    size[p] = Some(k.input_size() / known_product);
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    let size: Vec<usize> = size
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                Error::InvalidNetwork(format!(
                    "cannot infer the alphabet size of {:?}",
                    net.node(i).id
                ))
            })
        })
        .collect::<Result<_>>()?;

    // Enumerate configurations in topological order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| net.topo_pos[i]);
    let non_source: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| i != net.source_index())
        .collect();
    let x_size = size[net.source_index()];
    let mut configs = 1usize;
    for &i in &non_source {
        configs = configs
            .checked_mul(size[i])
            .ok_or(Error::SizeCap {
                requested: usize::MAX,
                cap: 1 << 20,
            })?;
    }
    let out_size: usize = sink_idx.iter().map(|&s| size[s]).product();
    if x_size.saturating_mul(configs.max(out_size)) > (1 << 20) {
        return Err(Error::SizeCap {
            requested: x_size * configs.max(out_size),
            cap: 1 << 20,
        });
    }

    let mut rows = vec![vec![0.0f64; out_size]; x_size];
    let mut values = vec![0usize; n];
    for (x, row) in rows.iter_mut().enumerate() {
        values[net.source_index()] = x;
        // Odometer over the non-source configuration space.
        let mut digits = vec![0usize; non_source.len()];
        loop {
            for (d, &i) in digits.iter().zip(&non_source) {
                values[i] = *d;
            }
            let mut prob = 1.0f64;
            for &i in &non_source {
                let node = net.node(i);
                if let Some(k) = &node.kernel {
                    let mut inp = 0usize;
                    for &p in &node.parents {
                        inp = inp * size[p] + values[p];
                    }
                    prob *= k.prob(inp, values[i]);
                } else if let Some(m) = &node.marginal {
                    prob *= m.prob(values[i]);
                }
                if prob == 0.0 {
                    break;
                }
            }
            if prob > 0.0 {
                let mut out = 0usize;
                for &s in &sink_idx {
                    out = out * size[s] + values[s];
                }
                row[out] += prob;
            }
            // Advance the odometer (last digit fastest).
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < size[non_source[pos]] {
                    break;
                }
                digits[pos] = 0;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
        // Remove accumulated rounding before the strict stochasticity check.
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidNetwork(format!(
                "composed row mass {total} deviates from 1; kernels inconsistent"
            )));
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Channel::from_rows(rows)
}
