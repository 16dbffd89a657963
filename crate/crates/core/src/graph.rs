//! Directed weighted instance graphs.
//!
//! Nodes are dense indices `0..n` with a side table of labels and metadata.
//! Adjacency is stored twice in compressed sparse row form (out and in), both
//! sorted by neighbor index, so every algorithm downstream can run in linear
//! time over plain slices.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index.
pub type NodeIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Online,
    Offline,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Mastodon,
    Other,
    #[default]
    Unknown,
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "online" => Ok(Status::Online),
            "offline" => Ok(Status::Offline),
            "unknown" | "" => Ok(Status::Unknown),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mastodon" => Ok(Platform::Mastodon),
            "other" => Ok(Platform::Other),
            "unknown" | "" => Ok(Platform::Unknown),
            other => Err(format!("unknown platform `{other}`")),
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Online => "online",
            Status::Offline => "offline",
            Status::Unknown => "unknown",
        })
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Platform::Mastodon => "mastodon",
            Platform::Other => "other",
            Platform::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct NodeMeta {
    pub status: Status,
    pub platform: Platform,
}

/// One row of an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    /// Absent weights count as 1.
    pub weight: Option<f64>,
}

impl EdgeRecord {
    pub fn new(source: impl Into<String>, target: impl Into<String>, weight: f64) -> Self {
        EdgeRecord {
            source: source.into(),
            target: target.into(),
            weight: Some(weight),
        }
    }

    pub fn unweighted(source: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeRecord {
            source: source.into(),
            target: target.into(),
            weight: None,
        }
    }
}

/// One row of a node-metadata file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaRecord {
    pub label: String,
    pub meta: NodeMeta,
}

/// Counters collected while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub records: usize,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

/// Immutable directed weighted simple graph.
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeIdx>,
    meta: Vec<NodeMeta>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeIdx>,
    out_weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeIdx>,
    in_weights: Vec<f64>,
}

impl InstanceGraph {
    /// Assembles a graph from deduplicated, loop-free, positively weighted arcs.
    ///
    /// Callers inside the crate guarantee those preconditions; they are only
    /// checked in debug builds.
    pub(crate) fn from_parts(
        labels: Vec<String>,
        meta: Vec<NodeMeta>,
        mut edges: Vec<(NodeIdx, NodeIdx, f64)>,
    ) -> Self {
        let n = labels.len();
        debug_assert_eq!(meta.len(), n);
        edges.sort_unstable_by_key(|e| (e.0, e.1));
        debug_assert!(edges
            .windows(2)
            .all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1)));
        debug_assert!(edges.iter().all(|e| e.0 != e.1 && e.2 > 0.0));

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(s, t, _) in &edges {
            out_offsets[s + 1] += 1;
            in_offsets[t + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }

        let m = edges.len();
        let out_targets = edges.iter().map(|e| e.1).collect();
        let out_weights = edges.iter().map(|e| e.2).collect();

        // Scanning arcs in (source, target) order fills each in-list sorted by source.
        let mut in_sources = vec![0; m];
        let mut in_weights = vec![0.0; m];
        let mut cursor = in_offsets.clone();
        for &(s, t, w) in &edges {
            let slot = cursor[t];
            in_sources[slot] = s;
            in_weights[slot] = w;
            cursor[t] += 1;
        }

        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();

        InstanceGraph {
            labels,
            index,
            meta,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
        }
    }

    /// A graph with nodes but no edges.
    pub fn empty_with_labels(labels: Vec<String>) -> Self {
        let meta = vec![NodeMeta::default(); labels.len()];
        Self::from_parts(labels, meta, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: NodeIdx) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_index(&self, label: &str) -> Option<NodeIdx> {
        self.index.get(label).copied()
    }

    pub fn meta(&self, v: NodeIdx) -> NodeMeta {
        self.meta[v]
    }

    pub fn metas(&self) -> &[NodeMeta] {
        &self.meta
    }

    pub fn out_degree(&self, v: NodeIdx) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: NodeIdx) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// Out-neighbors of `v`, ascending.
    pub fn out_neighbors(&self, v: NodeIdx) -> &[NodeIdx] {
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn out_weights(&self, v: NodeIdx) -> &[f64] {
        &self.out_weights[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// In-neighbors of `v`, ascending.
    pub fn in_neighbors(&self, v: NodeIdx) -> &[NodeIdx] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_weights(&self, v: NodeIdx) -> &[f64] {
        &self.in_weights[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_strength(&self, v: NodeIdx) -> f64 {
        self.out_weights(v).iter().sum()
    }

    pub fn in_strength(&self, v: NodeIdx) -> f64 {
        self.in_weights(v).iter().sum()
    }

    /// Weight of arc `s -> t`, if present.
    pub fn weight(&self, s: NodeIdx, t: NodeIdx) -> Option<f64> {
        let targets = self.out_neighbors(s);
        targets
            .binary_search(&t)
            .ok()
            .map(|pos| self.out_weights[self.out_offsets[s] + pos])
    }

    pub fn has_edge(&self, s: NodeIdx, t: NodeIdx) -> bool {
        self.out_neighbors(s).binary_search(&t).is_ok()
    }

    /// All arcs as `(source, target, weight)`, ordered by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx, f64)> + '_ {
        (0..self.node_count()).flat_map(move |s| {
            let lo = self.out_offsets[s];
            let hi = self.out_offsets[s + 1];
            (lo..hi).map(move |k| (s, self.out_targets[k], self.out_weights[k]))
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.out_weights.iter().sum()
    }

    /// Subgraph induced by the nodes for which `keep` holds.
    ///
    /// Kept nodes are renumbered densely in their original order; labels,
    /// metadata and weights carry over.
    pub fn induced_subgraph(&self, keep: impl Fn(NodeIdx) -> bool) -> InstanceGraph {
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut labels = Vec::new();
        let mut meta = Vec::new();
        for v in 0..self.node_count() {
            if keep(v) {
                remap[v] = labels.len();
                labels.push(self.labels[v].clone());
                meta.push(self.meta[v]);
            }
        }
        let edges = self
            .edges()
            .filter(|&(s, t, _)| remap[s] != usize::MAX && remap[t] != usize::MAX)
            .map(|(s, t, w)| (remap[s], remap[t], w))
            .collect();
        InstanceGraph::from_parts(labels, meta, edges)
    }

    /// Same arcs, without nodes that have neither in- nor out-arcs.
    pub fn without_isolated(&self) -> InstanceGraph {
        self.induced_subgraph(|v| self.in_degree(v) + self.out_degree(v) > 0)
    }

    /// Same nodes, a filtered arc set.
    pub(crate) fn with_edges(&self, edges: Vec<(NodeIdx, NodeIdx, f64)>) -> InstanceGraph {
        InstanceGraph::from_parts(self.labels.clone(), self.meta.clone(), edges)
    }

    pub fn undirected_view(&self, rule: WeightRule) -> UndirectedGraph {
        UndirectedGraph::from_directed(self, rule)
    }
}

/// Accumulates nodes and arcs, merging duplicates and dropping self-loops.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeIdx>,
    meta: Vec<NodeMeta>,
    arcs: HashMap<(NodeIdx, NodeIdx), f64>,
    stats: BuildStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `label`, creating the node on first sight.
    pub fn node(&mut self, label: &str) -> NodeIdx {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        self.meta.push(NodeMeta::default());
        i
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn set_meta(&mut self, v: NodeIdx, meta: NodeMeta) {
        self.meta[v] = meta;
    }

    /// Adds `weight` to arc `s -> t`. Self-loops are counted and discarded.
    pub fn add_arc(&mut self, s: NodeIdx, t: NodeIdx, weight: f64) {
        self.stats.records += 1;
        if s == t {
            self.stats.self_loops_dropped += 1;
            return;
        }
        match self.arcs.entry((s, t)) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += weight;
                self.stats.duplicates_merged += 1;
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(weight);
            }
        }
    }

    pub fn build(self) -> (InstanceGraph, BuildStats) {
        let edges = self.arcs.into_iter().map(|((s, t), w)| (s, t, w)).collect();
        (
            InstanceGraph::from_parts(self.labels, self.meta, edges),
            self.stats,
        )
    }
}

/// Builds a graph from edge records plus optional metadata.
///
/// Node ids follow first appearance in `edges`; metadata labels that never
/// occur in an edge become isolated nodes appended afterwards.
pub fn build_graph<I>(edges: I, meta: Option<&[MetaRecord]>) -> Result<(InstanceGraph, BuildStats)>
where
    I: IntoIterator<Item = EdgeRecord>,
{
    let mut b = GraphBuilder::new();
    for (pos, rec) in edges.into_iter().enumerate() {
        if rec.source.is_empty() || rec.target.is_empty() {
            return Err(Error::Validation(format!(
                "record {}: empty node label",
                pos + 1
            )));
        }
        let w = rec.weight.unwrap_or(1.0);
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Validation(format!(
                "record {}: weight must be positive, got {w}",
                pos + 1
            )));
        }
        let s = b.node(&rec.source);
        let t = b.node(&rec.target);
        b.add_arc(s, t, w);
    }
    if let Some(meta) = meta {
        for m in meta {
            let v = b.node(&m.label);
            b.set_meta(v, m.meta);
        }
    }
    Ok(b.build())
}

/// How reciprocal arcs combine into one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightRule {
    #[default]
    Sum,
    Max,
}

/// Simple undirected graph in CSR form; each edge is stored in both endpoint lists.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeIdx>,
    weights: Vec<f64>,
}

impl UndirectedGraph {
    fn from_directed(g: &InstanceGraph, rule: WeightRule) -> Self {
        let n = g.node_count();
        let mut offsets = vec![0usize; n + 1];
        let mut neighbors = Vec::with_capacity(2 * g.edge_count());
        let mut weights = Vec::with_capacity(2 * g.edge_count());
        for v in 0..n {
            // merge the two sorted lists
            let (outs, ow) = (g.out_neighbors(v), g.out_weights(v));
            let (ins, iw) = (g.in_neighbors(v), g.in_weights(v));
            let (mut i, mut j) = (0, 0);
            while i < outs.len() || j < ins.len() {
                let take_out = j == ins.len() || (i < outs.len() && outs[i] < ins[j]);
                let take_in = i == outs.len() || (j < ins.len() && ins[j] < outs[i]);
                if take_out {
                    neighbors.push(outs[i]);
                    weights.push(ow[i]);
                    i += 1;
                } else if take_in {
                    neighbors.push(ins[j]);
                    weights.push(iw[j]);
                    j += 1;
                } else {
                    neighbors.push(outs[i]);
                    weights.push(match rule {
                        WeightRule::Sum => ow[i] + iw[j],
                        WeightRule::Max => ow[i].max(iw[j]),
                    });
                    i += 1;
                    j += 1;
                }
            }
            offsets[v + 1] = neighbors.len();
        }
        UndirectedGraph {
            offsets,
            neighbors,
            weights,
        }
    }

    /// Builds from an undirected edge list; duplicates are merged by `rule`
    /// and self-loops dropped.
    pub fn from_edges(n: usize, edges: &[(NodeIdx, NodeIdx, f64)], rule: WeightRule) -> Self {
        let mut adj: Vec<Vec<(NodeIdx, f64)>> = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a != b {
                adj[a].push((b, w));
                adj[b].push((a, w));
            }
        }
        let mut offsets = vec![0usize; n + 1];
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_by_key(|e| e.0);
            for (u, w) in list.drain(..) {
                if neighbors.len() > offsets[v] && *neighbors.last().unwrap() == u {
                    let last = weights.last_mut().unwrap();
                    *last = match rule {
                        WeightRule::Sum => *last + w,
                        WeightRule::Max => f64::max(*last, w),
                    };
                } else {
                    neighbors.push(u);
                    weights.push(w);
                }
            }
            offsets[v + 1] = neighbors.len();
        }
        UndirectedGraph {
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: NodeIdx) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: NodeIdx) -> &[NodeIdx] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weights(&self, v: NodeIdx) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn strength(&self, v: NodeIdx) -> f64 {
        self.weights(v).iter().sum()
    }

    /// Each edge once, as `(a, b, w)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx, f64)> + '_ {
        (0..self.node_count()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .zip(self.weights(a))
                .filter(move |(&b, _)| a < b)
                .map(move |(&b, &w)| (a, b, w))
        })
    }
}

/// Strongly and weakly connected components.
///
/// Component ids are numbered in order of each component's smallest node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub scc: Vec<usize>,
    pub scc_count: usize,
    pub wcc: Vec<usize>,
    pub wcc_count: usize,
}

impl Components {
    pub fn scc_groups(&self) -> Vec<Vec<NodeIdx>> {
        groups(&self.scc, self.scc_count)
    }

    pub fn wcc_groups(&self) -> Vec<Vec<NodeIdx>> {
        groups(&self.wcc, self.wcc_count)
    }

    /// Id of the largest weakly connected component; ties go to the lower id.
    pub fn largest_wcc(&self) -> Option<usize> {
        let mut sizes = vec![0usize; self.wcc_count];
        for &c in &self.wcc {
            sizes[c] += 1;
        }
        let mut best: Option<usize> = None;
        for (c, &s) in sizes.iter().enumerate() {
            if best.is_none_or(|b| s > sizes[b]) {
                best = Some(c);
            }
        }
        best
    }
}

fn groups(assign: &[usize], count: usize) -> Vec<Vec<NodeIdx>> {
    let mut out = vec![Vec::new(); count];
    for (v, &c) in assign.iter().enumerate() {
        out[c].push(v);
    }
    out
}

/// Renumbers component labels by first occurrence in node order.
fn canonical_labels(raw: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let labels = raw
        .iter()
        .map(|r| {
            let next = map.len();
            *map.entry(*r).or_insert(next)
        })
        .collect();
    (labels, map.len())
}

pub fn components(g: &InstanceGraph) -> Components {
    let (scc, scc_count) = canonical_labels(&tarjan_scc(g));
    let (wcc, wcc_count) = canonical_labels(&weak_components(g));
    Components {
        scc,
        scc_count,
        wcc,
        wcc_count,
    }
}

/// Iterative Tarjan; returns a raw component label per node.
fn tarjan_scc(g: &InstanceGraph) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut call: Vec<(NodeIdx, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.out_neighbors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

fn weak_components(g: &InstanceGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, t, _) in g.edges() {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}
