//! Community structure: Louvain optimization, modularity, pairwise conductance.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InstanceGraph, NodeIdx, WeightRule};
use crate::io::read_rows;

/// Communities with at least this many members count as significant.
pub const SIGNIFICANT_SIZE: usize = 10;

/// Moves must beat staying put by more than this to count.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularityVariant {
    /// Newman modularity of the undirected view with unit weights.
    UndirectedUnweighted,
    /// Directed weighted modularity with strength-based null model.
    DirectedWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularityScore {
    pub value: f64,
    pub variant: ModularityVariant,
}

/// A hard partition of the nodes. Community ids are dense and ordered by
/// decreasing size, ties broken by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    community_count: usize,
    pub method: String,
    pub significant_size: usize,
}

impl Partition {
    /// Builds a partition from arbitrary community labels, renumbering them.
    pub fn from_assignment(labels: &[usize], method: impl Into<String>) -> Self {
        let n = labels.len();
        let mut dense: HashMap<usize, usize> = HashMap::new();
        let mut raw = Vec::with_capacity(n);
        for &c in labels {
            let next = dense.len();
            raw.push(*dense.entry(c).or_insert(next));
        }
        let k = dense.len();
        // first member and size per raw community
        let mut size = vec![0usize; k];
        let mut first = vec![usize::MAX; k];
        for (v, &c) in raw.iter().enumerate() {
            size[c] += 1;
            first[c] = first[c].min(v);
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&c| (std::cmp::Reverse(size[c]), first[c]));
        let mut rank = vec![0; k];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        Partition {
            assignment: raw.iter().map(|&c| rank[c]).collect(),
            community_count: k,
            method: method.into(),
            significant_size: SIGNIFICANT_SIZE,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_assignment(&(0..n).collect::<Vec<_>>(), "singletons")
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn community_of(&self, v: NodeIdx) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.community_count];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    pub fn members(&self, c: usize) -> Vec<NodeIdx> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == c)
            .collect()
    }

    /// Ids of communities with at least `significant_size` members.
    pub fn significant(&self) -> Vec<usize> {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= self.significant_size)
            .map(|(c, _)| c)
            .collect()
    }
}

fn check_cover(g: &InstanceGraph, p: &Partition) -> Result<()> {
    if p.node_count() != g.node_count() {
        return Err(Error::Validation(format!(
            "partition covers {} nodes, graph has {}",
            p.node_count(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Modularity of `p` on `g`.
pub fn modularity(
    g: &InstanceGraph,
    p: &Partition,
    variant: ModularityVariant,
) -> Result<ModularityScore> {
    check_cover(g, p)?;
    let k = p.community_count();
    let value = match variant {
        ModularityVariant::UndirectedUnweighted => {
            let u = g.undirected_view(WeightRule::Sum);
            let m = u.edge_count() as f64;
            if m == 0.0 {
                return Err(Error::UndefinedStatistic("modularity"));
            }
            let mut inside = vec![0.0; k];
            let mut degree = vec![0.0; k];
            for (a, b, _) in u.edges() {
                let (ca, cb) = (p.community_of(a), p.community_of(b));
                if ca == cb {
                    inside[ca] += 1.0;
                }
                degree[ca] += 1.0;
                degree[cb] += 1.0;
            }
            (0..k)
                .map(|c| inside[c] / m - (degree[c] / (2.0 * m)).powi(2))
                .sum()
        }
        ModularityVariant::DirectedWeighted => {
            let w = g.total_weight();
            if w == 0.0 {
                return Err(Error::UndefinedStatistic("modularity"));
            }
            let mut inside = vec![0.0; k];
            let mut s_out = vec![0.0; k];
            let mut s_in = vec![0.0; k];
            for (a, b, wt) in g.edges() {
                let (ca, cb) = (p.community_of(a), p.community_of(b));
                if ca == cb {
                    inside[ca] += wt;
                }
                s_out[ca] += wt;
                s_in[cb] += wt;
            }
            (0..k)
                .map(|c| inside[c] / w - s_out[c] * s_in[c] / (w * w))
                .sum()
        }
    };
    Ok(ModularityScore { value, variant })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainResult {
    pub partition: Partition,
    pub score: ModularityScore,
    /// Modularity after each aggregation pass, in order.
    pub pass_modularity: Vec<f64>,
}

/// Louvain modularity maximization: local moving, then aggregation, repeated
/// until a pass moves no node. The node visit order is shuffled by `seed`.
pub fn louvain(g: &InstanceGraph, variant: ModularityVariant, seed: u64) -> Result<LouvainResult> {
    if g.edge_count() == 0 {
        return Err(Error::Argument("louvain needs at least one edge".into()));
    }
    let n = g.node_count();
    let arcs: Vec<(usize, usize, f64)> = match variant {
        ModularityVariant::UndirectedUnweighted => g
            .undirected_view(WeightRule::Sum)
            .edges()
            .flat_map(|(a, b, _)| [(a, b, 1.0), (b, a, 1.0)])
            .collect(),
        ModularityVariant::DirectedWeighted => g.edges().collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::new(n, &arcs);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut history = Vec::new();
    let mut current = level.modularity(&(0..n).collect::<Vec<_>>());

    loop {
        let (community, moved) = level.local_moving(&mut rng);
        if !moved {
            break;
        }
        let (renumbered, k) = renumber(&community);
        let q = level.modularity(&renumbered);
        if q <= current + GAIN_EPS {
            break;
        }
        for m in membership.iter_mut() {
            *m = renumbered[*m];
        }
        current = q;
        history.push(q);
        level = level.aggregate(&renumbered, k);
    }

    let partition = Partition::from_assignment(&membership, "louvain");
    let score = modularity(g, &partition, variant)?;
    Ok(LouvainResult {
        partition,
        score,
        pass_modularity: history,
    })
}

fn renumber(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    let out = community
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

/// One level of the Louvain hierarchy: a weighted digraph that may carry
/// self-loops (the internal weight of aggregated communities).
struct Level {
    /// Per node: neighbors `j != i` with `w_ij + w_ji`.
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    s_out: Vec<f64>,
    s_in: Vec<f64>,
    total: f64,
}

impl Level {
    fn new(n: usize, arcs: &[(usize, usize, f64)]) -> Self {
        let mut sym: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        let mut self_loops = vec![0.0; n];
        let mut s_out = vec![0.0; n];
        let mut s_in = vec![0.0; n];
        let mut total = 0.0;
        for &(a, b, w) in arcs {
            s_out[a] += w;
            s_in[b] += w;
            total += w;
            if a == b {
                self_loops[a] += w;
            } else {
                *sym[a].entry(b).or_insert(0.0) += w;
                *sym[b].entry(a).or_insert(0.0) += w;
            }
        }
        let adj = sym
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_unstable_by_key(|e| e.0);
                v
            })
            .collect();
        Level {
            adj,
            self_loops,
            s_out,
            s_in,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut inside = vec![0.0; k];
        let mut c_out = vec![0.0; k];
        let mut c_in = vec![0.0; k];
        for i in 0..self.len() {
            let c = community[i];
            inside[c] += self.self_loops[i];
            c_out[c] += self.s_out[i];
            c_in[c] += self.s_in[i];
            for &(j, w) in &self.adj[i] {
                // each unordered pair appears twice in `adj`
                if community[j] == c {
                    inside[c] += w / 2.0;
                }
            }
        }
        let t = self.total;
        (0..k)
            .map(|c| inside[c] / t - c_out[c] * c_in[c] / (t * t))
            .sum()
    }

    /// Repeated sweeps of single-node moves until a sweep changes nothing.
    fn local_moving(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let t = self.total;
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot_out = self.s_out.clone();
        let mut tot_in = self.s_in.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut link = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let old = community[i];
                tot_out[old] -= self.s_out[i];
                tot_in[old] -= self.s_in[i];

                touched.clear();
                touched.push(old);
                seen[old] = true;
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    link[c] += w;
                }

                let gain = |c: usize, link_c: f64| {
                    link_c / t - (self.s_out[i] * tot_in[c] + self.s_in[i] * tot_out[c]) / (t * t)
                };
                let stay = gain(old, link[old]);
                let (mut best, mut best_gain) = (old, stay);
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain || (g == best_gain && c < best) {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != old && best_gain <= stay + GAIN_EPS {
                    best = old;
                }
                for &c in &touched {
                    link[c] = 0.0;
                    seen[c] = false;
                }

                community[i] = best;
                tot_out[best] += self.s_out[i];
                tot_in[best] += self.s_in[i];
                if best != old {
                    moved = true;
                    any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (community, any)
    }

    fn aggregate(&self, community: &[usize], k: usize) -> Level {
        let mut arcs: HashMap<(usize, usize), f64> = HashMap::new();
        let mut self_loops = vec![0.0; k];
        let mut s_out = vec![0.0; k];
        let mut s_in = vec![0.0; k];
        for i in 0..self.len() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            s_out[ci] += self.s_out[i];
            s_in[ci] += self.s_in[i];
            for &(j, w) in &self.adj[i] {
                let cj = community[j];
                if ci == cj {
                    self_loops[ci] += w / 2.0;
                } else if ci < cj {
                    *arcs.entry((ci, cj)).or_insert(0.0) += w;
                }
            }
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        let mut pairs: Vec<((usize, usize), f64)> = arcs.into_iter().collect();
        pairs.sort_unstable_by_key(|p| p.0);
        for ((a, b), w) in pairs {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in adj.iter_mut() {
            list.sort_unstable_by_key(|e| e.0);
        }
        Level {
            adj,
            self_loops,
            s_out,
            s_in,
            total: self.total,
        }
    }
}

/// Conductance between communities `a` and `b` on the subgraph induced by
/// their union: cut weight over the smaller side volume.
pub fn conductance(
    g: &InstanceGraph,
    p: &Partition,
    a: usize,
    b: usize,
    weighted: bool,
) -> Result<f64> {
    check_cover(g, p)?;
    let k = p.community_count();
    if a >= k || b >= k {
        return Err(Error::Argument(format!(
            "community id out of range (have {k})"
        )));
    }
    if a == b {
        return Err(Error::Argument(
            "conductance needs two distinct communities".into(),
        ));
    }
    let flows = community_flows(g, p, weighted);
    let get = |x: usize, y: usize| flows.get(&(x, y)).copied().unwrap_or(0.0);
    pair_conductance(get(a, a), get(b, b), get(a, b) + get(b, a))
        .ok_or(Error::UndefinedStatistic("conductance"))
}

/// Total arc weight (or count) from community `x` to community `y`.
fn community_flows(
    g: &InstanceGraph,
    p: &Partition,
    weighted: bool,
) -> HashMap<(usize, usize), f64> {
    let mut flows = HashMap::new();
    for (s, t, w) in g.edges() {
        let key = (p.community_of(s), p.community_of(t));
        *flows.entry(key).or_insert(0.0) += if weighted { w } else { 1.0 };
    }
    flows
}

/// Each internal arc adds to the volume twice (once per endpoint), each cut
/// arc once per side.
fn pair_conductance(inside_a: f64, inside_b: f64, cut: f64) -> Option<f64> {
    let vol = (2.0 * inside_a + cut).min(2.0 * inside_b + cut);
    (vol > 0.0).then(|| cut / vol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductancePair {
    pub a: usize,
    pub b: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductanceReport {
    pub weighted: bool,
    pub communities: Vec<usize>,
    pub pairs: Vec<ConductancePair>,
    /// Mean over all pairs with a defined value.
    pub average: Option<f64>,
}

/// Pairwise conductance among significant communities (or all, on request).
pub fn conductance_matrix(
    g: &InstanceGraph,
    p: &Partition,
    weighted: bool,
    include_insignificant: bool,
) -> Result<ConductanceReport> {
    check_cover(g, p)?;
    let communities: Vec<usize> = if include_insignificant {
        (0..p.community_count()).collect()
    } else {
        p.significant()
    };
    let flows = community_flows(g, p, weighted);
    let get = |x: usize, y: usize| flows.get(&(x, y)).copied().unwrap_or(0.0);
    let mut pairs = Vec::new();
    for (i, &a) in communities.iter().enumerate() {
        for &b in &communities[i + 1..] {
            pairs.push(ConductancePair {
                a,
                b,
                value: pair_conductance(get(a, a), get(b, b), get(a, b) + get(b, a)),
            });
        }
    }
    let defined: Vec<f64> = pairs.iter().filter_map(|p| p.value).collect();
    let average = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(ConductanceReport {
        weighted,
        communities,
        pairs,
        average,
    })
}

/// Reads a `label, community_id` file against `g`.
///
/// Returns the partition and the labels in the file that `g` does not know.
/// Nodes of `g` missing from the file are a validation error.
pub fn import_partition<R: BufRead>(
    reader: R,
    g: &InstanceGraph,
) -> Result<(Partition, Vec<String>)> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut assignment = vec![usize::MAX; g.node_count()];
    let mut unknown = Vec::new();
    for row in read_rows(reader, 2..=2)? {
        let next = ids.len();
        let c = *ids.entry(row.fields[1].clone()).or_insert(next);
        match g.node_index(&row.fields[0]) {
            Some(v) if assignment[v] != usize::MAX && assignment[v] != c => {
                return Err(Error::parse(
                    row.line,
                    format!("node `{}` assigned to two communities", row.fields[0]),
                ))
            }
            Some(v) => assignment[v] = c,
            None => unknown.push(row.fields[0].clone()),
        }
    }
    let missing: Vec<&str> = (0..g.node_count())
        .filter(|&v| assignment[v] == usize::MAX)
        .map(|v| g.label(v))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "partition misses {} node(s): {}",
            missing.len(),
            missing.join(", ")
        )));
    }
    Ok((Partition::from_assignment(&assignment, "imported"), unknown))
}

/// Writes `label\tcommunity` lines.
pub fn write_partition<W: Write>(g: &InstanceGraph, p: &Partition, mut w: W) -> Result<()> {
    writeln!(w, "# label\tcommunity")?;
    for v in 0..g.node_count() {
        writeln!(w, "{}\t{}", g.label(v), p.community_of(v))?;
    }
    Ok(())
}
