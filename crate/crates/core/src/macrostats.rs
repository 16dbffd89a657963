//! Macroscopic statistics of a directed instance graph.
//!
//! Statistics marked "undirected" are computed on the simple undirected view
//! (reciprocal arcs collapse into one edge). Weights are ignored throughout.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{components, InstanceGraph, NodeIdx, UndirectedGraph, WeightRule};

/// Flat record of structural statistics, one field per reported row.
///
/// Undefined statistics serialize as `null`. Mesoscale fields stay `None`
/// until filled in by community and core analyses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub reciprocity: Option<f64>,
    pub density: Option<f64>,
    pub avg_degree: Option<f64>,
    pub avg_in_degree: Option<f64>,
    pub pct_sources: Option<f64>,
    pub pct_sinks: Option<f64>,
    pub assortativity_undirected: Option<f64>,
    pub assortativity_directed: Option<f64>,
    pub avg_path_length: Option<f64>,
    pub diameter: Option<usize>,
    pub path_metrics_sampled: bool,
    pub transitivity: f64,
    pub clustering_restricted: f64,
    pub clustering_full: f64,
    pub scc_count: usize,
    pub wcc_count: usize,
    pub modularity_louvain_undirected: Option<f64>,
    pub communities_louvain_undirected: Option<usize>,
    pub significant_communities_louvain_undirected: Option<usize>,
    pub modularity_louvain_weighted: Option<f64>,
    pub communities_louvain_weighted: Option<usize>,
    pub significant_communities_louvain_weighted: Option<usize>,
    pub degeneracy_total: Option<usize>,
    pub degeneracy_in: Option<usize>,
    pub degeneracy_out: Option<usize>,
    pub innermost_core_size_total: Option<usize>,
    pub innermost_core_size_in: Option<usize>,
    pub innermost_core_size_out: Option<usize>,
}

impl StatsReport {
    /// Every numeric statistic in row order, for diffing.
    pub fn fields(&self) -> Vec<(&'static str, Option<f64>)> {
        let i = |v: usize| Some(v as f64);
        let oi = |v: Option<usize>| v.map(|x| x as f64);
        vec![
            ("node_count", i(self.node_count)),
            ("edge_count", i(self.edge_count)),
            ("reciprocity", self.reciprocity),
            ("density", self.density),
            ("avg_degree", self.avg_degree),
            ("avg_in_degree", self.avg_in_degree),
            ("pct_sources", self.pct_sources),
            ("pct_sinks", self.pct_sinks),
            ("assortativity_undirected", self.assortativity_undirected),
            ("assortativity_directed", self.assortativity_directed),
            ("avg_path_length", self.avg_path_length),
            ("diameter", oi(self.diameter)),
            ("transitivity", Some(self.transitivity)),
            ("clustering_restricted", Some(self.clustering_restricted)),
            ("clustering_full", Some(self.clustering_full)),
            ("scc_count", i(self.scc_count)),
            ("wcc_count", i(self.wcc_count)),
            (
                "modularity_louvain_undirected",
                self.modularity_louvain_undirected,
            ),
            (
                "communities_louvain_undirected",
                oi(self.communities_louvain_undirected),
            ),
            (
                "significant_communities_louvain_undirected",
                oi(self.significant_communities_louvain_undirected),
            ),
            (
                "modularity_louvain_weighted",
                self.modularity_louvain_weighted,
            ),
            (
                "communities_louvain_weighted",
                oi(self.communities_louvain_weighted),
            ),
            (
                "significant_communities_louvain_weighted",
                oi(self.significant_communities_louvain_weighted),
            ),
            ("degeneracy_total", oi(self.degeneracy_total)),
            ("degeneracy_in", oi(self.degeneracy_in)),
            ("degeneracy_out", oi(self.degeneracy_out)),
            (
                "innermost_core_size_total",
                oi(self.innermost_core_size_total),
            ),
            ("innermost_core_size_in", oi(self.innermost_core_size_in)),
            ("innermost_core_size_out", oi(self.innermost_core_size_out)),
        ]
    }
}

/// Fraction of arcs whose reverse arc also exists.
pub fn reciprocity(g: &InstanceGraph) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::UndefinedStatistic("reciprocity"));
    }
    let mutual = g.edges().filter(|&(s, t, _)| g.has_edge(t, s)).count();
    Ok(mutual as f64 / g.edge_count() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    /// Mean degree in the undirected view.
    pub avg_degree: f64,
    /// `|E| / n`.
    pub avg_in_degree: f64,
    pub pct_sources: f64,
    pub pct_sinks: f64,
    pub in_degrees: Vec<u64>,
    pub out_degrees: Vec<u64>,
    /// Undirected-view degrees.
    pub total_degrees: Vec<u64>,
}

pub fn degree_summary(g: &InstanceGraph) -> Result<DegreeSummary> {
    degree_summary_with(g, &g.undirected_view(WeightRule::Sum))
}

fn degree_summary_with(g: &InstanceGraph, u: &UndirectedGraph) -> Result<DegreeSummary> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::UndefinedStatistic("degree summary"));
    }
    let in_degrees: Vec<u64> = (0..n).map(|v| g.in_degree(v) as u64).collect();
    let out_degrees: Vec<u64> = (0..n).map(|v| g.out_degree(v) as u64).collect();
    let total_degrees: Vec<u64> = (0..n).map(|v| u.degree(v) as u64).collect();
    let sources = in_degrees.iter().filter(|&&d| d == 0).count();
    let sinks = out_degrees.iter().filter(|&&d| d == 0).count();
    Ok(DegreeSummary {
        avg_degree: 2.0 * u.edge_count() as f64 / n as f64,
        avg_in_degree: g.edge_count() as f64 / n as f64,
        pct_sources: sources as f64 / n as f64,
        pct_sinks: sinks as f64 / n as f64,
        in_degrees,
        out_degrees,
        total_degrees,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssortativityVariant {
    /// Arc-level correlation of `in + out` degrees at source and target.
    DirectedTotal,
    /// Edge-level correlation of undirected degrees, both orientations.
    Undirected,
}

/// Pearson degree correlation over edge endpoints; `None` when either
/// endpoint sequence is constant.
pub fn degree_assortativity(g: &InstanceGraph, variant: AssortativityVariant) -> Option<f64> {
    match variant {
        AssortativityVariant::Undirected => {
            undirected_assortativity(&g.undirected_view(WeightRule::Sum))
        }
        AssortativityVariant::DirectedTotal => {
            let deg: Vec<f64> = (0..g.node_count())
                .map(|v| (g.in_degree(v) + g.out_degree(v)) as f64)
                .collect();
            let pairs: Vec<(f64, f64)> = g.edges().map(|(s, t, _)| (deg[s], deg[t])).collect();
            pearson(&pairs)
        }
    }
}

fn undirected_assortativity(u: &UndirectedGraph) -> Option<f64> {
    let mut pairs = Vec::with_capacity(2 * u.edge_count());
    for (a, b, _) in u.edges() {
        let (da, db) = (u.degree(a) as f64, u.degree(b) as f64);
        pairs.push((da, db));
        pairs.push((db, da));
    }
    pearson(&pairs)
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let first = pairs.first()?;
    if pairs.iter().all(|p| p.0 == first.0) || pairs.iter().all(|p| p.1 == first.1) {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Hop distances on the undirected view of the largest weakly connected component.
    #[default]
    UndirectedLwcc,
    /// Hop distances along arcs, over all reachable ordered pairs.
    DirectedReachable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub mode: PathMode,
    /// Above this many candidate nodes, BFS runs from a seeded sample of sources.
    pub exact_max_nodes: usize,
    pub sample_sources: usize,
    pub seed: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            mode: PathMode::UndirectedLwcc,
            exact_max_nodes: 20_000,
            sample_sources: 1_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub avg_path_length: f64,
    pub diameter: usize,
    pub sampled: bool,
    pub sources: usize,
}

pub fn path_metrics(g: &InstanceGraph, cfg: &PathConfig) -> Result<PathMetrics> {
    match cfg.mode {
        PathMode::UndirectedLwcc => {
            let comps = components(g);
            let Some(largest) = comps.largest_wcc() else {
                return Err(Error::UndefinedStatistic("average path length"));
            };
            let sub = g.induced_subgraph(|v| comps.wcc[v] == largest);
            let u = sub.undirected_view(WeightRule::Sum);
            bfs_metrics(u.node_count(), cfg, |v| u.neighbors(v))
        }
        PathMode::DirectedReachable => bfs_metrics(g.node_count(), cfg, |v| g.out_neighbors(v)),
    }
}

fn bfs_metrics<'a, F>(n: usize, cfg: &PathConfig, neighbors: F) -> Result<PathMetrics>
where
    F: Fn(NodeIdx) -> &'a [NodeIdx],
{
    if n < 2 {
        return Err(Error::UndefinedStatistic("average path length"));
    }
    let sampled = n > cfg.exact_max_nodes && cfg.sample_sources < n;
    let sources: Vec<NodeIdx> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut s = index::sample(&mut rng, n, cfg.sample_sources).into_vec();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };

    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let mut touched = Vec::new();
    let (mut total, mut pairs, mut diameter) = (0u64, 0u64, 0u32);
    for &src in &sources {
        dist[src] = 0;
        touched.push(src);
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            for &w in neighbors(v) {
                if dist[w] == u32::MAX {
                    dist[w] = d + 1;
                    total += u64::from(d + 1);
                    pairs += 1;
                    diameter = diameter.max(d + 1);
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        for v in touched.drain(..) {
            dist[v] = u32::MAX;
        }
    }
    if pairs == 0 {
        return Err(Error::UndefinedStatistic("average path length"));
    }
    Ok(PathMetrics {
        avg_path_length: total as f64 / pairs as f64,
        diameter: diameter as usize,
        sampled,
        sources: sources.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriadicStats {
    pub transitivity: f64,
    pub clustering_restricted: f64,
    pub clustering_full: f64,
}

/// Transitivity and average local clustering on the undirected view.
pub fn triadic_stats(g: &InstanceGraph) -> TriadicStats {
    triadic_stats_undirected(&g.undirected_view(WeightRule::Sum))
}

fn triadic_stats_undirected(u: &UndirectedGraph) -> TriadicStats {
    let n = u.node_count();
    let triangles = triangles_per_node(u);
    let (mut closed, mut triads) = (0u64, 0u64);
    let (mut local_sum, mut eligible) = (0.0, 0usize);
    for v in 0..n {
        let d = u.degree(v) as u64;
        if d < 2 {
            continue;
        }
        let pairs = d * (d - 1) / 2;
        triads += pairs;
        closed += triangles[v];
        local_sum += triangles[v] as f64 / pairs as f64;
        eligible += 1;
    }
    // `closed` counts each triangle once per corner, i.e. 3 * #triangles.
    TriadicStats {
        transitivity: if triads == 0 {
            0.0
        } else {
            closed as f64 / triads as f64
        },
        clustering_restricted: if eligible == 0 {
            0.0
        } else {
            local_sum / eligible as f64
        },
        clustering_full: if n == 0 { 0.0 } else { local_sum / n as f64 },
    }
}

/// Triangles through each node, by marking neighborhoods.
fn triangles_per_node(u: &UndirectedGraph) -> Vec<u64> {
    let n = u.node_count();
    let mut count = vec![0u64; n];
    let mut mark = vec![usize::MAX; n];
    for v in 0..n {
        for &w in u.neighbors(v) {
            mark[w] = v;
        }
        for &w in u.neighbors(v) {
            if w <= v {
                continue;
            }
            for &x in u.neighbors(w) {
                if x > w && mark[x] == v {
                    count[v] += 1;
                    count[w] += 1;
                    count[x] += 1;
                }
            }
        }
    }
    count
}

/// `(k, knn(k))` for every degree `k >= 1` present in the undirected view.
pub fn knn_distribution(g: &InstanceGraph) -> Vec<(usize, f64)> {
    knn_undirected(&g.undirected_view(WeightRule::Sum))
}

fn knn_undirected(u: &UndirectedGraph) -> Vec<(usize, f64)> {
    let mut by_degree: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for v in 0..u.node_count() {
        let k = u.degree(v);
        if k == 0 {
            continue;
        }
        let sum: usize = u.neighbors(v).iter().map(|&w| u.degree(w)).sum();
        let e = by_degree.entry(k).or_insert((0.0, 0));
        e.0 += sum as f64 / k as f64;
        e.1 += 1;
    }
    by_degree
        .into_iter()
        .map(|(k, (s, c))| (k, s / c as f64))
        .collect()
}

/// Computes every macroscopic field of a [`StatsReport`].
pub fn stats_report(g: &InstanceGraph, paths: &PathConfig) -> StatsReport {
    let n = g.node_count();
    let u = g.undirected_view(WeightRule::Sum);
    let comps = components(g);
    let degrees = degree_summary_with(g, &u).ok();
    let path = path_metrics(g, paths).ok();
    let tri = triadic_stats_undirected(&u);
    StatsReport {
        node_count: n,
        edge_count: g.edge_count(),
        reciprocity: reciprocity(g).ok(),
        density: (n >= 2).then(|| g.edge_count() as f64 / (n as f64 * (n - 1) as f64)),
        avg_degree: degrees.as_ref().map(|d| d.avg_degree),
        avg_in_degree: degrees.as_ref().map(|d| d.avg_in_degree),
        pct_sources: degrees.as_ref().map(|d| d.pct_sources),
        pct_sinks: degrees.as_ref().map(|d| d.pct_sinks),
        assortativity_undirected: undirected_assortativity(&u),
        assortativity_directed: degree_assortativity(g, AssortativityVariant::DirectedTotal),
        avg_path_length: path.map(|p| p.avg_path_length),
        diameter: path.map(|p| p.diameter),
        path_metrics_sampled: path.is_some_and(|p| p.sampled),
        transitivity: tri.transitivity,
        clustering_restricted: tri.clustering_restricted,
        clustering_full: tri.clustering_full,
        scc_count: comps.scc_count,
        wcc_count: comps.wcc_count,
        ..StatsReport::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeRecord};

    fn g(edges: &[(&str, &str)]) -> InstanceGraph {
        build_graph(
            edges.iter().map(|&(s, t)| EdgeRecord::unweighted(s, t)),
            None,
        )
        .unwrap()
        .0
    }

    fn sym(edges: &[(&str, &str)]) -> InstanceGraph {
        let both: Vec<(&str, &str)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        g(&both)
    }

    #[test]
    fn reciprocity_cases() {
        assert_eq!(reciprocity(&g(&[("a", "b"), ("b", "a")])).unwrap(), 1.0);
        assert_eq!(reciprocity(&g(&[("a", "b")])).unwrap(), 0.0);
        let r = reciprocity(&g(&[("a", "b"), ("b", "a"), ("b", "c")])).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
        let empty = InstanceGraph::empty_with_labels(vec!["a".into()]);
        assert!(matches!(
            reciprocity(&empty),
            Err(Error::UndefinedStatistic(_))
        ));
    }

    #[test]
    fn sources_and_sinks() {
        let d = degree_summary(&g(&[("a", "b"), ("b", "c")])).unwrap();
        assert!((d.pct_sources - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.pct_sinks - 1.0 / 3.0).abs() < 1e-15);

        let d = degree_summary(&g(&[("a", "b"), ("b", "a")])).unwrap();
        assert_eq!(
            (d.pct_sources, d.pct_sinks, d.avg_in_degree),
            (0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn assortativity_path_and_star() {
        let p3 = g(&[("a", "b"), ("b", "c")]);
        let r = degree_assortativity(&p3, AssortativityVariant::Undirected).unwrap();
        assert!((r + 1.0).abs() < 1e-12, "{r}");

        let star = sym(&[("h", "a"), ("h", "b"), ("h", "c")]);
        let r = degree_assortativity(&star, AssortativityVariant::Undirected).unwrap();
        assert!((r + 1.0).abs() < 1e-12, "{r}");
        let out_star = g(&[("h", "a"), ("h", "b"), ("h", "c")]);
        assert_eq!(
            degree_assortativity(&out_star, AssortativityVariant::DirectedTotal),
            None
        );
    }

    #[test]
    fn path_cases() {
        let p = path_metrics(&g(&[("a", "b"), ("b", "c")]), &PathConfig::default()).unwrap();
        assert!((p.avg_path_length - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.diameter, 2);

        let cyc = g(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        let cfg = PathConfig {
            mode: PathMode::DirectedReachable,
            ..PathConfig::default()
        };
        let p = path_metrics(&cyc, &cfg).unwrap();
        assert_eq!((p.avg_path_length, p.diameter), (2.0, 3));

        let single = InstanceGraph::empty_with_labels(vec!["a".into()]);
        assert!(path_metrics(&single, &PathConfig::default()).is_err());
    }

    #[test]
    fn path_sampling_is_flagged() {
        let ring: Vec<(String, String)> = (0..40)
            .map(|i| (i.to_string(), ((i + 1) % 40).to_string()))
            .collect();
        let ring = build_graph(
            ring.iter()
                .map(|(a, b)| EdgeRecord::unweighted(a.as_str(), b.as_str())),
            None,
        )
        .unwrap()
        .0;
        let cfg = PathConfig {
            exact_max_nodes: 10,
            sample_sources: 5,
            seed: 7,
            ..PathConfig::default()
        };
        let p = path_metrics(&ring, &cfg).unwrap();
        assert!(p.sampled);
        assert_eq!(p.sources, 5);
        // vertex-transitive: sampled sources see the exact answer
        assert_eq!(p.diameter, 20);
        assert_eq!(p, path_metrics(&ring, &cfg).unwrap());
    }

    #[test]
    fn triangle_and_star_triads() {
        let t = triadic_stats(&g(&[("a", "b"), ("b", "c"), ("c", "a")]));
        assert_eq!(
            (t.transitivity, t.clustering_restricted, t.clustering_full),
            (1.0, 1.0, 1.0)
        );
        let s = triadic_stats(&g(&[("h", "a"), ("h", "b"), ("h", "c")]));
        assert_eq!(
            (s.transitivity, s.clustering_restricted, s.clustering_full),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn knn_star_and_ring() {
        let star = g(&[("h", "a"), ("h", "b"), ("h", "c"), ("h", "d")]);
        assert_eq!(knn_distribution(&star), vec![(1, 4.0), (4, 1.0)]);
        let ring = g(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        assert_eq!(knn_distribution(&ring), vec![(2, 2.0)]);
    }

    #[test]
    fn report_density_and_serialization() {
        let r = stats_report(
            &g(&[("a", "b"), ("b", "a"), ("b", "c")]),
            &PathConfig::default(),
        );
        assert_eq!(r.node_count, 3);
        assert!((r.density.unwrap() - 0.5).abs() < 1e-15);
        let json = serde_json::to_string(&r).unwrap();
        let back: StatsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(json.contains("\"clustering_full\""));
    }
}
