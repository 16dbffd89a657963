//! k-core decomposition by bucket peeling.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{InstanceGraph, NodeIdx, WeightRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreVariant {
    /// Degree in the undirected view.
    Total,
    In,
    Out,
}

impl CoreVariant {
    pub const ALL: [CoreVariant; 3] = [CoreVariant::Total, CoreVariant::In, CoreVariant::Out];

    pub fn name(self) -> &'static str {
        match self {
            CoreVariant::Total => "total",
            CoreVariant::In => "in",
            CoreVariant::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorenessMap {
    pub variant: CoreVariant,
    pub coreness: Vec<usize>,
    pub degeneracy: usize,
}

impl CorenessMap {
    /// Nodes of the k-core.
    pub fn core(&self, k: usize) -> Vec<NodeIdx> {
        (0..self.coreness.len())
            .filter(|&v| self.coreness[v] >= k)
            .collect()
    }
}

/// Coreness of every node for the given variant, in `O(|V| + |E|)`.
///
/// For the in-variant, removing `v` lowers the in-degree of the nodes `v`
/// points to; for the out-variant, the out-degree of the nodes pointing to `v`.
pub fn core_decomposition(g: &InstanceGraph, variant: CoreVariant) -> CorenessMap {
    let n = g.node_count();
    let coreness = match variant {
        CoreVariant::Total => {
            let u = g.undirected_view(WeightRule::Sum);
            peel(n, |v| u.degree(v), |v| u.neighbors(v))
        }
        CoreVariant::In => peel(n, |v| g.in_degree(v), |v| g.out_neighbors(v)),
        CoreVariant::Out => peel(n, |v| g.out_degree(v), |v| g.in_neighbors(v)),
    };
    let degeneracy = coreness.iter().copied().max().unwrap_or(0);
    CorenessMap {
        variant,
        coreness,
        degeneracy,
    }
}

/// Batagelj–Zaversnik peeling. `affected(v)` lists the nodes whose degree
/// drops by one when `v` is removed.
fn peel<'a, D, A>(n: usize, degree: D, affected: A) -> Vec<usize>
where
    D: Fn(NodeIdx) -> usize,
    A: Fn(NodeIdx) -> &'a [NodeIdx],
{
    let mut deg: Vec<usize> = (0..n).map(&degree).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // nodes sorted by degree, with `start[d]` the first slot of degree d
    let mut start = vec![0usize; max_deg + 2];
    for &d in &deg {
        start[d + 1] += 1;
    }
    for d in 0..=max_deg {
        start[d + 1] += start[d];
    }
    let mut order = vec![0; n];
    let mut pos = vec![0; n];
    let mut fill = start.clone();
    for v in 0..n {
        pos[v] = fill[deg[v]];
        order[pos[v]] = v;
        fill[deg[v]] += 1;
    }

    for i in 0..n {
        let v = order[i];
        for &u in affected(v) {
            if deg[u] > deg[v] {
                // swap u with the first node of its bucket, then shrink the bucket
                let du = deg[u];
                let first = start[du];
                let w = order[first];
                if w != u {
                    order.swap(pos[u], first);
                    pos[w] = pos[u];
                    pos[u] = first;
                }
                start[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// The k-core for `k` equal to the degeneracy.
pub fn innermost_core(g: &InstanceGraph, cmap: &CorenessMap) -> InstanceGraph {
    let k = cmap.degeneracy;
    g.induced_subgraph(|v| cmap.coreness[v] >= k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreLinks {
    pub core_index: usize,
    /// Arcs whose target has this coreness.
    pub in_links: usize,
    /// Arcs whose source has this coreness.
    pub out_links: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreLinkProfile {
    pub variant: CoreVariant,
    /// How arcs are attributed to core indices.
    pub attribution: String,
    pub rows: Vec<CoreLinks>,
    /// Fraction of arcs with at least one endpoint in the innermost core.
    pub innermost_edge_fraction: Option<f64>,
}

/// Incoming and outgoing arc counts per core index.
pub fn core_link_profile(g: &InstanceGraph, cmap: &CorenessMap) -> CoreLinkProfile {
    let k = cmap.degeneracy;
    let mut rows: Vec<CoreLinks> = (0..=k)
        .map(|c| CoreLinks {
            core_index: c,
            in_links: 0,
            out_links: 0,
        })
        .collect();
    let mut touching = 0usize;
    for (s, t, _) in g.edges() {
        rows[cmap.coreness[t]].in_links += 1;
        rows[cmap.coreness[s]].out_links += 1;
        if cmap.coreness[s] == k || cmap.coreness[t] == k {
            touching += 1;
        }
    }
    let m = g.edge_count();
    CoreLinkProfile {
        variant: cmap.variant,
        attribution: "in: target coreness; out: source coreness".into(),
        rows,
        innermost_edge_fraction: (m > 0).then(|| touching as f64 / m as f64),
    }
}

/// Writes `label\tcoreness` lines.
pub fn write_coreness<W: Write>(g: &InstanceGraph, cmap: &CorenessMap, mut w: W) -> Result<()> {
    writeln!(w, "# label\tcoreness_{}", cmap.variant.name())?;
    for v in 0..g.node_count() {
        writeln!(w, "{}\t{}", g.label(v), cmap.coreness[v])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeRecord};

    fn digraph(arcs: &[(&str, &str)]) -> InstanceGraph {
        build_graph(
            arcs.iter().map(|&(s, t)| EdgeRecord::unweighted(s, t)),
            None,
        )
        .unwrap()
        .0
    }

    fn k4_plus_pendant(pendant: bool) -> InstanceGraph {
        let mut arcs = vec![];
        for s in ["a", "b", "c", "d"] {
            for t in ["a", "b", "c", "d"] {
                if s < t {
                    arcs.push((s, t));
                }
            }
        }
        if pendant {
            arcs.push(("e", "a"));
        }
        digraph(&arcs)
    }

    #[test]
    fn complete_graph() {
        let g = k4_plus_pendant(false);
        let c = core_decomposition(&g, CoreVariant::Total);
        assert_eq!(c.coreness, vec![3; 4]);
        assert_eq!(c.degeneracy, 3);
        assert_eq!(innermost_core(&g, &c).node_count(), 4);
    }

    #[test]
    fn pendant_left_out_of_innermost() {
        let g = k4_plus_pendant(true);
        let c = core_decomposition(&g, CoreVariant::Total);
        let inner = innermost_core(&g, &c);
        assert_eq!(inner.node_count(), 4);
        assert!(inner.node_index("e").is_none());
    }

    #[test]
    fn star() {
        let g = digraph(&[("h", "1"), ("h", "2"), ("h", "3"), ("h", "4"), ("h", "5")]);
        let c = core_decomposition(&g, CoreVariant::Total);
        assert_eq!(c.coreness, vec![1; 6]);
        assert_eq!(c.degeneracy, 1);
    }

    #[test]
    fn directed_variants() {
        // a <-> b, both point to c
        let g = digraph(&[("a", "b"), ("b", "a"), ("a", "c"), ("b", "c")]);
        let (a, b, cc) = (0, 1, 2);
        let cin = core_decomposition(&g, CoreVariant::In);
        // in-degrees: a1 b1 c2; {a,b,c} all have in-degree >= 1, c keeps 2
        assert_eq!(
            (cin.coreness[a], cin.coreness[b], cin.coreness[cc]),
            (1, 1, 1)
        );
        let cout = core_decomposition(&g, CoreVariant::Out);
        // out-degrees: a2 b2 c0; removing c leaves a and b with out-degree 1
        assert_eq!(
            (cout.coreness[a], cout.coreness[b], cout.coreness[cc]),
            (1, 1, 0)
        );
    }

    #[test]
    fn profile_conserves_edges() {
        let g = digraph(&[("1", "h"), ("2", "h"), ("3", "h")]);
        let c = core_decomposition(&g, CoreVariant::Total);
        let p = core_link_profile(&g, &c);
        assert_eq!(p.rows[1].in_links, 3);
        assert_eq!(p.rows[1].out_links, 3);
        assert_eq!(p.innermost_edge_fraction, Some(1.0));
    }
}
