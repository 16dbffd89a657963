//! Instance-level network models derived from user-level follow records.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, GraphBuilder, InstanceGraph, NodeMeta, Platform, Status};

/// `source_user@source_instance` follows `target_user@target_instance`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserEdgeRecord {
    pub source_user: String,
    pub source_instance: String,
    pub target_user: String,
    pub target_instance: String,
}

impl UserEdgeRecord {
    pub fn new(su: &str, si: &str, tu: &str, ti: &str) -> Self {
        UserEdgeRecord {
            source_user: su.into(),
            source_instance: si.into(),
            target_user: tu.into(),
            target_instance: ti.into(),
        }
    }
}

/// What an instance-to-instance weight counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Distinct `(follower, followee)` user pairs.
    #[default]
    DistinctUserPairs,
    /// Distinct followers in the source instance.
    DistinctSourceUsers,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub records: usize,
    pub intra_instance_dropped: usize,
    pub duplicates_ignored: usize,
}

/// Collapses user-level follows into the weighted instance graph.
///
/// Arc `(i, j)` exists iff some user of `i` follows some user of `j` with
/// `i != j`; its weight counts distinct user pairs (or distinct followers,
/// per `mode`). Instances only seen in intra-instance records get no node.
pub fn project_to_instances<I>(
    records: I,
    mode: WeightMode,
) -> Result<(InstanceGraph, ProjectionStats)>
where
    I: IntoIterator<Item = UserEdgeRecord>,
{
    let mut b = GraphBuilder::new();
    let mut users: HashMap<(usize, String), u32> = HashMap::new();
    let mut seen: HashSet<(u32, u64)> = HashSet::new();
    let mut stats = ProjectionStats::default();

    for (pos, r) in records.into_iter().enumerate() {
        stats.records += 1;
        if [
            &r.source_user,
            &r.source_instance,
            &r.target_user,
            &r.target_instance,
        ]
        .iter()
        .any(|f| f.is_empty())
        {
            return Err(Error::Validation(format!(
                "record {}: empty field",
                pos + 1
            )));
        }
        if r.source_instance == r.target_instance {
            stats.intra_instance_dropped += 1;
            continue;
        }
        let si = b.node(&r.source_instance);
        let ti = b.node(&r.target_instance);
        let mut intern = |inst: usize, user: String| {
            let next = users.len() as u32;
            *users.entry((inst, user)).or_insert(next)
        };
        let su = intern(si, r.source_user);
        let key = match mode {
            WeightMode::DistinctUserPairs => (su, intern(ti, r.target_user) as u64),
            WeightMode::DistinctSourceUsers => (su, ti as u64),
        };
        if seen.insert(key) {
            b.add_arc(si, ti, 1.0);
        } else {
            stats.duplicates_ignored += 1;
        }
    }
    Ok((b.build().0, stats))
}

/// Subgraph induced by online nodes. Unknown status counts as offline.
///
/// With `drop_isolated`, online nodes left without any arc are removed too.
pub fn online_subnetwork(g: &InstanceGraph, drop_isolated: bool) -> Result<InstanceGraph> {
    if g.metas().iter().all(|m| m.status == Status::Unknown) {
        return Err(Error::Config(
            "no node carries status metadata; cannot select online instances".into(),
        ));
    }
    let online = g.induced_subgraph(|v| g.meta(v).status == Status::Online);
    Ok(if drop_isolated {
        online.without_isolated()
    } else {
        online
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStats {
    pub boundary_records: usize,
    pub new_nodes: usize,
    pub new_edges: usize,
    /// Boundary arcs between two existing nodes that were already present.
    pub already_present: usize,
}

/// Extends a Mastodon instance graph with boundary arcs to other platforms.
///
/// Each boundary arc must touch at least one node of `g`; arcs between two
/// outside nodes are rejected. New nodes are tagged `platform = other`.
/// Arcs between two existing nodes are added only if absent from `g`.
pub fn expanded_network<I>(
    g: &InstanceGraph,
    boundary: I,
) -> Result<(InstanceGraph, ExpansionStats)>
where
    I: IntoIterator<Item = EdgeRecord>,
{
    let mut b = GraphBuilder::new();
    for v in 0..g.node_count() {
        let idx = b.node(g.label(v));
        b.set_meta(idx, g.meta(v));
    }
    for (s, t, w) in g.edges() {
        b.add_arc(s, t, w);
    }

    let mut stats = ExpansionStats::default();
    let mut offenders = Vec::new();
    let mut added = HashSet::new();
    for r in boundary {
        stats.boundary_records += 1;
        let w = r.weight.unwrap_or(1.0);
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Validation(format!(
                "boundary arc {} -> {}: weight must be positive",
                r.source, r.target
            )));
        }
        let (s_in, t_in) = (g.node_index(&r.source), g.node_index(&r.target));
        match (s_in, t_in) {
            (None, None) => {
                offenders.push(format!("{} -> {}", r.source, r.target));
                continue;
            }
            (Some(s), Some(t)) if g.has_edge(s, t) => {
                stats.already_present += 1;
                continue;
            }
            _ => {}
        }
        let mut endpoint = |label: &str| {
            let known = b.contains(label);
            let v = b.node(label);
            if !known {
                stats.new_nodes += 1;
                b.set_meta(
                    v,
                    NodeMeta {
                        status: Status::Unknown,
                        platform: Platform::Other,
                    },
                );
            }
            v
        };
        let s = endpoint(&r.source);
        let t = endpoint(&r.target);
        if s != t {
            added.insert((s, t));
        }
        b.add_arc(s, t, w);
    }

    if !offenders.is_empty() {
        const SHOWN: usize = 20;
        let mut msg = format!(
            "{} boundary arc(s) have no endpoint in the Mastodon node set: {}",
            offenders.len(),
            offenders[..offenders.len().min(SHOWN)].join(", ")
        );
        if offenders.len() > SHOWN {
            msg.push_str(&format!(", ... and {} more", offenders.len() - SHOWN));
        }
        return Err(Error::Validation(msg));
    }
    stats.new_edges = added.len();
    Ok((b.build().0, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, MetaRecord};

    fn rec(su: &str, si: &str, tu: &str, ti: &str) -> UserEdgeRecord {
        UserEdgeRecord::new(su, si, tu, ti)
    }

    #[test]
    fn multiplicity_counts_users() {
        let (g, _) = project_to_instances(
            vec![rec("u1", "A", "v", "B"), rec("u2", "A", "v", "B")],
            WeightMode::DistinctUserPairs,
        )
        .unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 2.0)]);
    }

    #[test]
    fn intra_instance_dropped() {
        let (g, stats) =
            project_to_instances(vec![rec("u", "A", "v", "A")], WeightMode::default()).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(stats.intra_instance_dropped, 1);
    }

    #[test]
    fn duplicates_counted_once() {
        let (g, stats) = project_to_instances(
            vec![rec("u", "A", "v", "B"), rec("u", "A", "v", "B")],
            WeightMode::default(),
        )
        .unwrap();
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(stats.duplicates_ignored, 1);
    }

    #[test]
    fn same_hash_on_different_instances_are_different_users() {
        let (g, _) = project_to_instances(
            vec![rec("u", "A", "v", "C"), rec("u", "B", "v", "C")],
            WeightMode::default(),
        )
        .unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn distinct_source_users_mode() {
        let recs = vec![
            rec("u", "A", "v1", "B"),
            rec("u", "A", "v2", "B"),
            rec("w", "A", "v1", "B"),
        ];
        let (pairs, _) = project_to_instances(recs.clone(), WeightMode::DistinctUserPairs).unwrap();
        let (srcs, _) = project_to_instances(recs, WeightMode::DistinctSourceUsers).unwrap();
        assert_eq!(pairs.weight(0, 1), Some(3.0));
        assert_eq!(srcs.weight(0, 1), Some(2.0));
    }

    fn with_status(edges: &[(&str, &str)], status: &[(&str, Status)]) -> InstanceGraph {
        let meta: Vec<MetaRecord> = status
            .iter()
            .map(|&(l, s)| MetaRecord {
                label: l.into(),
                meta: NodeMeta {
                    status: s,
                    platform: Platform::Mastodon,
                },
            })
            .collect();
        build_graph(
            edges.iter().map(|&(s, t)| EdgeRecord::unweighted(s, t)),
            Some(&meta),
        )
        .unwrap()
        .0
    }

    #[test]
    fn online_filter() {
        let g = with_status(
            &[("A", "B"), ("B", "C")],
            &[
                ("A", Status::Online),
                ("B", Status::Online),
                ("C", Status::Offline),
            ],
        );
        let on = online_subnetwork(&g, false).unwrap();
        assert_eq!(on.node_count(), 2);
        assert_eq!(on.edge_count(), 1);
        assert!(on.has_edge(0, 1));

        let off = with_status(
            &[("A", "B")],
            &[("A", Status::Offline), ("B", Status::Offline)],
        );
        let on = online_subnetwork(&off, false).unwrap();
        assert_eq!(on.node_count() + on.edge_count(), 0);
    }

    #[test]
    fn online_drops_isolated_on_request() {
        let g = with_status(
            &[("A", "B"), ("B", "C")],
            &[
                ("A", Status::Offline),
                ("B", Status::Online),
                ("C", Status::Offline),
                ("D", Status::Online),
            ],
        );
        assert_eq!(online_subnetwork(&g, false).unwrap().node_count(), 2);
        assert_eq!(online_subnetwork(&g, true).unwrap().node_count(), 0);
    }

    #[test]
    fn online_requires_status() {
        let (g, _) = build_graph([EdgeRecord::unweighted("A", "B")], None).unwrap();
        assert!(matches!(
            online_subnetwork(&g, false),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn expansion_adds_other_platform() {
        let (g, _) = build_graph([EdgeRecord::unweighted("A", "B")], None).unwrap();
        let (x, stats) = expanded_network(&g, [EdgeRecord::unweighted("A", "X")]).unwrap();
        assert_eq!(x.node_count(), 3);
        let xi = x.node_index("X").unwrap();
        assert_eq!(x.meta(xi).platform, Platform::Other);
        assert_eq!(stats.new_nodes, 1);
        assert_eq!(stats.new_edges, 1);
    }

    #[test]
    fn expansion_rejects_outside_arcs() {
        let (g, _) = build_graph([EdgeRecord::unweighted("A", "B")], None).unwrap();
        let err = expanded_network(
            &g,
            [
                EdgeRecord::unweighted("X", "Y"),
                EdgeRecord::unweighted("A", "Z"),
            ],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("X -> Y"), "{msg}");
        assert!(!msg.contains("A -> Z"), "{msg}");
    }

    #[test]
    fn expansion_keeps_existing_weights() {
        let (g, _) = build_graph([EdgeRecord::new("A", "B", 4.0)], None).unwrap();
        let (x, stats) = expanded_network(&g, [EdgeRecord::new("A", "B", 9.0)]).unwrap();
        assert_eq!(x.weight(0, 1), Some(4.0));
        assert_eq!(stats.already_present, 1);
    }
}
