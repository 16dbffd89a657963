use instnet::coredecomp::{core_decomposition, core_link_profile, innermost_core, CoreVariant};
use instnet::graph::{build_graph, EdgeRecord};
use instnet::InstanceGraph;
use instnet_testkit::gen::gnp_directed;
use instnet_testkit::oracle::{self, CoreKind};

fn kind(v: CoreVariant) -> CoreKind {
    match v {
        CoreVariant::Total => CoreKind::Total,
        CoreVariant::In => CoreKind::In,
        CoreVariant::Out => CoreKind::Out,
    }
}

fn undirected(pairs: &[(&str, &str)]) -> InstanceGraph {
    build_graph(
        pairs
            .iter()
            .flat_map(|&(a, b)| [EdgeRecord::unweighted(a, b), EdgeRecord::unweighted(b, a)]),
        None,
    )
    .unwrap()
    .0
}

#[test]
fn all_variants_match_deletion_oracle() {
    let mut mismatches = 0;
    for seed in 0..200u64 {
        let n = 5 + (seed as usize % 56);
        let p = 0.02 + 0.3 * ((seed % 10) as f64 / 10.0);
        let g = gnp_directed(n, p, 1, seed).unwrap();
        for v in CoreVariant::ALL {
            let got = core_decomposition(&g, v);
            let want = oracle::coreness(&g, kind(v)).unwrap();
            mismatches += got
                .coreness
                .iter()
                .zip(&want)
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(got.degeneracy, want.iter().copied().max().unwrap_or(0));
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn k4_cores() {
    let g = undirected(&[
        ("a", "b"),
        ("a", "c"),
        ("a", "d"),
        ("b", "c"),
        ("b", "d"),
        ("c", "d"),
    ]);
    let c = core_decomposition(&g, CoreVariant::Total);
    assert_eq!(c.coreness, vec![3; 4]);
    assert_eq!(c.degeneracy, 3);
    assert_eq!(oracle::coreness(&g, CoreKind::Total).unwrap(), vec![3; 4]);
    assert_eq!(innermost_core(&g, &c).node_count(), 4);
}

#[test]
fn k4_with_pendant() {
    let g = undirected(&[
        ("a", "b"),
        ("a", "c"),
        ("a", "d"),
        ("b", "c"),
        ("b", "d"),
        ("c", "d"),
        ("d", "e"),
    ]);
    let c = core_decomposition(&g, CoreVariant::Total);
    let inner = innermost_core(&g, &c);
    assert_eq!(inner.node_count(), 4);
    assert!(inner.node_index("e").is_none());
}

#[test]
fn star_cores() {
    let g = undirected(&[("h", "a"), ("h", "b"), ("h", "c"), ("h", "d"), ("h", "e")]);
    let c = core_decomposition(&g, CoreVariant::Total);
    assert_eq!(c.coreness, vec![1; 6]);
    assert_eq!(c.degeneracy, 1);
}

#[test]
fn leaf_to_hub_profile() {
    let g = build_graph(
        ["a", "b", "c"]
            .iter()
            .map(|l| EdgeRecord::unweighted(*l, "hub")),
        None,
    )
    .unwrap()
    .0;
    let c = core_decomposition(&g, CoreVariant::Total);
    let prof = core_link_profile(&g, &c);
    assert_eq!(prof.rows[1].in_links, 3);
    assert_eq!(prof.rows[1].out_links, 3);
}

#[test]
fn profile_matches_tally_oracle() {
    for seed in 0..30u64 {
        let g = gnp_directed(40, 0.1, 3, seed).unwrap();
        for v in CoreVariant::ALL {
            let c = core_decomposition(&g, v);
            let prof = core_link_profile(&g, &c);
            let mut ins = vec![0usize; c.degeneracy + 1];
            let mut outs = vec![0usize; c.degeneracy + 1];
            for (s, t, _) in g.edges() {
                ins[c.coreness[t]] += 1;
                outs[c.coreness[s]] += 1;
            }
            assert_eq!(
                prof.rows.iter().map(|r| r.in_links).collect::<Vec<_>>(),
                ins
            );
            assert_eq!(
                prof.rows.iter().map(|r| r.out_links).collect::<Vec<_>>(),
                outs
            );
            assert_eq!(ins.iter().sum::<usize>(), g.edge_count());
        }
    }
}
