use std::collections::BTreeMap;
use std::io::Write;

use instnet::backbone::{prune, significance, write_significance, BackboneModel};
use instnet::coredecomp::{
    core_decomposition, core_link_profile, write_coreness, CoreLinkProfile, CoreVariant,
};
use instnet::distfit::{
    ccdf, fit_lognormal, fit_powerlaw, fit_reference, Family, FitConfig, FitResult, Interval,
};
use instnet::io::write_edge_list;
use instnet::macrostats::{knn_distribution, stats_report, PathConfig, PathMode, StatsReport};
use instnet::mesoscale::{
    conductance_matrix, import_partition, louvain, modularity, write_partition, ConductanceReport,
    ModularityVariant, Partition, SIGNIFICANT_SIZE,
};
use instnet::ranking::{
    compare_networks, fagin_intersection, kendall_tau, pagerank, write_ranking, DiffTable,
    PageRankConfig, RankedList, TIE_BREAK,
};
use instnet::InstanceGraph;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bundle::{alpha_tag, Bundle};
use crate::config::PipelineConfig;
use crate::error::CliResult;
use crate::networks::{open, Networks};

/// One step of the pipeline, runnable alone or as part of `report`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Stats,
    Fit,
    Communities,
    Cores,
    Backbone,
    Rank,
    Compare,
}

impl Stage {
    pub const REPORT: [Stage; 8] = [
        Stage::Ingest,
        Stage::Stats,
        Stage::Fit,
        Stage::Communities,
        Stage::Cores,
        Stage::Backbone,
        Stage::Rank,
        Stage::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Stats => "stats",
            Stage::Fit => "fit",
            Stage::Communities => "communities",
            Stage::Cores => "cores",
            Stage::Backbone => "backbone",
            Stage::Rank => "rank",
            Stage::Compare => "compare",
        }
    }
}

/// State shared by the stages of one run.
pub struct Context<'a> {
    pub cfg: &'a PipelineConfig,
    pub nets: Networks,
    stats: BTreeMap<&'static str, StatsReport>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a PipelineConfig, nets: Networks) -> Self {
        Context {
            cfg,
            nets,
            stats: BTreeMap::new(),
        }
    }

    fn path_config(&self) -> PathConfig {
        PathConfig {
            mode: PathMode::UndirectedLwcc,
            exact_max_nodes: self.cfg.exact_paths_max,
            sample_sources: self.cfg.path_sources,
            seed: self.cfg.seed,
        }
    }

    /// Statistics of every network, computed on first use.
    fn ensure_stats(&mut self) {
        let missing: Vec<(&'static str, &InstanceGraph)> = self
            .nets
            .all()
            .into_iter()
            .filter(|(n, _)| !self.stats.contains_key(n))
            .collect();
        let paths = self.path_config();
        let seed = self.cfg.seed;
        let fresh: Vec<(&'static str, StatsReport)> = missing
            .into_par_iter()
            .map(|(n, g)| (n, network_stats(g, &paths, seed)))
            .collect();
        self.stats.extend(fresh);
    }

    pub fn run(&mut self, stage: Stage, bundle: &mut Bundle) -> CliResult<()> {
        match stage {
            Stage::Ingest => ingest(self, bundle),
            Stage::Stats => stats(self, bundle),
            Stage::Fit => fits(self, bundle),
            Stage::Communities => communities(self, bundle),
            Stage::Cores => cores(self, bundle),
            Stage::Backbone => backbones(self, bundle),
            Stage::Rank => rank(self, bundle),
            Stage::Compare => compare(self, bundle),
        }
    }
}

/// Macroscopic statistics plus the community and core fields.
pub fn network_stats(g: &InstanceGraph, paths: &PathConfig, seed: u64) -> StatsReport {
    let mut r = stats_report(g, paths);
    if let Ok(l) = louvain(g, ModularityVariant::UndirectedUnweighted, seed) {
        r.modularity_louvain_undirected = Some(l.score.value);
        r.communities_louvain_undirected = Some(l.partition.community_count());
        r.significant_communities_louvain_undirected = Some(l.partition.significant().len());
    }
    if let Ok(l) = louvain(g, ModularityVariant::DirectedWeighted, seed) {
        r.modularity_louvain_weighted = Some(l.score.value);
        r.communities_louvain_weighted = Some(l.partition.community_count());
        r.significant_communities_louvain_weighted = Some(l.partition.significant().len());
    }
    if g.node_count() > 0 {
        let [t, i, o] = CoreVariant::ALL.map(|v| core_decomposition(g, v));
        r.degeneracy_total = Some(t.degeneracy);
        r.degeneracy_in = Some(i.degeneracy);
        r.degeneracy_out = Some(o.degeneracy);
        r.innermost_core_size_total = Some(t.core(t.degeneracy).len());
        r.innermost_core_size_in = Some(i.core(i.degeneracy).len());
        r.innermost_core_size_out = Some(o.core(o.degeneracy).len());
    }
    r
}

fn ingest(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    bundle.json("networks.json", &ctx.nets.summary)?;
    for (name, g) in ctx.nets.all() {
        bundle.text(&format!("network_{name}.tsv"), |w| {
            write_edge_list(g, &[], w)
        })?;
    }
    let inst = &ctx.nets.instances;
    bundle.text("meta.tsv", |w| instnet::io::write_meta(inst, w))
}

#[derive(Serialize)]
struct NamedStats<'a> {
    network: &'a str,
    #[serde(flatten)]
    report: &'a StatsReport,
}

fn stats(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    ctx.ensure_stats();
    let order: Vec<&'static str> = ctx.nets.all().into_iter().map(|(n, _)| n).collect();
    let networks: Vec<NamedStats> = order
        .iter()
        .map(|n| NamedStats {
            network: n,
            report: &ctx.stats[n],
        })
        .collect();
    bundle.json(
        "stats.json",
        &json!({
            "model": ctx.cfg.model.name(),
            "networks": serde_json::to_value(&networks).map_err(instnet::Error::from)?,
        }),
    )?;
    for (name, g) in ctx.nets.all() {
        let knn = knn_distribution(g);
        bundle.text(&format!("knn_{name}.csv"), |w| {
            writeln!(w, "k,knn")?;
            for (k, v) in knn {
                writeln!(w, "{k},{v}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[u64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceSummary {
    pub sequence: &'static str,
    pub observations: usize,
    pub zeros_excluded: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// `Q3 + 1.5 IQR`; observations above it are outliers.
    pub upper_fence: f64,
    pub non_outlier_max: u64,
    pub outliers: usize,
    pub max: u64,
}

pub fn summarize(sequence: &'static str, sorted: &[u64], zeros: usize) -> SequenceSummary {
    let (q1, median, q3) = (
        quantile(sorted, 0.25),
        quantile(sorted, 0.5),
        quantile(sorted, 0.75),
    );
    let upper_fence = q3 + 1.5 * (q3 - q1);
    let inside = sorted.partition_point(|&x| x as f64 <= upper_fence);
    SequenceSummary {
        sequence,
        observations: sorted.len(),
        zeros_excluded: zeros,
        q1,
        median,
        q3,
        upper_fence,
        non_outlier_max: sorted[inside - 1],
        outliers: sorted.len() - inside,
        max: sorted[sorted.len() - 1],
    }
}

struct FitJob {
    seq: usize,
    family: Family,
    scenario: &'static str,
    interval: Option<Interval>,
}

fn fits(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = ctx.cfg;
    let g = ctx.nets.selected(cfg.model)?;
    let n = g.node_count();
    let seqs: [(&'static str, Vec<u64>); 3] = [
        (
            "degree",
            (0..n)
                .map(|v| (g.in_degree(v) + g.out_degree(v)) as u64)
                .collect(),
        ),
        ("in_degree", (0..n).map(|v| g.in_degree(v) as u64).collect()),
        (
            "out_degree",
            (0..n).map(|v| g.out_degree(v) as u64).collect(),
        ),
    ];
    let mut data: Vec<Vec<u64>> = Vec::new();
    let mut summaries = Vec::new();
    for (name, raw) in &seqs {
        let mut pos: Vec<u64> = raw.iter().copied().filter(|&x| x > 0).collect();
        pos.sort_unstable();
        if pos.is_empty() {
            return Err(instnet::Error::EmptySample.into());
        }
        summaries.push(summarize(name, &pos, raw.len() - pos.len()));
        data.push(pos);
    }

    let lo = cfg.low_degree_cutoff + 1;
    let mut jobs = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        let min = data[i][0];
        let job = |family, scenario, interval| FitJob {
            seq: i,
            family,
            scenario,
            interval,
        };
        jobs.push(job(Family::Powerlaw, "tail", None));
        jobs.push(job(
            Family::Lognormal,
            "full",
            Some(Interval::new(min, s.max)),
        ));
        jobs.push(job(
            Family::Lognormal,
            "no_outliers",
            Some(Interval::new(min, s.non_outlier_max)),
        ));
        jobs.push(job(
            Family::Lognormal,
            "no_low_degree",
            Some(Interval::new(lo, s.max)),
        ));
        jobs.push(job(
            Family::Lognormal,
            "no_outliers_no_low_degree",
            Some(Interval::new(lo, s.non_outlier_max)),
        ));
        jobs.push(job(Family::Exponential, "full", None));
        jobs.push(job(Family::Poisson, "full", None));
    }
    let fit_cfg = FitConfig {
        bootstrap: cfg.bootstrap,
        seed: cfg.seed,
        ..FitConfig::default()
    };
    let results: Vec<instnet::Result<FitResult>> = jobs
        .par_iter()
        .map(|j| {
            let d = &data[j.seq];
            match (j.family, j.interval) {
                (Family::Powerlaw, _) => fit_powerlaw(d, &fit_cfg),
                (Family::Lognormal, Some(iv)) => fit_lognormal(d, iv, &fit_cfg),
                (f, _) => fit_reference(d, f, &fit_cfg),
            }
        })
        .collect();

    let mut rows = Vec::new();
    for (j, r) in jobs.iter().zip(&results) {
        let mut row = match r {
            Ok(fit) => serde_json::to_value(fit).map_err(instnet::Error::from)?,
            Err(e) => json!({ "family": j.family, "error": e.to_string() }),
        };
        if let (Some(iv), Err(_)) = (j.interval, r) {
            row["interval"] = json!(iv);
        }
        row["sequence"] = json!(summaries[j.seq].sequence);
        row["scenario"] = json!(j.scenario);
        rows.push(row);
    }
    bundle.json(
        "fits.json",
        &json!({
            "network": cfg.model.name(),
            "sequences": summaries,
            "fits": rows,
        }),
    )?;

    for (i, s) in summaries.iter().enumerate() {
        let pick = |family: Family, scenario: &str| {
            jobs.iter()
                .zip(&results)
                .find(|(j, _)| j.seq == i && j.family == family && j.scenario == scenario)
                .and_then(|(_, r)| r.as_ref().ok())
        };
        let curves = [
            pick(Family::Powerlaw, "tail"),
            pick(Family::Lognormal, "full"),
            pick(Family::Exponential, "full"),
            pick(Family::Poisson, "full"),
        ];
        let empirical = ccdf(&data[i]);
        bundle.text(&format!("ccdf_{}.csv", s.sequence), |w| {
            writeln!(w, "x,empirical,powerlaw,lognormal,exponential,poisson")?;
            for (x, p) in empirical {
                write!(w, "{x},{p}")?;
                for c in &curves {
                    match c {
                        Some(f) if f.interval.contains(x) => {
                            let share = f.sample_size as f64 / f.total_size as f64;
                            write!(w, ",{}", share * f.model_ccdf(x))?;
                        }
                        _ => write!(w, ",")?,
                    }
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CommunityEntry {
    partition: String,
    method: String,
    /// Modularity of this partition under each variant.
    modularity: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass_modularity: Option<Vec<f64>>,
    community_count: usize,
    significant_count: usize,
    sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unknown_labels: Option<Vec<String>>,
}

struct NamedPartition {
    name: String,
    part: Partition,
    passes: Option<Vec<f64>>,
    /// Labels of an imported file that the graph lacks.
    unknown: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ConductanceEntry {
    partition: String,
    unweighted: ConductanceReport,
    weighted: ConductanceReport,
}

fn variant_key(v: ModularityVariant) -> &'static str {
    match v {
        ModularityVariant::UndirectedUnweighted => "undirected_unweighted",
        ModularityVariant::DirectedWeighted => "directed_weighted",
    }
}

const VARIANTS: [ModularityVariant; 2] = [
    ModularityVariant::UndirectedUnweighted,
    ModularityVariant::DirectedWeighted,
];

fn communities(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = ctx.cfg;
    let g = ctx.nets.selected(cfg.model)?;
    let runs: Vec<_> = VARIANTS
        .par_iter()
        .map(|&v| louvain(g, v, cfg.seed).map(|r| (v, r)))
        .collect::<instnet::Result<_>>()?;
    let mut parts: Vec<NamedPartition> = runs
        .into_iter()
        .map(|(v, r)| NamedPartition {
            name: format!("louvain_{}", variant_key(v)),
            part: r.partition,
            passes: Some(r.pass_modularity),
            unknown: None,
        })
        .collect();
    if let Some(p) = &cfg.partition {
        let (part, unknown) = import_partition(open(p)?, g)?;
        parts.push(NamedPartition {
            name: "imported".into(),
            part,
            passes: None,
            unknown: Some(unknown),
        });
    }

    let mut entries = Vec::new();
    let mut cond = Vec::new();
    for NamedPartition {
        name,
        part,
        passes,
        unknown,
    } in parts
    {
        let mut q = BTreeMap::new();
        for v in VARIANTS {
            q.insert(variant_key(v), modularity(g, &part, v)?.value);
        }
        entries.push(CommunityEntry {
            partition: name.clone(),
            method: part.method.clone(),
            modularity: q,
            pass_modularity: passes,
            community_count: part.community_count(),
            significant_count: part.significant().len(),
            sizes: part.sizes(),
            unknown_labels: unknown,
        });
        cond.push(ConductanceEntry {
            partition: name.clone(),
            unweighted: conductance_matrix(g, &part, false, cfg.include_insignificant_communities)?,
            weighted: conductance_matrix(g, &part, true, cfg.include_insignificant_communities)?,
        });
        bundle.text(&format!("partition_{name}.tsv"), |w| {
            write_partition(g, &part, w)
        })?;
    }
    bundle.json(
        "communities.json",
        &json!({
            "network": cfg.model.name(),
            "significant_size": SIGNIFICANT_SIZE,
            "partitions": serde_json::to_value(&entries).map_err(instnet::Error::from)?,
        }),
    )?;
    bundle.json(
        "conductance.json",
        &json!({
            "network": cfg.model.name(),
            "include_insignificant": cfg.include_insignificant_communities,
            "partitions": serde_json::to_value(&cond).map_err(instnet::Error::from)?,
        }),
    )
}

#[derive(Serialize)]
struct Shell {
    core_index: usize,
    nodes: usize,
}

#[derive(Serialize)]
struct CoreEntry {
    variant: CoreVariant,
    degeneracy: usize,
    innermost_core_size: usize,
    shells: Vec<Shell>,
    profile: CoreLinkProfile,
}

fn cores(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = ctx.cfg;
    let g = ctx.nets.selected(cfg.model)?;
    let maps: Vec<_> = CoreVariant::ALL
        .par_iter()
        .map(|&v| {
            let m = core_decomposition(g, v);
            let p = core_link_profile(g, &m);
            (m, p)
        })
        .collect();
    let mut entries = Vec::new();
    for (m, profile) in &maps {
        let mut shells = vec![0usize; m.degeneracy + 1];
        for &c in &m.coreness {
            shells[c] += 1;
        }
        entries.push(CoreEntry {
            variant: m.variant,
            degeneracy: m.degeneracy,
            innermost_core_size: m.core(m.degeneracy).len(),
            shells: shells
                .into_iter()
                .enumerate()
                .map(|(core_index, nodes)| Shell { core_index, nodes })
                .collect(),
            profile: profile.clone(),
        });
        bundle.text(&format!("coreness_{}.tsv", m.variant.name()), |w| {
            write_coreness(g, m, w)
        })?;
    }
    bundle.json(
        "cores.json",
        &json!({
            "network": cfg.model.name(),
            "variants": serde_json::to_value(&entries).map_err(instnet::Error::from)?,
        }),
    )?;
    bundle.text("core_profile.csv", |w| {
        writeln!(w, "variant,core_index,in_links,out_links")?;
        for (m, p) in &maps {
            for r in &p.rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    m.variant.name(),
                    r.core_index,
                    r.in_links,
                    r.out_links
                )?;
            }
        }
        Ok(())
    })
}

fn backbones(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    ctx.ensure_stats();
    let cfg = ctx.cfg;
    let g = ctx.nets.selected(cfg.model)?;
    let before = &ctx.stats[cfg.model.name()];
    let paths = ctx.path_config();
    let models = [BackboneModel::Disparity, BackboneModel::Mlf];
    let sigs: Vec<_> = models
        .par_iter()
        .map(|&m| significance(g, m))
        .collect::<instnet::Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..models.len())
        .flat_map(|i| cfg.alphas.iter().map(move |&a| (i, a)))
        .collect();
    let pruned: Vec<(InstanceGraph, StatsReport)> = jobs
        .par_iter()
        .map(|&(i, a)| {
            let p = prune(g, &sigs[i], a)?;
            let s = network_stats(&p, &paths, cfg.seed);
            Ok((p, s))
        })
        .collect::<instnet::Result<_>>()?;

    for (m, sig) in models.iter().zip(&sigs) {
        bundle.text(&format!("significance_{}.csv", m.name()), |w| {
            write_significance(g, sig, w)
        })?;
    }
    for (&(i, alpha), (p, after)) in jobs.iter().zip(&pruned) {
        let tag = format!("{}_{}", models[i].name(), alpha_tag(alpha));
        let kept_weight = p.total_weight();
        bundle.json(
            &format!("backbone_{tag}.json"),
            &json!({
                "network": cfg.model.name(),
                "filter": models[i].name(),
                "alpha": alpha,
                "rule": "keep arcs with p < alpha, then drop isolated nodes",
                "node_fraction": ratio(p.node_count() as f64, g.node_count() as f64),
                "edge_fraction": ratio(p.edge_count() as f64, g.edge_count() as f64),
                "weight_fraction": ratio(kept_weight, g.total_weight()),
                "before": before,
                "after": after,
                "change": compare_networks(after, before, cfg.decimals),
            }),
        )?;
        bundle.text(&format!("backbone_{tag}.tsv"), |w| {
            write_edge_list(p, &[], w)
        })?;
    }
    Ok(())
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

#[derive(Serialize)]
struct FaginValue {
    k: usize,
    value: f64,
}

#[derive(Serialize)]
struct RankPair {
    a: &'static str,
    b: &'static str,
    shared_labels: usize,
    kendall_tau: Option<f64>,
    fagin: Vec<FaginValue>,
}

fn rank(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = ctx.cfg;
    let pr = PageRankConfig {
        damping: cfg.damping,
        weighted: !cfg.unweighted_pagerank,
        ..PageRankConfig::default()
    };
    let nets = ctx.nets.all();
    let lists: Vec<RankedList> = nets
        .par_iter()
        .map(|(_, g)| pagerank(g, &pr))
        .collect::<instnet::Result<_>>()?;
    let by_name: BTreeMap<&str, &RankedList> = nets.iter().map(|(n, _)| *n).zip(&lists).collect();
    for (name, list) in &by_name {
        bundle.text(&format!("rankings_{name}.csv"), |w| write_ranking(list, w))?;
    }
    let mut pairs = Vec::new();
    for (a, b) in ctx.nets.pairs() {
        let (ra, rb) = (by_name[a], by_name[b]);
        let shared = ra
            .labels()
            .iter()
            .filter(|l| rb.labels().contains(l))
            .count();
        let fagin = cfg
            .fagin_k
            .iter()
            .filter(|&&k| k <= ra.len() && k <= rb.len())
            .map(|&k| {
                Ok(FaginValue {
                    k,
                    value: fagin_intersection(ra, rb, k)?,
                })
            })
            .collect::<instnet::Result<_>>()?;
        pairs.push(RankPair {
            a,
            b,
            shared_labels: shared,
            kendall_tau: kendall_tau(ra, rb).ok(),
            fagin,
        });
    }
    bundle.json(
        "ranking_comparison.json",
        &json!({
            "pagerank": pr,
            "tie_break": TIE_BREAK,
            "pairs": serde_json::to_value(&pairs).map_err(instnet::Error::from)?,
        }),
    )
}

#[derive(Serialize)]
struct DiffEntry {
    a: &'static str,
    b: &'static str,
    #[serde(flatten)]
    table: DiffTable,
}

fn compare(ctx: &mut Context, bundle: &mut Bundle) -> CliResult<()> {
    ctx.ensure_stats();
    let tables: Vec<DiffEntry> = ctx
        .nets
        .pairs()
        .into_iter()
        .map(|(a, b)| DiffEntry {
            a,
            b,
            table: compare_networks(&ctx.stats[a], &ctx.stats[b], ctx.cfg.decimals),
        })
        .collect();
    let v: Value = serde_json::to_value(&tables).map_err(instnet::Error::from)?;
    bundle.json("comparison.json", &json!({ "tables": v }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let d = [1, 2, 3, 4, 5, 6, 7, 8];
        assert_eq!(quantile(&d, 0.25), 2.75);
        assert_eq!(quantile(&d, 0.5), 4.5);
        assert_eq!(quantile(&[7], 0.75), 7.0);
    }

    #[test]
    fn fence_separates_outliers() {
        let mut d: Vec<u64> = (1..=20).collect();
        d.push(1000);
        let s = summarize("degree", &d, 0);
        assert_eq!((s.non_outlier_max, s.outliers, s.max), (20, 1, 1000));
        assert!(s.upper_fence >= 20.0 && s.upper_fence < 1000.0);
    }
}
