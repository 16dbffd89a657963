//! Pipeline behind the `instnet` command.
//!
//! A run loads the instance networks named by a [`PipelineConfig`], executes
//! a sequence of [`Stage`]s and writes their reports into one output
//! directory. JSON reports open with a `metadata` object and CSV/TSV outputs
//! with `#` comment lines carrying the same fields. `manifest.json` lists the
//! completed stages and is rewritten after each one, so a failed run leaves
//! its partial outputs behind together with the failing stage.

pub mod bundle;
pub mod config;
pub mod error;
pub mod networks;
pub mod stages;

use std::fs;
use std::io::Write;
use std::path::Path;

use instnet::macrostats::StatsReport;
use instnet::mesoscale::SIGNIFICANT_SIZE;
use instnet::ranking::compare_networks;
use instnet_testkit::gen::{generate, Generated, GeneratorSpec};
use serde_json::{json, Value};

pub use bundle::{Bundle, Metadata};
pub use config::{InputFormat, ModelKind, PipelineConfig};
pub use error::{exit, CliError, CliResult};
pub use networks::Networks;
pub use stages::{Context, Stage};

/// The metadata block for a pipeline run.
pub fn pipeline_metadata(cfg: &PipelineConfig, command: &str) -> CliResult<Metadata> {
    let mut m = Metadata::new(command, cfg.hash()?);
    for k in ["bootstrap", "louvain", "path_sampling"] {
        m.seeds.insert(k, cfg.seed);
    }
    let f = &mut m.flags;
    f.insert("model", json!(cfg.model.name()));
    f.insert("input_format", json!(cfg.input_format));
    f.insert("weight_mode", json!(cfg.weight_mode));
    f.insert(
        "online_isolated_nodes",
        json!(if cfg.keep_isolated_online {
            "kept"
        } else {
            "dropped"
        }),
    );
    f.insert("path_mode", json!("undirected_lwcc"));
    f.insert("exact_paths_max", json!(cfg.exact_paths_max));
    f.insert("path_sample_sources", json!(cfg.path_sources));
    f.insert(
        "pagerank_weighting",
        json!(if cfg.unweighted_pagerank {
            "unweighted"
        } else {
            "weighted"
        }),
    );
    f.insert("pagerank_damping", json!(cfg.damping));
    f.insert("significant_community_size", json!(SIGNIFICANT_SIZE));
    f.insert(
        "conductance_communities",
        json!(if cfg.include_insignificant_communities {
            "all"
        } else {
            "significant"
        }),
    );
    f.insert("significance_levels", json!(cfg.alphas));
    f.insert(
        "backbone_threshold",
        json!("per-edge p < alpha, uncorrected"),
    );
    f.insert("bootstrap_replicates", json!(cfg.bootstrap));
    f.insert("powerlaw_min_tail", json!("max(50, ceil(0.05 n))"));
    f.insert("lognormal_outlier_rule", json!("x > Q3 + 1.5 IQR"));
    f.insert("low_degree_cutoff", json!(cfg.low_degree_cutoff));
    f.insert("fagin_k", json!(cfg.fagin_k));
    f.insert("decimals", json!(cfg.decimals));
    Ok(m)
}

/// Runs `stages` in order and returns the names of those completed.
///
/// Loading the networks counts as part of the first stage. On failure the
/// manifest records the failing stage and the error is returned.
pub fn run_pipeline(
    mut cfg: PipelineConfig,
    command: &str,
    stages: &[Stage],
) -> CliResult<Vec<String>> {
    cfg.validate()?;
    let mut bundle = Bundle::create(&cfg.out, pipeline_metadata(&cfg, command)?)?;
    bundle.write_manifest()?;
    let first = stages.first().map_or("ingest", |s| s.name());
    let nets = match Networks::load(&cfg) {
        Ok(n) => n,
        Err(e) => {
            bundle.fail(first, &e)?;
            return Err(e);
        }
    };
    let mut ctx = Context::new(&cfg, nets);
    for &stage in stages {
        if let Err(e) = ctx.run(stage, &mut bundle) {
            bundle.fail(stage.name(), &e)?;
            return Err(e);
        }
        bundle.complete(stage.name())?;
    }
    Ok(bundle.completed().to_vec())
}

/// Pulls one network's statistics out of a report file.
///
/// Accepts a `stats.json` bundle file (picking `network`, or the report's
/// own model when `None`) or a bare statistics object.
pub fn stats_from_report(doc: &Value, network: Option<&str>) -> CliResult<(String, StatsReport)> {
    let pick = |v: &Value| -> CliResult<StatsReport> {
        serde_json::from_value(v.clone()).map_err(|e| CliError::Core(e.into()))
    };
    match doc.get("networks").and_then(Value::as_array) {
        Some(list) => {
            let want = network
                .map(str::to_owned)
                .or_else(|| doc.get("model").and_then(Value::as_str).map(str::to_owned))
                .unwrap_or_else(|| "instances".into());
            let entry = list
                .iter()
                .find(|e| e.get("network").and_then(Value::as_str) == Some(want.as_str()))
                .ok_or_else(|| CliError::Usage(format!("report has no network named `{want}`")))?;
            Ok((want, pick(entry)?))
        }
        None => Ok((network.unwrap_or("report").to_owned(), pick(doc)?)),
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Percentage change of every statistic of report `a` relative to report `b`,
/// written to `comparison.json` under `out`.
pub fn compare_reports(
    a: &Path,
    b: &Path,
    network_a: Option<&str>,
    network_b: Option<&str>,
    decimals: u32,
    out: &Path,
) -> CliResult<()> {
    let (name_a, ra) = stats_from_report(&read_json(a)?, network_a)?;
    let (name_b, rb) = stats_from_report(&read_json(b)?, network_b)?;
    let hash = config::digest_json(&json!({
        "a": config::digest_file(a)?,
        "b": config::digest_file(b)?,
        "network_a": name_a,
        "network_b": name_b,
        "decimals": decimals,
    }));
    let mut m = Metadata::new("compare", hash);
    m.flags.insert("decimals", json!(decimals));
    let mut bundle = Bundle::create(out, m)?;
    let table = compare_networks(&ra, &rb, decimals);
    bundle.json(
        "comparison.json",
        &json!({ "tables": [{ "a": name_a, "b": name_b, "decimals": table.decimals, "rows": table.rows }] }),
    )?;
    bundle.complete("compare")
}

/// Writes the data described by a generator spec (JSON) into `out`.
pub fn gen_bundle(spec_json: &str, out: &Path) -> CliResult<Vec<String>> {
    let value: Value = serde_json::from_str(spec_json)
        .map_err(|e| CliError::Usage(format!("generator spec: {e}")))?;
    let spec: GeneratorSpec = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Usage(format!("generator spec: {e}")))?;
    let mut m = Metadata::new("gen", config::digest_json(&value));
    m.seeds.insert(
        "generator",
        value.get("seed").and_then(Value::as_u64).unwrap_or(0),
    );
    let mut bundle = Bundle::create(out, m)?;
    bundle.json("spec.json", &json!({ "spec": value }))?;
    match generate(&spec)? {
        Generated::Graph { graph, truth } => {
            bundle.text("edges.tsv", |w| {
                instnet::io::write_edge_list(&graph, &[], w)
            })?;
            if let Some(t) = truth {
                bundle.text("truth.tsv", |w| {
                    writeln!(w, "# label\tblock")?;
                    for (v, b) in t.iter().enumerate() {
                        writeln!(w, "{}\t{b}", graph.label(v))?;
                    }
                    Ok(())
                })?;
            }
        }
        Generated::Federation(sim) => {
            bundle.text("user_edges.tsv", |w| {
                instnet::io::write_user_edges(&sim.records, w)
            })?;
            bundle.text("meta.tsv", |w| {
                writeln!(w, "# label\tstatus\tplatform")?;
                for r in &sim.meta {
                    writeln!(w, "{}\t{}\t{}", r.label, r.meta.status, r.meta.platform)?;
                }
                Ok(())
            })?;
            bundle.text("boundary.tsv", |w| {
                writeln!(w, "# source\ttarget\tweight")?;
                for e in &sim.boundary {
                    writeln!(w, "{}\t{}\t{}", e.source, e.target, e.weight.unwrap_or(1.0))?;
                }
                Ok(())
            })?;
        }
        Generated::Sample(xs) => {
            bundle.text("sample.txt", |w| {
                for x in xs {
                    writeln!(w, "{x}")?;
                }
                Ok(())
            })?;
        }
    }
    bundle.complete("gen")?;
    Ok(bundle.completed().to_vec())
}
