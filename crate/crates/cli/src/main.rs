use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use instnet_cli::config::{WeightModeArg, DEFAULT_OUT, OUT_ENV};
use instnet_cli::{
    compare_reports, exit, gen_bundle, run_pipeline, CliError, CliResult, InputFormat, ModelKind,
    PipelineConfig, Stage,
};

/// Structural analysis of federated instance networks.
#[derive(Parser)]
#[command(name = "instnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load inputs and write the normalized networks.
    Ingest(PipelineArgs),
    /// Project user-level follows onto instances.
    Project(PipelineArgs),
    /// Macroscopic statistics and knn(k) for every network.
    Stats(PipelineArgs),
    /// Degree-distribution fits with bootstrap p-values and CCDF data.
    Fit(PipelineArgs),
    /// Louvain communities, modularity and conductance.
    Communities(PipelineArgs),
    /// Core decomposition and per-core link profiles.
    Cores(PipelineArgs),
    /// Disparity and MLF backbones at each significance level.
    Backbone(PipelineArgs),
    /// PageRank rankings and their Kendall/Fagin agreement.
    Rank(PipelineArgs),
    /// Percentage change between two statistics reports.
    Compare(CompareArgs),
    /// Write synthetic inputs from a JSON generator spec.
    Gen(GenArgs),
    /// Every stage, in dependency order.
    Report(PipelineArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = DEFAULT_OUT)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Instance edge list (source, target[, weight]) or user follows (four columns).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    input_format: InputFormat,
    /// Instance metadata: label, status (online|offline|unknown), platform.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Arcs between Mastodon instances and other platforms.
    #[arg(long)]
    boundary: Option<PathBuf>,
    /// Edge list of an earlier snapshot.
    #[arg(long)]
    earlier: Option<PathBuf>,
    /// External partition (label, community) to evaluate.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelKind::Instances)]
    model: ModelKind,
    #[arg(long, value_enum, default_value_t = WeightModeArg::DistinctUserPairs)]
    weight_mode: WeightModeArg,
    /// Significance level for backbones; repeat for several.
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bootstrap replicates per fit.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Largest component size with exact path metrics; larger ones are sampled.
    #[arg(long, default_value_t = 20_000)]
    exact_paths_max: usize,
    /// BFS sources when path metrics are sampled.
    #[arg(long, default_value_t = 1000)]
    path_sources: usize,
    #[arg(long)]
    unweighted_pagerank: bool,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    /// Compute conductance over all communities, not only those with at least ten nodes.
    #[arg(long)]
    include_insignificant_communities: bool,
    /// Keep online instances without arcs in the online network.
    #[arg(long)]
    keep_isolated_online: bool,
    /// Degrees at or below this are removed in two of the lognormal scenarios.
    #[arg(long, default_value_t = 50)]
    low_degree_cutoff: u64,
    /// Fagin intersection depth; repeat for several.
    #[arg(long = "fagin-k")]
    fagin_k: Vec<usize>,
    /// Decimals kept in percentage changes.
    #[arg(long, default_value_t = 1)]
    decimals: u32,
    #[command(flatten)]
    out: OutArg,
}

impl PipelineArgs {
    fn into_config(self) -> PipelineConfig {
        let mut c = PipelineConfig::new(self.input, self.out.out);
        c.input_format = self.input_format;
        c.meta = self.meta;
        c.boundary = self.boundary;
        c.earlier = self.earlier;
        c.partition = self.partition;
        c.model = self.model;
        c.weight_mode = self.weight_mode.into();
        if !self.alphas.is_empty() {
            c.alphas = self.alphas;
        }
        c.seed = self.seed;
        c.bootstrap = self.bootstrap;
        c.exact_paths_max = self.exact_paths_max;
        c.path_sources = self.path_sources;
        c.unweighted_pagerank = self.unweighted_pagerank;
        c.damping = self.damping;
        c.include_insignificant_communities = self.include_insignificant_communities;
        c.keep_isolated_online = self.keep_isolated_online;
        c.low_degree_cutoff = self.low_degree_cutoff;
        if !self.fagin_k.is_empty() {
            c.fagin_k = self.fagin_k;
        }
        c.decimals = self.decimals;
        c
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Report whose values are compared.
    a: PathBuf,
    /// Reference report.
    b: PathBuf,
    /// Network to take from `a` when it holds several.
    #[arg(long)]
    network_a: Option<String>,
    #[arg(long)]
    network_b: Option<String>,
    #[arg(long, default_value_t = 1)]
    decimals: u32,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct GenArgs {
    /// JSON file holding the generator spec.
    #[arg(
        long,
        conflicts_with = "spec_json",
        required_unless_present = "spec_json"
    )]
    spec: Option<PathBuf>,
    /// Generator spec given inline.
    #[arg(long)]
    spec_json: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

fn pipeline(args: PipelineArgs, command: &str, stages: &[Stage]) -> CliResult<PathBuf> {
    let out = args.out.out.clone();
    run_pipeline(args.into_config(), command, stages)?;
    Ok(out)
}

fn run(cli: Cli) -> CliResult<PathBuf> {
    match cli.command {
        Command::Ingest(a) => pipeline(a, "ingest", &[Stage::Ingest]),
        Command::Project(mut a) => {
            a.input_format = InputFormat::Users;
            pipeline(a, "project", &[Stage::Ingest])
        }
        Command::Stats(a) => pipeline(a, "stats", &[Stage::Stats]),
        Command::Fit(a) => pipeline(a, "fit", &[Stage::Fit]),
        Command::Communities(a) => pipeline(a, "communities", &[Stage::Communities]),
        Command::Cores(a) => pipeline(a, "cores", &[Stage::Cores]),
        Command::Backbone(a) => pipeline(a, "backbone", &[Stage::Backbone]),
        Command::Rank(a) => pipeline(a, "rank", &[Stage::Rank]),
        Command::Report(a) => pipeline(a, "report", &Stage::REPORT),
        Command::Compare(a) => {
            compare_reports(
                &a.a,
                &a.b,
                a.network_a.as_deref(),
                a.network_b.as_deref(),
                a.decimals,
                &a.out.out,
            )?;
            Ok(a.out.out)
        }
        Command::Gen(a) => {
            let spec = match (a.spec, a.spec_json) {
                (Some(p), _) => {
                    fs::read_to_string(&p).map_err(|source| CliError::Input { path: p, source })?
                }
                (None, Some(s)) => s,
                (None, None) => {
                    return Err(CliError::Usage("--spec or --spec-json is required".into()))
                }
            };
            gen_bundle(&spec, &a.out.out)?;
            Ok(a.out.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
