use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use instnet::netmodel::WeightMode;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Which instance network the single-network analyses run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Instances,
    Online,
    Expanded,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Instances => "instances",
            ModelKind::Online => "online",
            ModelKind::Expanded => "expanded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Four columns mean user-level follows, two or three an instance edge list.
    #[default]
    Auto,
    Edges,
    Users,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum WeightModeArg {
    #[default]
    DistinctUserPairs,
    DistinctSourceUsers,
}

impl From<WeightModeArg> for WeightMode {
    fn from(w: WeightModeArg) -> Self {
        match w {
            WeightModeArg::DistinctUserPairs => WeightMode::DistinctUserPairs,
            WeightModeArg::DistinctSourceUsers => WeightMode::DistinctSourceUsers,
        }
    }
}

pub const DEFAULT_ALPHAS: [f64; 2] = [0.01, 0.05];
pub const DEFAULT_FAGIN_K: [usize; 5] = [10, 50, 100, 500, 1000];
pub const OUT_ENV: &str = "INSTNET_OUT";
pub const DEFAULT_OUT: &str = "instnet-out";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub input_format: InputFormat,
    pub meta: Option<PathBuf>,
    /// Arcs between Mastodon instances and other platforms, for the expanded model.
    pub boundary: Option<PathBuf>,
    /// Edge list of an earlier snapshot to compare against.
    pub earlier: Option<PathBuf>,
    /// External `label, community` assignment analyzed next to Louvain.
    pub partition: Option<PathBuf>,
    pub model: ModelKind,
    pub weight_mode: WeightMode,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub bootstrap: usize,
    pub exact_paths_max: usize,
    pub path_sources: usize,
    pub unweighted_pagerank: bool,
    pub damping: f64,
    pub include_insignificant_communities: bool,
    pub keep_isolated_online: bool,
    /// Degrees at or below this are dropped in the lower-degree lognormal scenarios.
    pub low_degree_cutoff: u64,
    pub fagin_k: Vec<usize>,
    pub decimals: u32,
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            input_format: InputFormat::Auto,
            meta: None,
            boundary: None,
            earlier: None,
            partition: None,
            model: ModelKind::Instances,
            weight_mode: WeightMode::default(),
            alphas: DEFAULT_ALPHAS.to_vec(),
            seed: 0,
            bootstrap: 1_000,
            exact_paths_max: 20_000,
            path_sources: 1_000,
            unweighted_pagerank: false,
            damping: 0.85,
            include_insignificant_communities: false,
            keep_isolated_online: false,
            low_degree_cutoff: 50,
            fagin_k: DEFAULT_FAGIN_K.to_vec(),
            decimals: 1,
            out: out.into(),
        }
    }

    /// Checks ranges and that every input path exists; sorts and dedups the
    /// significance levels and Fagin depths.
    pub fn validate(&mut self) -> CliResult<()> {
        if self.alphas.is_empty() {
            return Err(CliError::Usage(
                "at least one significance level is required".into(),
            ));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(CliError::Usage(format!(
                "significance level must be in (0, 1), got {a}"
            )));
        }
        self.alphas.sort_by(f64::total_cmp);
        self.alphas.dedup();
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CliError::Usage(format!(
                "damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if self.bootstrap == 0 {
            return Err(CliError::Usage(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        if self.fagin_k.contains(&0) {
            return Err(CliError::Usage("Fagin depths must be at least 1".into()));
        }
        self.fagin_k.sort_unstable();
        self.fagin_k.dedup();
        for p in self.input_paths().into_values() {
            if !p.is_file() {
                return Err(CliError::Usage(format!(
                    "input file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn input_paths(&self) -> BTreeMap<&'static str, &Path> {
        let mut m = BTreeMap::new();
        m.insert("input", self.input.as_path());
        for (k, p) in [
            ("meta", &self.meta),
            ("boundary", &self.boundary),
            ("earlier", &self.earlier),
            ("partition", &self.partition),
        ] {
            if let Some(p) = p {
                m.insert(k, p.as_path());
            }
        }
        m
    }

    /// SHA-256 over the canonical JSON of every setting that can change a
    /// result. Inputs enter by content digest and the output directory is left
    /// out, so equal runs in different places share a hash.
    pub fn hash(&self) -> CliResult<String> {
        let mut inputs = BTreeMap::new();
        for (k, p) in self.input_paths() {
            let bytes = fs::read(p).map_err(|source| CliError::Input {
                path: p.to_path_buf(),
                source,
            })?;
            inputs.insert(k, hex(&Sha256::digest(&bytes)));
        }
        let view = serde_json::json!({
            "inputs": inputs,
            "input_format": self.input_format,
            "model": self.model,
            "weight_mode": self.weight_mode,
            "alphas": self.alphas,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "exact_paths_max": self.exact_paths_max,
            "path_sources": self.path_sources,
            "unweighted_pagerank": self.unweighted_pagerank,
            "damping": self.damping,
            "include_insignificant_communities": self.include_insignificant_communities,
            "keep_isolated_online": self.keep_isolated_online,
            "low_degree_cutoff": self.low_degree_cutoff,
            "fagin_k": self.fagin_k,
            "decimals": self.decimals,
        });
        Ok(digest_json(&view))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_json(v: &serde_json::Value) -> String {
    hex(&Sha256::digest(v.to_string().as_bytes()))
}

pub fn digest_file(p: &Path) -> CliResult<String> {
    let bytes = fs::read(p).map_err(|source| CliError::Input {
        path: p.to_path_buf(),
        source,
    })?;
    Ok(hex(&Sha256::digest(&bytes)))
}
