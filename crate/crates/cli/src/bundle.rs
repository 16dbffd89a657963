use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "instnet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block attached to every report file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seeds: BTreeMap<&'static str, u64>,
    /// Analysis choices that change results, such as path-metric mode and
    /// PageRank weighting.
    pub flags: BTreeMap<&'static str, Value>,
}

impl Metadata {
    pub fn new(command: &str, config_hash: String) -> Self {
        Metadata {
            tool: TOOL,
            version: VERSION,
            command: command.to_owned(),
            config_hash,
            seeds: BTreeMap::new(),
            flags: BTreeMap::new(),
        }
    }

    /// `# key: value` comment lines for text outputs.
    pub fn header_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!("config_hash: {}", self.config_hash),
        ];
        for (k, v) in &self.seeds {
            out.push(format!("seed.{k}: {v}"));
        }
        for (k, v) in &self.flags {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push(format!("flag.{k}: {v}"));
        }
        out
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageFailure {
    pub stage: String,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Manifest<'a> {
    completed: &'a [String],
    failed: Option<&'a StageFailure>,
    files: &'a BTreeSet<String>,
}

/// An output directory plus the bookkeeping for its manifest.
pub struct Bundle {
    dir: PathBuf,
    pub metadata: Metadata,
    files: BTreeSet<String>,
    completed: Vec<String>,
    failed: Option<StageFailure>,
}

pub const MANIFEST: &str = "manifest.json";

impl Bundle {
    pub fn create(dir: &Path, metadata: Metadata) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            metadata,
            files: BTreeSet::new(),
            completed: Vec::new(),
            failed: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })?;
        self.files.insert(name.to_owned());
        Ok(())
    }

    /// Writes `body` as pretty JSON with a leading `metadata` key.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> CliResult<()> {
        let doc = Document {
            metadata: &self.metadata,
            body,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(instnet::Error::from)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    /// Writes a text table: the metadata header as `#` lines, then `fill`.
    pub fn text<F>(&mut self, name: &str, fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> instnet::Result<()>,
    {
        let mut buf = Vec::new();
        instnet::io::write_header(&mut buf, &self.metadata.header_lines())?;
        fill(&mut buf)?;
        self.put(name, &buf)
    }

    pub fn complete(&mut self, stage: &str) -> CliResult<()> {
        self.completed.push(stage.to_owned());
        self.write_manifest()
    }

    pub fn fail(&mut self, stage: &str, err: &CliError) -> CliResult<()> {
        self.failed = Some(StageFailure {
            stage: stage.to_owned(),
            error: err.to_string(),
            exit_code: err.exit_code(),
        });
        self.write_manifest()
    }

    pub fn write_manifest(&mut self) -> CliResult<()> {
        self.files.insert(MANIFEST.to_owned());
        let files = self.files.clone();
        let m = Manifest {
            completed: &self.completed,
            failed: self.failed.as_ref(),
            files: &files,
        };
        let doc = Document {
            metadata: &self.metadata,
            body: &m,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(instnet::Error::from)?;
        bytes.push(b'\n');
        self.put(MANIFEST, &bytes)
    }

    pub fn completed(&self) -> &[String] {
        &self.completed
    }
}

/// `0.05` -> `0.05`, used in file names.
pub fn alpha_tag(alpha: f64) -> String {
    format!("{alpha}")
}
