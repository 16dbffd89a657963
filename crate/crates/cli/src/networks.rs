use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use instnet::graph::{build_graph, BuildStats, EdgeRecord, InstanceGraph, MetaRecord};
use instnet::io::{read_edge_list, read_meta, read_user_edges};
use instnet::netmodel::{
    expanded_network, online_subnetwork, project_to_instances, ExpansionStats, ProjectionStats,
};
use serde::Serialize;

use crate::config::{InputFormat, ModelKind, PipelineConfig};
use crate::error::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })
}

/// Column count of the first data line, if any.
pub fn first_row_width(path: &Path) -> CliResult<Option<usize>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let d = if l.contains('\t') { '\t' } else { ',' };
            l.split(d).count()
        }))
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkSize {
    pub network: &'static str,
    pub nodes: usize,
    pub edges: usize,
    pub total_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub input_format: InputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build: Option<BuildStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionStats>,
    pub meta_records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub online_unavailable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub earlier_build: Option<BuildStats>,
    pub networks: Vec<NetworkSize>,
}

/// Every network the inputs allow, built once per run.
pub struct Networks {
    pub instances: InstanceGraph,
    pub online: Option<InstanceGraph>,
    pub expanded: Option<InstanceGraph>,
    pub earlier: Option<InstanceGraph>,
    pub summary: IngestSummary,
}

/// Network pairs compared in rankings and statistics, newer side first.
pub const PAIRS: [(&str, &str); 4] = [
    ("expanded", "instances"),
    ("online", "instances"),
    ("expanded", "online"),
    ("instances", "earlier"),
];

impl Networks {
    pub fn load(cfg: &PipelineConfig) -> CliResult<Self> {
        let meta: Vec<MetaRecord> = match &cfg.meta {
            Some(p) => read_meta(open(p)?)?,
            None => Vec::new(),
        };
        let format = match cfg.input_format {
            InputFormat::Auto => match first_row_width(&cfg.input)? {
                Some(4) => InputFormat::Users,
                _ => InputFormat::Edges,
            },
            f => f,
        };
        let meta_opt = cfg.meta.as_ref().map(|_| meta.as_slice());
        let (instances, build, projection) = match format {
            InputFormat::Users => {
                let records = read_user_edges(open(&cfg.input)?)?;
                let (projected, stats) = project_to_instances(records, cfg.weight_mode)?;
                let edges = projected
                    .edges()
                    .map(|(s, t, w)| EdgeRecord::new(projected.label(s), projected.label(t), w));
                let (g, _) = build_graph(edges, meta_opt)?;
                (g, None, Some(stats))
            }
            _ => {
                let (g, stats) = build_graph(read_edge_list(open(&cfg.input)?)?, meta_opt)?;
                (g, Some(stats), None)
            }
        };
        if instances.edge_count() == 0 {
            return Err(instnet::Error::Validation(format!(
                "{} contains no inter-instance edges",
                cfg.input.display()
            ))
            .into());
        }

        let (online, online_unavailable) = if cfg.meta.is_none() {
            (None, Some("no metadata file given".to_owned()))
        } else {
            match online_subnetwork(&instances, !cfg.keep_isolated_online) {
                Ok(g) => (Some(g), None),
                Err(instnet::Error::Config(msg)) => (None, Some(msg)),
                Err(e) => return Err(e.into()),
            }
        };

        let (expanded, expansion) = match &cfg.boundary {
            Some(p) => {
                let (g, stats) = expanded_network(&instances, read_edge_list(open(p)?)?)?;
                (Some(g), Some(stats))
            }
            None => (None, None),
        };

        let (earlier, earlier_build) = match &cfg.earlier {
            Some(p) => {
                let (g, stats) = build_graph(read_edge_list(open(p)?)?, None)?;
                (Some(g), Some(stats))
            }
            None => (None, None),
        };

        let mut nets = Networks {
            instances,
            online,
            expanded,
            earlier,
            summary: IngestSummary {
                input_format: format,
                build,
                projection,
                meta_records: meta.len(),
                expansion,
                online_unavailable,
                earlier_build,
                networks: Vec::new(),
            },
        };
        nets.summary.networks = nets
            .all()
            .into_iter()
            .map(|(network, g)| NetworkSize {
                network,
                nodes: g.node_count(),
                edges: g.edge_count(),
                total_weight: g.total_weight(),
            })
            .collect();
        Ok(nets)
    }

    /// Available networks in report order.
    pub fn all(&self) -> Vec<(&'static str, &InstanceGraph)> {
        let mut v = vec![("instances", &self.instances)];
        for (name, g) in [
            ("online", &self.online),
            ("expanded", &self.expanded),
            ("earlier", &self.earlier),
        ] {
            if let Some(g) = g {
                v.push((name, g));
            }
        }
        v
    }

    pub fn get(&self, name: &str) -> Option<&InstanceGraph> {
        self.all()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, g)| g)
    }

    pub fn selected(&self, model: ModelKind) -> CliResult<&InstanceGraph> {
        self.get(model.name()).ok_or_else(|| {
            let why = match model {
                ModelKind::Online => self.summary.online_unavailable.clone().unwrap_or_default(),
                ModelKind::Expanded => "no boundary file given".into(),
                ModelKind::Instances => String::new(),
            };
            instnet::Error::Config(format!(
                "the {} network is unavailable: {why}",
                model.name()
            ))
            .into()
        })
    }

    /// Pairs from [`PAIRS`] whose networks both exist.
    pub fn pairs(&self) -> Vec<(&'static str, &'static str)> {
        PAIRS
            .into_iter()
            .filter(|(a, b)| self.get(a).is_some() && self.get(b).is_some())
            .collect()
    }
}
