//! PageRank prestige and ranking comparison (Kendall τ, Fagin's intersection).

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InstanceGraph;
use crate::macrostats::StatsReport;

pub const TIE_BREAK: &str = "score descending, then label ascending";

/// Labels ordered by descending score, ties broken by ascending label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    labels: Vec<String>,
    scores: Vec<f64>,
    pub tie_break: String,
}

impl RankedList {
    pub fn from_scores<I>(scores: I) -> Self
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut rows: Vec<(String, f64)> = scores.into_iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (labels, scores) = rows.into_iter().unzip();
        RankedList {
            labels,
            scores,
            tie_break: TIE_BREAK.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.scores.iter().copied())
    }

    pub fn reversed(&self) -> RankedList {
        RankedList {
            labels: self.labels.iter().rev().cloned().collect(),
            scores: self.scores.iter().rev().copied().collect(),
            tie_break: "reversed".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Use arc weights as transition weights.
    pub weighted: bool,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 10_000,
            weighted: true,
        }
    }
}

/// PageRank scores by power iteration, in node-index order.
///
/// Transition probabilities are proportional to out-arc weights; the mass of
/// dangling nodes is spread uniformly. Stops once the L1 change drops below
/// `tol`.
pub fn pagerank_scores(g: &InstanceGraph, cfg: &PageRankConfig) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Argument("pagerank needs a non-empty graph".into()));
    }
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(Error::Argument(format!(
            "damping must be in (0, 1), got {}",
            cfg.damping
        )));
    }
    let d = cfg.damping;
    let nf = n as f64;
    let out_total: Vec<f64> = (0..n)
        .map(|v| {
            if cfg.weighted {
                g.out_strength(v)
            } else {
                g.out_degree(v) as f64
            }
        })
        .collect();

    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&v| out_total[v] == 0.0).map(|v| x[v]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        for (j, slot) in next.iter_mut().enumerate() {
            let mut inflow = 0.0;
            for (&i, &w) in g.in_neighbors(j).iter().zip(g.in_weights(j)) {
                let w = if cfg.weighted { w } else { 1.0 };
                inflow += x[i] * w / out_total[i];
            }
            *slot = base + d * inflow;
        }
        let sum: f64 = next.iter().sum();
        residual = 0.0;
        for (a, b) in x.iter_mut().zip(next.iter()) {
            let v = b / sum;
            residual += (v - *a).abs();
            *a = v;
        }
        if residual < cfg.tol {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        residual,
    })
}

pub fn pagerank(g: &InstanceGraph, cfg: &PageRankConfig) -> Result<RankedList> {
    let x = pagerank_scores(g, cfg)?;
    Ok(RankedList::from_scores(
        x.into_iter()
            .enumerate()
            .map(|(v, s)| (g.label(v).to_owned(), s)),
    ))
}

/// Ranking by a per-node integer score such as degree.
pub fn rank_by<F: Fn(usize) -> f64>(g: &InstanceGraph, score: F) -> RankedList {
    RankedList::from_scores((0..g.node_count()).map(|v| (g.label(v).to_owned(), score(v))))
}

/// Kendall τ over the labels both lists share: `1 - 2Δ/(N(N-1))`, where Δ
/// is the size of the symmetric difference of the two ordered-pair sets.
pub fn kendall_tau(r1: &RankedList, r2: &RankedList) -> Result<f64> {
    let pos2: HashMap<&str, usize> = r2
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut seq: Vec<usize> = r1
        .labels
        .iter()
        .filter_map(|l| pos2.get(l.as_str()).copied())
        .collect();
    let n = seq.len();
    if n < 2 {
        return Err(Error::UndefinedStatistic("kendall_tau"));
    }
    let discordant = count_inversions(&mut seq);
    // each discordant pair appears in both symmetric-difference halves
    let delta = 2.0 * discordant as f64;
    Ok(1.0 - 2.0 * delta / (n as f64 * (n as f64 - 1.0)))
}

/// Inversions by merge sort; sorts `v` in place.
fn count_inversions(v: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            merged.push(v[i]);
            i += 1;
        } else {
            merged.push(v[j]);
            inv += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    inv
}

/// Fagin's intersection metric over the top `k`:
/// `(1/k) Σ_{q=1..k} |top_q(r1) ∩ top_q(r2)| / q`.
pub fn fagin_intersection(r1: &RankedList, r2: &RankedList, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if k > r1.len() || k > r2.len() {
        return Err(Error::Argument(format!(
            "k = {k} exceeds list lengths ({}, {})",
            r1.len(),
            r2.len()
        )));
    }
    // 1: seen in r1's prefix, 2: in r2's prefix, 3: both
    let mut seen: HashMap<&str, u8> = HashMap::new();
    let mut overlap = 0usize;
    let mut total = 0.0;
    for q in 0..k {
        for (label, bit) in [(r1.labels[q].as_str(), 1u8), (r2.labels[q].as_str(), 2u8)] {
            let e = seen.entry(label).or_insert(0);
            if *e & bit == 0 {
                *e |= bit;
                if *e == 3 {
                    overlap += 1;
                }
            }
        }
        total += overlap as f64 / (q + 1) as f64;
    }
    Ok(total / k as f64)
}

/// Writes `label,score` lines.
pub fn write_ranking<W: Write>(r: &RankedList, mut w: W) -> Result<()> {
    writeln!(w, "label,score")?;
    for (l, s) in r.iter() {
        writeln!(w, "{l},{s:e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub statistic: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `100 (a - b) / |b|`; zero when `a = b`, `None` where either side is
    /// undefined or only `b` is zero.
    pub pct_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffTable {
    pub decimals: u32,
    pub rows: Vec<DiffRow>,
}

/// Percentage change of every statistic of `a` relative to `b`.
pub fn compare_networks(a: &StatsReport, b: &StatsReport, decimals: u32) -> DiffTable {
    let scale = 10f64.powi(decimals as i32);
    let rows = a
        .fields()
        .into_iter()
        .zip(b.fields())
        .map(|((name, va), (_, vb))| {
            let pct = match (va, vb) {
                (Some(x), Some(y)) if x == y => Some(0.0),
                (Some(x), Some(y)) if y != 0.0 => {
                    Some(((100.0 * (x - y) / y.abs()) * scale).round() / scale)
                }
                _ => None,
            };
            DiffRow {
                statistic: name.to_owned(),
                a: va,
                b: vb,
                pct_change: pct.map(|p| if p == 0.0 { 0.0 } else { p }),
            }
        })
        .collect();
    DiffTable { decimals, rows }
}
