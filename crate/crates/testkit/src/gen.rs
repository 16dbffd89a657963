//! Reproducible synthetic inputs.
//!
//! Every generator takes a 64-bit seed. Independent parts of one generator
//! draw from separate ChaCha streams of that seed, so adding draws to one
//! part never shifts the others.

use std::collections::HashSet;

use instnet::graph::{EdgeRecord, GraphBuilder, MetaRecord};
use instnet::netmodel::UserEdgeRecord;
use instnet::{InstanceGraph, NodeMeta, Platform, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::{KitError, KitResult};

/// Generator stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_prob(name: &str, p: f64) -> KitResult<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(KitError::Argument(format!(
            "{name} must be in [0, 1], got {p}"
        )))
    }
}

fn check_size(name: &str, n: usize) -> KitResult<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(KitError::Argument(format!("{name} must be at least 1")))
    }
}

pub fn node_label(i: usize) -> String {
    format!("v{i}")
}

/// A JSON-describable generator request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    GnpDirected {
        n: usize,
        p: f64,
        #[serde(default = "one")]
        max_weight: u64,
        seed: u64,
    },
    GnmDirected {
        n: usize,
        m: usize,
        seed: u64,
    },
    PlantedPartition {
        blocks: usize,
        block_size: usize,
        p_in: f64,
        p_out: f64,
        seed: u64,
    },
    FederatedSim(FederatedSimSpec),
    PowerlawSample {
        n: usize,
        alpha: f64,
        x_min: u64,
        seed: u64,
    },
    LognormalSample {
        n: usize,
        mu: f64,
        sigma: f64,
        seed: u64,
    },
    GeometricSample {
        n: usize,
        p: f64,
        seed: u64,
    },
    PoissonSample {
        n: usize,
        mean: f64,
        seed: u64,
    },
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone)]
pub enum Generated {
    Graph {
        graph: InstanceGraph,
        /// Planted community of each node, when the generator has one.
        truth: Option<Vec<usize>>,
    },
    Federation(FederatedSim),
    Sample(Vec<u64>),
}

pub fn generate(spec: &GeneratorSpec) -> KitResult<Generated> {
    Ok(match *spec {
        GeneratorSpec::GnpDirected {
            n,
            p,
            max_weight,
            seed,
        } => Generated::Graph {
            graph: gnp_directed(n, p, max_weight, seed)?,
            truth: None,
        },
        GeneratorSpec::GnmDirected { n, m, seed } => Generated::Graph {
            graph: gnm_directed(n, m, seed)?,
            truth: None,
        },
        GeneratorSpec::PlantedPartition {
            blocks,
            block_size,
            p_in,
            p_out,
            seed,
        } => {
            let (graph, truth) = planted_partition(blocks, block_size, p_in, p_out, seed)?;
            Generated::Graph {
                graph,
                truth: Some(truth),
            }
        }
        GeneratorSpec::FederatedSim(ref s) => Generated::Federation(federated_sim(s)?),
        GeneratorSpec::PowerlawSample {
            n,
            alpha,
            x_min,
            seed,
        } => Generated::Sample(powerlaw_sample(n, alpha, x_min, &mut stream(seed, 0))?),
        GeneratorSpec::LognormalSample { n, mu, sigma, seed } => {
            Generated::Sample(lognormal_sample(n, mu, sigma, &mut stream(seed, 0))?)
        }
        GeneratorSpec::GeometricSample { n, p, seed } => {
            Generated::Sample(geometric_sample(n, p, &mut stream(seed, 0))?)
        }
        GeneratorSpec::PoissonSample { n, mean, seed } => {
            Generated::Sample(poisson_sample(n, mean, &mut stream(seed, 0))?)
        }
    })
}

/// Directed G(n, p): each ordered pair `(i, j)`, `i != j`, is an arc with
/// probability `p`, weighted uniformly in `1..=max_weight`.
pub fn gnp_directed(n: usize, p: f64, max_weight: u64, seed: u64) -> KitResult<InstanceGraph> {
    check_size("n", n)?;
    check_prob("p", p)?;
    check_size("max_weight", max_weight as usize)?;
    let mut rng = stream(seed, 0);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.node(&node_label(i));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                let w = rng.random_range(1..=max_weight);
                b.add_arc(i, j, w as f64);
            }
        }
    }
    Ok(b.build().0)
}

/// Directed G(n, m): exactly `m` distinct unit-weight arcs drawn uniformly
/// among the `n (n - 1)` ordered pairs. Runs in expected `O(m)` while `m`
/// stays well below the number of pairs.
pub fn gnm_directed(n: usize, m: usize, seed: u64) -> KitResult<InstanceGraph> {
    check_size("n", n)?;
    if m as u128 > (n as u128) * (n as u128 - 1) / 2 {
        return Err(KitError::Argument(format!(
            "m = {m} exceeds half of the {n} (n - 1) ordered pairs"
        )));
    }
    let mut rng = stream(seed, 0);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.node(&node_label(i));
    }
    let mut seen = HashSet::with_capacity(m);
    while seen.len() < m {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j && seen.insert((i, j)) {
            b.add_arc(i, j, 1.0);
        }
    }
    Ok(b.build().0)
}

/// Unit-weight digraph with `blocks` groups of `block_size` nodes; arcs
/// inside a group appear with `p_in`, across groups with `p_out`.
pub fn planted_partition(
    blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> KitResult<(InstanceGraph, Vec<usize>)> {
    check_size("blocks", blocks)?;
    check_size("block_size", block_size)?;
    check_prob("p_in", p_in)?;
    check_prob("p_out", p_out)?;
    let n = blocks * block_size;
    let truth: Vec<usize> = (0..n).map(|v| v / block_size).collect();
    let mut rng = stream(seed, 0);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.node(&node_label(i));
    }
    for i in 0..n {
        for j in 0..n {
            let p = if truth[i] == truth[j] { p_in } else { p_out };
            if i != j && rng.random::<f64>() < p {
                b.add_arc(i, j, 1.0);
            }
        }
    }
    Ok((b.build().0, truth))
}

/// Parameters of the simulated federation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FederatedSimSpec {
    pub instances: usize,
    pub online_fraction: f64,
    /// Lognormal parameters of users per instance.
    pub users_mu: f64,
    pub users_sigma: f64,
    /// Mean number of follows per user.
    pub mean_follows: f64,
    /// Share of follows that stay inside the user's own instance.
    pub intra_fraction: f64,
    /// Exponent of the size preference when picking a remote instance.
    pub size_bias: f64,
    pub other_instances: usize,
    pub boundary_arcs: usize,
    pub seed: u64,
}

impl Default for FederatedSimSpec {
    fn default() -> Self {
        FederatedSimSpec {
            instances: 120,
            online_fraction: 0.8,
            users_mu: 2.5,
            users_sigma: 1.1,
            mean_follows: 4.0,
            intra_fraction: 0.3,
            size_bias: 1.0,
            other_instances: 30,
            boundary_arcs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederatedSim {
    pub records: Vec<UserEdgeRecord>,
    pub meta: Vec<MetaRecord>,
    /// Arcs between Mastodon instances and instances of other platforms.
    pub boundary: Vec<EdgeRecord>,
}

pub fn instance_label(i: usize) -> String {
    format!("inst{i:04}.example")
}

fn other_label(i: usize) -> String {
    format!("other{i:03}.example")
}

/// Opaque user identifier, stable for a given `(instance, user)` pair.
fn user_hash(instance: usize, user: usize) -> String {
    let mut z = ((instance as u64) << 32 | user as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    format!("{:016x}", z ^ (z >> 31))
}

/// A federation: lognormal instance sizes, users following others with a
/// preference for large instances, online/offline status, and a boundary of
/// non-Mastodon instances.
pub fn federated_sim(spec: &FederatedSimSpec) -> KitResult<FederatedSim> {
    check_size("instances", spec.instances)?;
    check_prob("online_fraction", spec.online_fraction)?;
    check_prob("intra_fraction", spec.intra_fraction)?;
    if !(spec.users_sigma > 0.0 && spec.mean_follows > 0.0) {
        return Err(KitError::Argument(
            "users_sigma and mean_follows must be positive".into(),
        ));
    }
    let n = spec.instances;
    let sizes_law = LogNormal::new(spec.users_mu, spec.users_sigma)
        .map_err(|e| KitError::Argument(e.to_string()))?;
    let follows_law =
        Poisson::new(spec.mean_follows).map_err(|e| KitError::Argument(e.to_string()))?;

    let mut rng = stream(spec.seed, 0);
    let users: Vec<usize> = (0..n)
        .map(|_| (sizes_law.sample(&mut rng).round() as usize).max(1))
        .collect();

    let mut rng = stream(spec.seed, 1);
    let meta = (0..n)
        .map(|i| MetaRecord {
            label: instance_label(i),
            meta: NodeMeta {
                status: if rng.random::<f64>() < spec.online_fraction {
                    Status::Online
                } else {
                    Status::Offline
                },
                platform: Platform::Mastodon,
            },
        })
        .collect();

    // cumulative preference weights for remote targets
    let pref: Vec<f64> = users
        .iter()
        .map(|&u| (u as f64).powf(spec.size_bias))
        .collect();
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &w in &pref {
        acc += w;
        cum.push(acc);
    }

    let mut rng = stream(spec.seed, 2);
    let mut records = Vec::new();
    for (i, &count) in users.iter().enumerate() {
        for u in 0..count {
            let k = follows_law.sample(&mut rng) as usize;
            for _ in 0..k {
                let j = if n == 1 || rng.random::<f64>() < spec.intra_fraction {
                    i
                } else {
                    let x = rng.random::<f64>() * acc;
                    cum.partition_point(|&c| c <= x).min(n - 1)
                };
                let v = rng.random_range(0..users[j]);
                if i == j && u == v {
                    continue;
                }
                records.push(UserEdgeRecord::new(
                    &user_hash(i, u),
                    &instance_label(i),
                    &user_hash(j, v),
                    &instance_label(j),
                ));
            }
        }
    }

    let mut rng = stream(spec.seed, 3);
    let mut boundary = Vec::with_capacity(spec.boundary_arcs);
    if spec.other_instances > 0 {
        for _ in 0..spec.boundary_arcs {
            let m = instance_label(rng.random_range(0..n));
            let o = other_label(rng.random_range(0..spec.other_instances));
            let w = rng.random_range(1..=5u32) as f64;
            boundary.push(if rng.random::<bool>() {
                EdgeRecord::new(m, o, w)
            } else {
                EdgeRecord::new(o, m, w)
            });
        }
    }

    Ok(FederatedSim {
        records,
        meta,
        boundary,
    })
}

/// Random user-level records spread over `instances` instances, with
/// duplicates and intra-instance follows mixed in.
pub fn user_records(
    count: usize,
    instances: usize,
    users_per_instance: usize,
    seed: u64,
) -> KitResult<Vec<UserEdgeRecord>> {
    check_size("instances", instances)?;
    check_size("users_per_instance", users_per_instance)?;
    let mut rng = stream(seed, 0);
    let pick = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(0..instances),
            rng.random_range(0..users_per_instance),
        )
    };
    let mut out: Vec<UserEdgeRecord> = Vec::with_capacity(count);
    while out.len() < count {
        if !out.is_empty() && rng.random::<f64>() < 0.05 {
            let dup = out[rng.random_range(0..out.len())].clone();
            out.push(dup);
            continue;
        }
        let (si, su) = pick(&mut rng);
        let (ti, tu) = pick(&mut rng);
        if si == ti && su == tu {
            continue;
        }
        out.push(UserEdgeRecord::new(
            &user_hash(si, su),
            &instance_label(si),
            &user_hash(ti, tu),
            &instance_label(ti),
        ));
    }
    Ok(out)
}

/// Discrete power law on `x >= x_min` by inverse CDF: an exact table up to
/// a cutoff, then the continuous tail approximation beyond it.
pub fn powerlaw_sample(
    n: usize,
    alpha: f64,
    x_min: u64,
    rng: &mut ChaCha8Rng,
) -> KitResult<Vec<u64>> {
    if !(alpha > 1.0) || x_min == 0 {
        return Err(KitError::Argument("need alpha > 1 and x_min >= 1".into()));
    }
    const SPAN: u64 = 200_000;
    let cutoff = x_min + SPAN;
    let mut cdf = Vec::with_capacity(SPAN as usize);
    let mut acc = 0.0;
    for x in x_min..cutoff {
        acc += (x as f64).powf(-alpha);
        cdf.push(acc);
    }
    // Euler–Maclaurin estimate of the sum from `cutoff` to infinity
    let c = cutoff as f64;
    let tail = c.powf(1.0 - alpha) / (alpha - 1.0)
        + 0.5 * c.powf(-alpha)
        + alpha / 12.0 * c.powf(-alpha - 1.0);
    let total = acc + tail;
    Ok((0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            if u < acc {
                x_min + cdf.partition_point(|&v| v <= u) as u64
            } else {
                let r: f64 = rng.random();
                let x = (c - 0.5) * (1.0 - r).powf(-1.0 / (alpha - 1.0)) + 0.5;
                (x.floor() as u64).max(cutoff)
            }
        })
        .collect())
}

/// Lognormal draws rounded to the nearest integer, zeros dropped and redrawn.
pub fn lognormal_sample(
    n: usize,
    mu: f64,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> KitResult<Vec<u64>> {
    let law = LogNormal::new(mu, sigma).map_err(|e| KitError::Argument(e.to_string()))?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = law.sample(rng).round() as u64;
        if x >= 1 {
            out.push(x);
        }
    }
    Ok(out)
}

/// Geometric law on `1, 2, ...` with success probability `p`.
pub fn geometric_sample(n: usize, p: f64, rng: &mut ChaCha8Rng) -> KitResult<Vec<u64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(KitError::Argument(format!("p must be in (0, 1), got {p}")));
    }
    let q = (1.0 - p).ln();
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            1 + ((1.0 - u).ln() / q).floor() as u64
        })
        .collect())
}

pub fn poisson_sample(n: usize, mean: f64, rng: &mut ChaCha8Rng) -> KitResult<Vec<u64>> {
    let law = Poisson::new(mean).map_err(|e| KitError::Argument(e.to_string()))?;
    Ok((0..n).map(|_| law.sample(rng) as u64).collect())
}
