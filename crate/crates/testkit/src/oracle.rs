//! Brute-force reference implementations.
//!
//! Graphs are read through `node_count`, `labels`, `metas` and `edges` only,
//! then turned into dense matrices or plain sets. Nothing here calls the
//! optimized routines it is meant to check.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use instnet::graph::EdgeRecord;
use instnet::netmodel::UserEdgeRecord;
use instnet::{InstanceGraph, Status};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{guard, KitError, KitResult};

/// Size bound for the `O(n³)` oracles.
pub const CUBIC_LIMIT: usize = 400;
/// Size bound for the `O(n²)` oracles.
pub const QUADRATIC_LIMIT: usize = 3_000;
/// Largest total weight the exact MLF oracle accepts.
pub const MLF_TOTAL_LIMIT: u64 = 3_000;

/// Dense directed weight matrix; `0` means no arc.
pub fn weight_matrix(g: &InstanceGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut w = vec![vec![0.0; n]; n];
    for (s, t, x) in g.edges() {
        w[s][t] = x;
    }
    w
}

/// Symmetric 0/1 adjacency of the undirected view.
pub fn undirected_matrix(g: &InstanceGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (s, t, _) in g.edges() {
        a[s][t] = true;
        a[t][s] = true;
    }
    a
}

fn row_count(row: &[bool]) -> usize {
    row.iter().filter(|&&x| x).count()
}

fn closure(mut r: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let n = r.len();
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Groups of mutually related nodes, each sorted, ordered by smallest member.
fn classes(n: usize, same: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut done = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if done[i] {
            continue;
        }
        let group: Vec<usize> = (i..n).filter(|&j| same(i, j)).collect();
        for &j in &group {
            done[j] = true;
        }
        out.push(group);
    }
    out
}

/// Strongly and weakly connected components by transitive closure.
pub fn components(g: &InstanceGraph) -> KitResult<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let n = g.node_count();
    guard("components", n, CUBIC_LIMIT)?;
    let directed: Vec<Vec<bool>> = weight_matrix(g)
        .into_iter()
        .map(|row| row.into_iter().map(|x| x != 0.0).collect())
        .collect();
    let reach = closure(directed);
    let weak = closure(undirected_matrix(g));
    let scc = classes(n, |i, j| reach[i][j] && reach[j][i]);
    let wcc = classes(n, |i, j| weak[i][j]);
    Ok((scc, wcc))
}

pub fn reciprocity(g: &InstanceGraph) -> Option<f64> {
    let arcs: HashSet<(usize, usize)> = g.edges().map(|(s, t, _)| (s, t)).collect();
    if arcs.is_empty() {
        return None;
    }
    let mutual = arcs
        .iter()
        .filter(|&&(s, t)| arcs.contains(&(t, s)))
        .count();
    Some(mutual as f64 / arcs.len() as f64)
}

/// `(avg_degree, avg_in_degree, pct_sources, pct_sinks, density)`.
pub fn degree_stats(g: &InstanceGraph) -> KitResult<(f64, f64, f64, f64, Option<f64>)> {
    let n = g.node_count();
    guard("degree_stats", n, QUADRATIC_LIMIT)?;
    if n == 0 {
        return Err(KitError::Argument("empty graph".into()));
    }
    let a = undirected_matrix(g);
    let w = weight_matrix(g);
    let links: usize = a.iter().map(|r| row_count(r)).sum();
    let arcs = w.iter().flatten().filter(|&&x| x != 0.0).count();
    let sources = (0..n).filter(|&j| (0..n).all(|i| w[i][j] == 0.0)).count();
    let sinks = (0..n).filter(|&i| w[i].iter().all(|&x| x == 0.0)).count();
    let nf = n as f64;
    let density = (n > 1).then(|| arcs as f64 / (nf * (nf - 1.0)));
    Ok((
        links as f64 / nf,
        arcs as f64 / nf,
        sources as f64 / nf,
        sinks as f64 / nf,
        density,
    ))
}

/// `(transitivity, clustering over degree >= 2, clustering over all nodes)`
/// by enumerating every node triple.
pub fn triadic(g: &InstanceGraph) -> KitResult<(f64, f64, f64)> {
    let n = g.node_count();
    guard("triadic", n, CUBIC_LIMIT)?;
    let a = undirected_matrix(g);
    let mut tri = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            if !a[i][j] {
                continue;
            }
            for k in j + 1..n {
                if a[i][k] && a[j][k] {
                    tri[i] += 1;
                    tri[j] += 1;
                    tri[k] += 1;
                }
            }
        }
    }
    let mut closed = 0u64;
    let mut wedges = 0u64;
    let mut local = Vec::new();
    for v in 0..n {
        let d = row_count(&a[v]) as u64;
        if d >= 2 {
            let pairs = d * (d - 1) / 2;
            closed += tri[v];
            wedges += pairs;
            local.push(tri[v] as f64 / pairs as f64);
        }
    }
    let sum: f64 = local.iter().sum();
    Ok((
        if wedges == 0 {
            0.0
        } else {
            closed as f64 / wedges as f64
        },
        if local.is_empty() {
            0.0
        } else {
            sum / local.len() as f64
        },
        if n == 0 { 0.0 } else { sum / n as f64 },
    ))
}

/// Newman's degree assortativity of the undirected view, written with
/// edge sums.
pub fn assortativity_undirected(g: &InstanceGraph) -> KitResult<Option<f64>> {
    let n = g.node_count();
    guard("assortativity", n, QUADRATIC_LIMIT)?;
    let a = undirected_matrix(g);
    let deg: Vec<f64> = a.iter().map(|r| row_count(r) as f64).collect();
    let (mut m, mut sjk, mut shalf, mut ssq) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] {
                let (x, y) = (deg[i], deg[j]);
                m += 1.0;
                sjk += x * y;
                shalf += 0.5 * (x + y);
                ssq += 0.5 * (x * x + y * y);
            }
        }
    }
    if m == 0.0 {
        return Ok(None);
    }
    let mean = shalf / m;
    let var = ssq / m - mean * mean;
    if var.abs() < 1e-12 * (1.0 + mean * mean) {
        return Ok(None);
    }
    Ok(Some((sjk / m - mean * mean) / var))
}

/// Pearson correlation of `(in + out)` degrees across arcs.
pub fn assortativity_directed(g: &InstanceGraph) -> KitResult<Option<f64>> {
    let n = g.node_count();
    guard("assortativity", n, QUADRATIC_LIMIT)?;
    let w = weight_matrix(g);
    let deg: Vec<f64> = (0..n)
        .map(|v| {
            (0..n).filter(|&u| w[v][u] != 0.0).count() as f64
                + (0..n).filter(|&u| w[u][v] != 0.0).count() as f64
        })
        .collect();
    let xs: Vec<(f64, f64)> = g.edges().map(|(s, t, _)| (deg[s], deg[t])).collect();
    Ok(pearson_two_pass(&xs))
}

fn pearson_two_pass(xs: &[(f64, f64)]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xs.iter().map(|p| p.1).sum::<f64>() / m;
    let cov = xs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / m;
    let vx = xs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / m;
    let vy = xs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / m;
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Average shortest-path length and diameter of the undirected view of the
/// largest weakly connected component, by Floyd–Warshall. Ties between
/// equally large components go to the one holding the smallest node.
pub fn lwcc_paths(g: &InstanceGraph) -> KitResult<Option<(f64, usize)>> {
    let n = g.node_count();
    guard("lwcc_paths", n, CUBIC_LIMIT)?;
    let (_, wcc) = components(g)?;
    let Some(best) = wcc
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
    else {
        return Ok(None);
    };
    let a = undirected_matrix(g);
    let k = best.len();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; k]; k];
    for (x, &u) in best.iter().enumerate() {
        for (y, &v) in best.iter().enumerate() {
            if x == y {
                d[x][y] = 0;
            } else if a[u][v] {
                d[x][y] = 1;
            }
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let (mut sum, mut pairs, mut diam) = (0usize, 0usize, 0usize);
    for (i, row) in d.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i != j && x < INF {
                sum += x;
                pairs += 1;
                diam = diam.max(x);
            }
        }
    }
    Ok((pairs > 0).then(|| (sum as f64 / pairs as f64, diam)))
}

/// `k -> mean over degree-k nodes of their neighbors' mean degree`.
pub fn knn(g: &InstanceGraph) -> KitResult<BTreeMap<usize, f64>> {
    let n = g.node_count();
    guard("knn", n, QUADRATIC_LIMIT)?;
    let a = undirected_matrix(g);
    let deg: Vec<usize> = a.iter().map(|r| row_count(r)).collect();
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for v in 0..n {
        if deg[v] == 0 {
            continue;
        }
        let nb: Vec<usize> = (0..n).filter(|&u| a[v][u]).collect();
        let mean = nb.iter().map(|&u| deg[u] as f64).sum::<f64>() / nb.len() as f64;
        groups.entry(deg[v]).or_default().push(mean);
    }
    Ok(groups
        .into_iter()
        .map(|(k, xs)| (k, xs.iter().sum::<f64>() / xs.len() as f64))
        .collect())
}

/// Which degree a core variant counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreKind {
    Total,
    In,
    Out,
}

/// Coreness from the definition: the k-core is what survives repeatedly
/// deleting nodes of degree below `k`, for `k = 1, 2, ...`.
pub fn coreness(g: &InstanceGraph, kind: CoreKind) -> KitResult<Vec<usize>> {
    let n = g.node_count();
    guard("coreness", n, CUBIC_LIMIT)?;
    let w = weight_matrix(g);
    let a = undirected_matrix(g);
    let degree = |v: usize, alive: &[bool]| -> usize {
        (0..n)
            .filter(|&u| {
                alive[u]
                    && match kind {
                        CoreKind::Total => a[v][u],
                        CoreKind::In => w[u][v] != 0.0,
                        CoreKind::Out => w[v][u] != 0.0,
                    }
            })
            .count()
    };
    let mut core = vec![0usize; n];
    let mut k = 1;
    loop {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&v| alive[v] && degree(v, &alive) < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            for v in drop {
                alive[v] = false;
            }
        }
        if !alive.iter().any(|&x| x) {
            return Ok(core);
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
        k += 1;
    }
}

fn choose(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Exact `P[Bin(T, p) >= w]` for `p = s_out s_in / T²`, in rational
/// arithmetic: `Σ_{x >= w} C(T, x) a^x (D - a)^(T - x) / D^T` with
/// `a = s_out s_in` and `D = T²`.
pub fn mlf_pvalue_exact(w: u64, s_out: u64, s_in: u64, total: u64) -> KitResult<f64> {
    guard("mlf_pvalue_exact", total as usize, MLF_TOTAL_LIMIT as usize)?;
    if total == 0 || s_out > total || s_in > total {
        return Err(KitError::Argument(
            "strengths must lie in [0, T] with T > 0".into(),
        ));
    }
    let a = BigUint::from(s_out) * BigUint::from(s_in);
    let d = BigUint::from(total) * BigUint::from(total);
    let rest = &d - &a;
    let mut num = BigUint::zero();
    for x in w..=total {
        num += choose(total, x) * a.pow(x as u32) * rest.pow((total - x) as u32);
    }
    let den = d.pow(total as u32);
    let r = BigRational::new(num.into(), den.into());
    r.to_f64()
        .ok_or_else(|| KitError::Argument("p-value not representable".into()))
}

/// Disparity-filter p-value as the integral of the null density
/// `(k - 1)(1 - x)^(k - 2)` over `[p, 1]`, by adaptive Simpson quadrature.
pub fn disparity_integral(p: f64, k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    let km = (k - 1) as f64;
    let f = |x: f64| km * (1.0 - x).max(0.0).powf(km - 1.0);
    adaptive_simpson(&f, p.clamp(0.0, 1.0), 1.0, 1e-13, 60)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * eps {
            return l + r + (l + r - whole) / 15.0;
        }
        rec(f, a, m, eps / 2.0, l, depth - 1) + rec(f, m, b, eps / 2.0, r, depth - 1)
    }
    rec(f, a, b, eps, simpson(f, a, b), depth)
}

/// PageRank by iterating the dense Google matrix to a fixed point.
pub fn pagerank(g: &InstanceGraph, damping: f64, weighted: bool) -> KitResult<Vec<f64>> {
    let n = g.node_count();
    guard("pagerank", n, 1_000)?;
    if n == 0 {
        return Err(KitError::Argument("empty graph".into()));
    }
    let w = weight_matrix(g);
    let nf = n as f64;
    // m[i][j]: probability of stepping from i to j
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row: Vec<f64> = w[i]
            .iter()
            .map(|&x| if x != 0.0 && !weighted { 1.0 } else { x })
            .collect();
        let out: f64 = row.iter().sum();
        for j in 0..n {
            let follow = if out == 0.0 { 1.0 / nf } else { row[j] / out };
            m[i][j] = damping * follow + (1.0 - damping) / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| x[i] * m[i][j]).sum())
            .collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    Ok(x)
}

/// Kendall τ over shared labels via explicit ordered-pair sets:
/// `1 - 2Δ / (N(N - 1))`, Δ the size of the symmetric difference.
pub fn kendall_tau(r1: &[String], r2: &[String]) -> KitResult<Option<f64>> {
    guard("kendall_tau", r1.len().max(r2.len()), QUADRATIC_LIMIT)?;
    let in2: HashSet<&String> = r2.iter().collect();
    let in1: HashSet<&String> = r1.iter().collect();
    let pairs = |r: &[String], other: &HashSet<&String>| -> HashSet<(String, String)> {
        let shared: Vec<&String> = r.iter().filter(|l| other.contains(l)).collect();
        let mut set = HashSet::new();
        for i in 0..shared.len() {
            for j in i + 1..shared.len() {
                set.insert((shared[i].clone(), shared[j].clone()));
            }
        }
        set
    };
    let p1 = pairs(r1, &in2);
    let p2 = pairs(r2, &in1);
    let n = r1.iter().filter(|l| in2.contains(l)).count() as f64;
    if n < 2.0 {
        return Ok(None);
    }
    let delta = p1.symmetric_difference(&p2).count() as f64;
    Ok(Some(1.0 - 2.0 * delta / (n * (n - 1.0))))
}

/// Fagin's intersection metric with literal prefix sets.
pub fn fagin(r1: &[String], r2: &[String], k: usize) -> KitResult<f64> {
    guard("fagin", k, QUADRATIC_LIMIT)?;
    if k == 0 || k > r1.len() || k > r2.len() {
        return Err(KitError::Argument(format!("k = {k} out of range")));
    }
    let mut total = 0.0;
    for q in 1..=k {
        let a: HashSet<&String> = r1[..q].iter().collect();
        let b: HashSet<&String> = r2[..q].iter().collect();
        total += a.intersection(&b).count() as f64 / q as f64;
    }
    Ok(total / k as f64)
}

/// Modularity from the double sum over node pairs.
///
/// Undirected: `Q = (1/2m) Σ_ij [A_ij - k_i k_j / 2m] δ(c_i, c_j)` on the
/// unit-weight undirected view. Directed:
/// `Q = (1/W) Σ_ij [W_ij - s_i^out s_j^in / W] δ(c_i, c_j)`.
pub fn modularity(
    g: &InstanceGraph,
    community: &[usize],
    directed_weighted: bool,
) -> KitResult<Option<f64>> {
    let n = g.node_count();
    guard("modularity", n, QUADRATIC_LIMIT)?;
    if community.len() != n {
        return Err(KitError::Argument("partition size mismatch".into()));
    }
    let mut q = 0.0;
    if directed_weighted {
        let w = weight_matrix(g);
        let total: f64 = w.iter().flatten().sum();
        if total == 0.0 {
            return Ok(None);
        }
        let s_out: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
        let s_in: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[i][j]).sum()).collect();
        for i in 0..n {
            for j in 0..n {
                if community[i] == community[j] {
                    q += w[i][j] - s_out[i] * s_in[j] / total;
                }
            }
        }
        Ok(Some(q / total))
    } else {
        let a = undirected_matrix(g);
        let deg: Vec<f64> = a.iter().map(|r| row_count(r) as f64).collect();
        let two_m: f64 = deg.iter().sum();
        if two_m == 0.0 {
            return Ok(None);
        }
        for i in 0..n {
            for j in 0..n {
                if community[i] == community[j] {
                    q += f64::from(u8::from(a[i][j])) - deg[i] * deg[j] / two_m;
                }
            }
        }
        Ok(Some(q / two_m))
    }
}

/// Conductance between node sets `a` and `b` on the subgraph they induce:
/// cut over the smaller volume, volumes summing each member's incident arcs
/// inside the union.
pub fn conductance(g: &InstanceGraph, a: &[usize], b: &[usize], weighted: bool) -> Option<f64> {
    let sa: HashSet<usize> = a.iter().copied().collect();
    let sb: HashSet<usize> = b.iter().copied().collect();
    let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
    for (s, t, w) in g.edges() {
        let x = if weighted { w } else { 1.0 };
        let inside = |v: usize| sa.contains(&v) || sb.contains(&v);
        if !(inside(s) && inside(t)) {
            continue;
        }
        if sa.contains(&s) != sa.contains(&t) {
            cut += x;
        }
        for v in [s, t] {
            if sa.contains(&v) {
                vol_a += x;
            } else {
                vol_b += x;
            }
        }
    }
    let vol = f64::min(vol_a, vol_b);
    (vol > 0.0).then(|| cut / vol)
}

/// KS distance between the empirical CDF of `data ∩ [lo, hi]` and `cdf`,
/// checked at every integer of `[lo - 1, hi]`.
pub fn ks_naive(data: &[u64], lo: u64, hi: u64, cdf: impl Fn(u64) -> f64) -> KitResult<f64> {
    guard("ks_naive", (hi.saturating_sub(lo)) as usize, 5_000_000)?;
    let inside: Vec<u64> = data
        .iter()
        .copied()
        .filter(|&x| lo <= x && x <= hi)
        .collect();
    if inside.is_empty() {
        return Err(KitError::Argument("no data in range".into()));
    }
    let n = inside.len() as f64;
    let mut d: f64 = 0.0;
    if lo > 0 {
        d = cdf(lo - 1).abs();
    }
    for x in lo..=hi {
        let emp = inside.iter().filter(|&&v| v <= x).count() as f64 / n;
        d = d.max((emp - cdf(x)).abs());
    }
    Ok(d)
}

/// `ζ(s, q)` by direct summation of the first terms plus an
/// Euler–Maclaurin remainder.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const TERMS: u64 = 2_000;
    let mut sum = 0.0;
    for k in (0..TERMS).rev() {
        sum += (q + k as f64).powf(-s);
    }
    let x = q + TERMS as f64;
    sum + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s / 12.0 * x.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * x.powf(-s - 3.0)
}

/// Discrete power-law CDF on `x >= x_min`.
pub fn powerlaw_cdf(alpha: f64, x_min: u64, x: u64) -> f64 {
    if x < x_min {
        return 0.0;
    }
    1.0 - hurwitz_zeta(alpha, (x + 1) as f64) / hurwitz_zeta(alpha, x_min as f64)
}

/// Maximum-likelihood α for a discrete power-law tail, by golden-section
/// search on the log-likelihood over `α ∈ (1, 8]`.
pub fn powerlaw_alpha(tail: &[u64], x_min: u64) -> f64 {
    let n = tail.len() as f64;
    let mean_log = tail.iter().map(|&x| (x as f64).ln()).sum::<f64>() / n;
    let nll = |a: f64| a * mean_log + hurwitz_zeta(a, x_min as f64).ln();
    let (mut lo, mut hi) = (1.0 + 1e-6, 8.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (nll(c), nll(d));
    while hi - lo > 1e-9 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = nll(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = nll(d);
        }
    }
    0.5 * (lo + hi)
}

/// Power-law fit with the `x_min` scan done in full: every distinct value
/// leaving at least `min_tail` observations is tried and the KS-minimizing
/// one kept. Returns `(x_min, α, KS)`.
pub fn powerlaw_scan(data: &[u64], min_tail: usize) -> KitResult<(u64, f64, f64)> {
    guard("powerlaw_scan", data.len(), 20_000)?;
    let distinct: BTreeSet<u64> = data.iter().copied().filter(|&x| x >= 1).collect();
    let hi = *distinct
        .iter()
        .next_back()
        .ok_or_else(|| KitError::Argument("no positive data".into()))?;
    let mut best: Option<(u64, f64, f64)> = None;
    for &x_min in &distinct {
        let tail: Vec<u64> = data.iter().copied().filter(|&x| x >= x_min).collect();
        if tail.len() < min_tail.max(2) || tail.iter().all(|&x| x == tail[0]) {
            continue;
        }
        let alpha = powerlaw_alpha(&tail, x_min);
        let ks = ks_naive(&tail, x_min, hi, |x| powerlaw_cdf(alpha, x_min, x))?;
        if best.is_none_or(|b| ks < b.2) {
            best = Some((x_min, alpha, ks));
        }
    }
    best.ok_or_else(|| KitError::Argument("no admissible x_min".into()))
}

/// Instance-level arcs from user records by set construction:
/// `(i, j) -> |{(u, v) : u@i follows v@j}|` for `i != j`, or the number of
/// distinct followers `u@i` when `source_users` is set.
pub fn projection(
    records: &[UserEdgeRecord],
    source_users: bool,
) -> BTreeMap<(String, String), f64> {
    let mut pairs: BTreeMap<(String, String), BTreeSet<(String, String)>> = BTreeMap::new();
    for r in records {
        if r.source_instance == r.target_instance {
            continue;
        }
        let key = (r.source_instance.clone(), r.target_instance.clone());
        let who = if source_users {
            (r.source_user.clone(), String::new())
        } else {
            (r.source_user.clone(), r.target_user.clone())
        };
        pairs.entry(key).or_default().insert(who);
    }
    pairs
        .into_iter()
        .map(|(k, s)| (k, s.len() as f64))
        .collect()
}

/// Labelled arc map of a graph, for comparing against the set oracles.
pub fn arc_map(g: &InstanceGraph) -> BTreeMap<(String, String), f64> {
    let labels = g.labels();
    g.edges()
        .map(|(s, t, w)| ((labels[s].clone(), labels[t].clone()), w))
        .collect()
}

/// Online node labels and the arcs among them; with `drop_isolated`, nodes
/// without any such arc are left out.
pub fn online(
    g: &InstanceGraph,
    drop_isolated: bool,
) -> (BTreeSet<String>, BTreeMap<(String, String), f64>) {
    let labels = g.labels();
    let on: BTreeSet<String> = g
        .metas()
        .iter()
        .zip(labels)
        .filter(|(m, _)| m.status == Status::Online)
        .map(|(_, l)| l.clone())
        .collect();
    let arcs: BTreeMap<(String, String), f64> = arc_map(g)
        .into_iter()
        .filter(|((s, t), _)| on.contains(s) && on.contains(t))
        .collect();
    let nodes = if drop_isolated {
        arcs.keys()
            .flat_map(|(s, t)| [s.clone(), t.clone()])
            .collect()
    } else {
        on
    };
    (nodes, arcs)
}

/// Union of the graph's arcs with boundary arcs that touch a known node.
/// Boundary arcs repeating an existing arc leave it unchanged; repeated
/// boundary arcs accumulate.
pub fn expanded(
    g: &InstanceGraph,
    boundary: &[EdgeRecord],
) -> (BTreeSet<String>, BTreeMap<(String, String), f64>) {
    let known: BTreeSet<String> = g.labels().iter().cloned().collect();
    let original = arc_map(g);
    let mut arcs = original.clone();
    let mut nodes = known.clone();
    for r in boundary {
        if !(known.contains(&r.source) || known.contains(&r.target)) {
            continue;
        }
        let key = (r.source.clone(), r.target.clone());
        if original.contains_key(&key) {
            continue;
        }
        nodes.insert(r.source.clone());
        nodes.insert(r.target.clone());
        if r.source != r.target {
            *arcs.entry(key).or_insert(0.0) += r.weight.unwrap_or(1.0);
        }
    }
    (nodes, arcs)
}
