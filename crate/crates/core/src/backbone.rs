//! Backbone extraction: the directed disparity filter and the marginal
//! likelihood filter (MLF).

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InstanceGraph, NodeIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackboneModel {
    Disparity,
    Mlf,
}

impl BackboneModel {
    pub fn name(self) -> &'static str {
        match self {
            BackboneModel::Disparity => "disparity",
            BackboneModel::Mlf => "mlf",
        }
    }
}

/// p-value of one arc under a null model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSignificance {
    pub source: NodeIdx,
    pub target: NodeIdx,
    pub weight: f64,
    pub model: BackboneModel,
    pub p_value: f64,
    /// Disparity only: value seen from the source's outgoing arcs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_out: Option<f64>,
    /// Disparity only: value seen from the target's incoming arcs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_in: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthTable {
    pub s_in: Vec<f64>,
    pub s_out: Vec<f64>,
    pub total: f64,
}

pub fn strength_table(g: &InstanceGraph) -> StrengthTable {
    let n = g.node_count();
    StrengthTable {
        s_in: (0..n).map(|v| g.in_strength(v)).collect(),
        s_out: (0..n).map(|v| g.out_strength(v)).collect(),
        total: g.total_weight(),
    }
}

/// `(1 - p)^(k - 1)`, the probability under uniform strength redistribution
/// that one of `k` arcs carries at least a fraction `p` of the strength.
/// A single arc is never significant.
pub fn disparity_alpha(p: f64, k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    ((k - 1) as f64 * (-p).ln_1p()).exp().clamp(0.0, 1.0)
}

/// `(α_out, α_in)` of arc `(s, t)`.
pub fn disparity_pvalue(g: &InstanceGraph, s: NodeIdx, t: NodeIdx) -> Result<(f64, f64)> {
    let w = g
        .weight(s, t)
        .ok_or_else(|| Error::Argument(format!("no arc {} -> {}", g.label(s), g.label(t))))?;
    Ok((
        disparity_alpha(w / g.out_strength(s), g.out_degree(s)),
        disparity_alpha(w / g.in_strength(t), g.in_degree(t)),
    ))
}

pub fn disparity_pvalues(g: &InstanceGraph) -> Vec<EdgeSignificance> {
    let s_out: Vec<f64> = (0..g.node_count()).map(|v| g.out_strength(v)).collect();
    let s_in: Vec<f64> = (0..g.node_count()).map(|v| g.in_strength(v)).collect();
    g.edges()
        .map(|(s, t, w)| {
            let a_out = disparity_alpha(w / s_out[s], g.out_degree(s));
            let a_in = disparity_alpha(w / s_in[t], g.in_degree(t));
            EdgeSignificance {
                source: s,
                target: t,
                weight: w,
                model: BackboneModel::Disparity,
                p_value: a_out.min(a_in),
                alpha_out: Some(a_out),
                alpha_in: Some(a_in),
            }
        })
        .collect()
}

/// MLF p-value `P[Bin(T, p) >= w]` with `p = s_out(i) s_in(j) / T²`.
pub fn mlf_pvalue(w: u64, s_out: u64, s_in: u64, total: u64) -> f64 {
    let t = total as f64;
    let p = (s_out as f64 / t) * (s_in as f64 / t);
    binomial_sf(w, total, p)
}

/// MLF p-values of every arc. Weights must be positive integers.
pub fn mlf_pvalues(g: &InstanceGraph) -> Result<Vec<EdgeSignificance>> {
    let as_count = |w: f64| -> Result<u64> {
        if w.fract() != 0.0 || w < 1.0 || w > 2f64.powi(53) {
            return Err(Error::Validation(format!(
                "MLF needs integer multiplicities as weights, found {w}"
            )));
        }
        Ok(w as u64)
    };
    let edges: Vec<(NodeIdx, NodeIdx, f64)> = g.edges().collect();
    for &(_, _, w) in &edges {
        as_count(w)?;
    }
    let st = strength_table(g);
    let total = st.total as u64;
    Ok(edges
        .par_iter()
        .map(|&(s, t, w)| EdgeSignificance {
            source: s,
            target: t,
            weight: w,
            model: BackboneModel::Mlf,
            p_value: mlf_pvalue(w as u64, st.s_out[s] as u64, st.s_in[t] as u64, total),
            alpha_out: None,
            alpha_in: None,
        })
        .collect())
}

/// p-values of every arc under `model`.
pub fn significance(g: &InstanceGraph, model: BackboneModel) -> Result<Vec<EdgeSignificance>> {
    match model {
        BackboneModel::Disparity => Ok(disparity_pvalues(g)),
        BackboneModel::Mlf => mlf_pvalues(g),
    }
}

/// Keeps arcs with `p_value < alpha`, then drops nodes left without arcs.
pub fn prune(g: &InstanceGraph, sig: &[EdgeSignificance], alpha: f64) -> Result<InstanceGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!(
            "significance level must be in (0, 1), got {alpha}"
        )));
    }
    let kept = sig
        .iter()
        .filter(|e| e.p_value < alpha)
        .map(|e| (e.source, e.target, e.weight))
        .collect();
    Ok(g.with_edges(kept).without_isolated())
}

/// Writes the `source, target, weight, model, p_value` table.
pub fn write_significance<W: Write>(
    g: &InstanceGraph,
    sig: &[EdgeSignificance],
    mut w: W,
) -> Result<()> {
    writeln!(w, "source,target,weight,model,p_value")?;
    for e in sig {
        writeln!(
            w,
            "{},{},{},{},{:e}",
            g.label(e.source),
            g.label(e.target),
            e.weight,
            e.model.name(),
            e.p_value
        )?;
    }
    Ok(())
}

/// `P[X >= k]` for `X ~ Bin(n, p)`.
///
/// The pmf at the starting point comes from Loader's saddle-point
/// expansion; neighbouring terms follow by their exact ratio. The tail on the
/// far side of the mean is summed directly, so small p-values keep full
/// relative precision.
pub fn binomial_sf(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 || p >= 1.0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    let ratio_up = p / q;
    let mean = n as f64 * p;

    if k as f64 >= mean {
        let mut term = dbinom(k, n, p);
        let mut sum = term;
        let mut j = k;
        while j < n {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio_up;
            j += 1;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        let mut j = k - 1;
        let mut term = dbinom(j, n, p);
        let mut sum = term;
        while j > 0 {
            term *= j as f64 / (n - j + 1) as f64 / ratio_up;
            j -= 1;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        (1.0 - sum).clamp(0.0, 1.0)
    }
}

/// Binomial pmf by Loader's saddle-point method.
fn dbinom(x: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let (xf, nf) = (x as f64, n as f64);
    if x == 0 {
        let lc = if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
        return lc.exp();
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = (2.0 * PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln n! - ((n + 1/2) ln n - n + ln √(2π))`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
        return ln_fact - (nf + 0.5) * nf.ln() + nf - 0.5 * (2.0 * PI).ln();
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `x ln(x / np) + np - x`, accurate when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeRecord};

    fn weighted(arcs: &[(&str, &str, f64)]) -> InstanceGraph {
        build_graph(arcs.iter().map(|&(s, t, w)| EdgeRecord::new(s, t, w)), None)
            .unwrap()
            .0
    }

    #[test]
    fn mlf_worked_example() {
        let g = mlf_pvalue(2, 2, 2, 4);
        let exact = 1.0 - 0.75f64.powi(4) - 4.0 * 0.25 * 0.75f64.powi(3);
        assert!(
            (g - 0.26171875).abs() < 1e-15 && (g - exact).abs() < 1e-15,
            "{g}"
        );
        assert_eq!(mlf_pvalue(0, 2, 2, 4), 1.0);
    }

    #[test]
    fn binomial_tail_sums_to_one() {
        let (n, p) = (37, 0.23);
        let total: f64 = (0..=n).map(|x| dbinom(x, n, p)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for k in 0..=n {
            let direct: f64 = (k..=n).map(|x| dbinom(x, n, p)).sum();
            assert!((binomial_sf(k, n, p) - direct).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn stirlerr_small_values() {
        assert!((stirlerr(1) - 0.081_061_466_795_327_26).abs() < 1e-15);
        // continuity across the table/series switch
        let lg16: f64 = (2..=16).map(|i| (i as f64).ln()).sum();
        let direct = lg16 - 16.5 * 16f64.ln() + 16.0 - 0.5 * (2.0 * PI).ln();
        assert!((stirlerr(16) - direct).abs() < 1e-13);
    }

    #[test]
    fn disparity_closed_form() {
        assert!((disparity_alpha(0.5, 2) - 0.5).abs() < 1e-15);
        assert_eq!(disparity_alpha(1.0, 1), 1.0);
        assert!((disparity_alpha(0.8, 3) - 0.04).abs() < 1e-15);
        assert!((disparity_alpha(0.1, 3) - 0.81).abs() < 1e-15);

        let g = weighted(&[("h", "a", 8.0), ("h", "b", 1.0), ("h", "c", 1.0)]);
        let (h, a) = (g.node_index("h").unwrap(), g.node_index("a").unwrap());
        let (out, inn) = disparity_pvalue(&g, h, a).unwrap();
        assert!((out - 0.04).abs() < 1e-15);
        assert_eq!(inn, 1.0);
    }

    #[test]
    fn dominant_edge_survives() {
        let mut arcs = vec![("h", "x", 100.0)];
        let leaves: Vec<String> = (0..20).map(|i| format!("l{i}")).collect();
        for l in &leaves {
            arcs.push(("h", l.as_str(), 1.0));
        }
        let g = weighted(&arcs);
        let sig = disparity_pvalues(&g);
        let pruned = prune(&g, &sig, 0.01).unwrap();
        assert_eq!(pruned.edge_count(), 1);
        assert_eq!(pruned.node_count(), 2);
        assert!(pruned.node_index("x").is_some());
    }

    #[test]
    fn uniform_strength_prunes_everything() {
        let g = weighted(&[
            ("a", "b", 3.0),
            ("b", "c", 3.0),
            ("c", "a", 3.0),
            ("a", "c", 3.0),
            ("b", "a", 3.0),
            ("c", "b", 3.0),
        ]);
        let pruned = prune(&g, &disparity_pvalues(&g), 0.05).unwrap();
        assert_eq!(pruned.edge_count(), 0);
        assert_eq!(pruned.node_count(), 0);
    }

    #[test]
    fn mlf_rejects_fractional_weights() {
        let g = weighted(&[("a", "b", 1.5)]);
        assert!(matches!(mlf_pvalues(&g), Err(Error::Validation(_))));
    }

    #[test]
    fn prune_rejects_bad_alpha() {
        let g = weighted(&[("a", "b", 1.0)]);
        let sig = disparity_pvalues(&g);
        assert!(prune(&g, &sig, 0.0).is_err());
        assert!(prune(&g, &sig, 1.0).is_err());
    }
}
