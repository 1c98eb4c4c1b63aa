//! Henze-Penrose divergence bounds from the Friedman-Rafsky statistic.
//!
//! The dataset is joined by a Euclidean minimum spanning tree; the number of
//! edges linking opposite labels gives a plug-in divergence estimate, which is
//! turned into upper and lower BER bounds.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::math::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    /// Smaller endpoint index.
    pub a: usize,
    pub b: usize,
    /// Euclidean length.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhpEstimate {
    pub lower: f64,
    pub upper: f64,
    pub mid: f64,
    pub cross_edges: usize,
    pub divergence: f64,
}

/// Total order on candidate edges: squared length, then endpoint indices.
#[inline]
fn edge_cmp(a: (f64, usize, usize), b: (f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

#[inline]
fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Minimum spanning tree of the complete Euclidean graph over the rows of a
/// row-major `n × dim` matrix (dense Prim, O(n²)).
///
/// Equal-length edges are ordered by their endpoint indices, so the tree is
/// unique for any input.
pub fn euclidean_mst(points: &[f64], dim: usize) -> Result<Vec<MstEdge>> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::InvalidParameter("points must form an n x dim matrix".into()));
    }
    let n = points.len() / dim;
    if n < 2 {
        return Err(Error::InsufficientData(format!("an MST needs at least 2 points, got {n}")));
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];

    let mut in_tree = vec![false; n];
    // best known connection (squared length, parent) for vertices outside the tree
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0usize;
    in_tree[0] = true;

    for _ in 1..n {
        let xc = row(current);
        let mut pick: Option<(f64, usize, usize, usize)> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = sq_dist(xc, row(v));
            let (lo, hi) = ordered(current, v);
            let (bw, bp) = best[v];
            let replace = bp == usize::MAX || {
                let (blo, bhi) = ordered(bp, v);
                edge_cmp((w, lo, hi), (bw, blo, bhi)) == Ordering::Less
            };
            if replace {
                best[v] = (w, current);
            }
            let (bw, bp) = best[v];
            let (blo, bhi) = ordered(bp, v);
            let better = match pick {
                None => true,
                Some((pw, plo, phi, _)) => edge_cmp((bw, blo, bhi), (pw, plo, phi)) == Ordering::Less,
            };
            if better {
                pick = Some((bw, blo, bhi, v));
            }
        }
        let (w, lo, hi, v) = pick.expect("a vertex remains outside the tree");
        in_tree[v] = true;
        edges.push(MstEdge {
            a: lo,
            b: hi,
            weight: w.sqrt(),
        });
        current = v;
    }
    Ok(edges)
}

/// Number of MST edges whose endpoints carry different labels.
pub fn fr_cross_count(data: &LabeledDataset) -> Result<usize> {
    data.require_both_classes()?;
    let edges = euclidean_mst(data.features(), data.dim())?;
    Ok(edges.iter().filter(|e| data.label(e.a) != data.label(e.b)).count())
}

/// Divergence from a cross-edge count, clamped to `[0, 1]`.
pub fn divergence_from_cross_count(cross: usize, n_a: usize, n_b: usize) -> f64 {
    let n = (n_a + n_b) as f64;
    let raw = 1.0 - cross as f64 * n / (2.0 * n_a as f64 * n_b as f64);
    raw.clamp(0.0, 1.0)
}

/// Plug-in Henze-Penrose divergence estimate.
pub fn hp_divergence(data: &LabeledDataset) -> Result<f64> {
    let (n_a, n_b) = data.require_both_classes()?;
    Ok(divergence_from_cross_count(fr_cross_count(data)?, n_a, n_b))
}

/// BER bounds implied by a divergence value and the empirical class priors.
pub fn bounds_from_divergence(divergence: f64, n_a: usize, n_b: usize) -> (f64, f64) {
    let n = (n_a + n_b) as f64;
    let p = n_a as f64 / n;
    let q = n_b as f64 / n;
    let u = (4.0 * p * q * divergence + (p - q) * (p - q)).clamp(0.0, 1.0);
    let upper = 0.5 - 0.5 * u;
    let lower = 0.5 - 0.5 * u.sqrt();
    (lower, upper)
}

pub fn ghp_estimate(data: &LabeledDataset) -> Result<GhpEstimate> {
    let (n_a, n_b) = data.require_both_classes()?;
    let cross = fr_cross_count(data)?;
    let divergence = divergence_from_cross_count(cross, n_a, n_b);
    let (lower, upper) = bounds_from_divergence(divergence, n_a, n_b);
    Ok(GhpEstimate {
        lower,
        upper,
        mid: 0.5 * (lower + upper),
        cross_edges: cross,
        divergence,
    })
}
