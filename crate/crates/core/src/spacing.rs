//! The spacing graph induced by a clustering and the two separation criteria.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{DistanceModel, Labels};
use crate::error::{Error, Result};
use crate::linkage::{DisjointSet, MergeSequence};

/// Complete graph on the groups of a clustering; the weight between two
/// groups is the smallest distance between a point of one and a point of the
/// other.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingGraph {
    k: usize,
    w: Vec<f64>,
}

/// Minimum spanning tree of a [`SpacingGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct MstResult {
    /// `(i, j, weight)` with `i < j`, in the order Prim added them.
    pub edges: Vec<(usize, usize, f64)>,
    /// Sum of `sorted_weights`, accumulated in ascending order.
    pub total: f64,
    pub sorted_weights: Vec<f64>,
}

/// Below this many points the pairwise pass runs on the calling thread.
const PARALLEL_MIN_POINTS: usize = 512;

pub fn spacing_graph(model: &DistanceModel, labels: &Labels) -> Result<SpacingGraph> {
    let n = model.len();
    if labels.len() != n {
        return Err(Error::InvalidLabels(format!("{} labels for {n} points", labels.len())));
    }
    let k = labels.k();
    if k < 2 {
        return Err(Error::TooFewGroups);
    }
    let assign = labels.as_slice();
    // Only the upper triangle is filled during the pass.
    let scan_row = |mut acc: Vec<f64>, i: usize| {
        let gi = assign[i];
        for (j, &gj) in assign.iter().enumerate().skip(i + 1) {
            if gi == gj {
                continue;
            }
            let slot = &mut acc[gi.min(gj) * k + gi.max(gj)];
            let d = model.dist(i, j);
            if d < *slot {
                *slot = d;
            }
        }
        acc
    };
    let upper = if n < PARALLEL_MIN_POINTS {
        (0..n).fold(vec![f64::INFINITY; k * k], scan_row)
    } else {
        (0..n).into_par_iter().fold(|| vec![f64::INFINITY; k * k], scan_row).reduce(
            || vec![f64::INFINITY; k * k],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    if y < *x {
                        *x = y;
                    }
                }
                a
            },
        )
    };
    let mut w = upper;
    for i in 0..k {
        for j in (i + 1)..k {
            w[j * k + i] = w[i * k + j];
        }
    }
    Ok(SpacingGraph { k, w })
}

impl SpacingGraph {
    /// Builds a graph from a full symmetric weight matrix; the diagonal is ignored.
    pub fn from_weights(k: usize, weights: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewGroups);
        }
        if weights.len() != k * k {
            return Err(Error::invalid(format!("expected {} weights, got {}", k * k, weights.len())));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (weights[i * k + j], weights[j * k + i]);
                if a != b || a < 0.0 || !a.is_finite() {
                    return Err(Error::invalid(format!("bad weight between groups {i} and {j}")));
                }
            }
        }
        Ok(SpacingGraph { k, w: weights })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Spacing between groups `i != j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert_ne!(i, j);
        self.w[i * self.k + j]
    }

    /// `Min-Sp`: the smallest spacing over all pairs of groups.
    pub fn min_sp(&self) -> f64 {
        let k = self.k;
        (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Dense Prim. Equal weights are broken by the smaller `(i, j)` pair.
    pub fn mst(&self) -> MstResult {
        let k = self.k;
        let key = |w: f64, u: usize, v: usize| (w, u.min(v), u.max(v));
        let less = |a: (f64, usize, usize), b: (f64, usize, usize)| {
            a.0.partial_cmp(&b.0).expect("finite spacing").then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)) == Ordering::Less
        };
        let mut best = vec![(f64::INFINITY, usize::MAX, usize::MAX); k];
        let mut in_tree = vec![false; k];
        in_tree[0] = true;
        let mut current = 0;
        let mut edges = Vec::with_capacity(k - 1);
        for _ in 1..k {
            let mut pick = usize::MAX;
            for v in 0..k {
                if in_tree[v] {
                    continue;
                }
                let cand = key(self.get(current, v), current, v);
                if less(cand, best[v]) {
                    best[v] = cand;
                }
                if pick == usize::MAX || less(best[v], best[pick]) {
                    pick = v;
                }
            }
            in_tree[pick] = true;
            let (w, a, b) = best[pick];
            edges.push((a, b, w));
            current = pick;
        }
        let mut sorted_weights: Vec<f64> = edges.iter().map(|e| e.2).collect();
        sorted_weights.sort_by(|a, b| a.partial_cmp(b).expect("finite spacing"));
        let total = sorted_weights.iter().sum();
        MstResult { edges, total, sorted_weights }
    }
}

pub fn min_sp(g: &SpacingGraph) -> f64 {
    g.min_sp()
}

pub fn mst_sp(g: &SpacingGraph) -> MstResult {
    g.mst()
}

/// `Min-Sp` and the sorted MST weights of a clustering, read off the
/// single-linkage tree instead of a full pairwise pass.
///
/// Every edge of a minimum spanning tree of the group graph can be taken from
/// the point-level minimum spanning tree, so a Kruskal pass over the tree
/// edges that cross groups yields the same sorted weights as
/// [`SpacingGraph::mst`] in `O(n log n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCriteria {
    pub min_sp: f64,
    pub mst_total: f64,
    pub sorted_weights: Vec<f64>,
}

pub fn tree_criteria(seq: &MergeSequence, labels: &Labels) -> Result<TreeCriteria> {
    if labels.len() != seq.n() {
        return Err(Error::InvalidLabels(format!("{} labels for {} points", labels.len(), seq.n())));
    }
    let k = labels.k();
    if k < 2 {
        return Err(Error::TooFewGroups);
    }
    let mut dsu = DisjointSet::new(k);
    let mut sorted_weights = Vec::with_capacity(k - 1);
    // Merges are already in (weight, a, b) order.
    for m in seq.merges() {
        let (ga, gb) = (labels.group_of(m.points.0), labels.group_of(m.points.1));
        if ga != gb && dsu.union(ga, gb).is_some() {
            sorted_weights.push(m.weight);
            if sorted_weights.len() == k - 1 {
                break;
            }
        }
    }
    Ok(TreeCriteria { min_sp: sorted_weights[0], mst_total: sorted_weights.iter().sum(), sorted_weights })
}

/// Sum of squared distances from each point to its group centroid.
/// `None` without coordinates.
pub fn quadratic_loss(model: &DistanceModel, labels: &Labels) -> Option<f64> {
    let dim = model.dim()?;
    let k = labels.k();
    let mut sums = vec![0.0; k * dim];
    let sizes = labels.sizes();
    for p in 0..model.len() {
        let g = labels.group_of(p);
        for (s, x) in sums[g * dim..(g + 1) * dim].iter_mut().zip(model.point(p)?) {
            *s += x;
        }
    }
    for g in 0..k {
        for s in &mut sums[g * dim..(g + 1) * dim] {
            *s /= sizes[g] as f64;
        }
    }
    let mut loss = 0.0;
    for p in 0..model.len() {
        let g = labels.group_of(p);
        let c = &sums[g * dim..(g + 1) * dim];
        loss += model.point(p)?.iter().zip(c).map(|(x, m)| (x - m) * (x - m)).sum::<f64>();
    }
    Some(loss)
}

/// Flat metric bundle; serializes to the report JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringReport {
    pub algo: Option<String>,
    pub k: usize,
    #[serde(rename = "L")]
    pub min_size: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub min_sp: f64,
    pub mst_sp: f64,
    /// Group sizes, ascending.
    pub sizes: Vec<usize>,
    /// Absent in matrix mode.
    pub quad_loss: Option<f64>,
    pub runtime_s: Option<f64>,
}

pub fn report(model: &DistanceModel, labels: &Labels) -> Result<ClusteringReport> {
    let g = spacing_graph(model, labels)?;
    let mut sizes = labels.sizes();
    sizes.sort_unstable();
    Ok(ClusteringReport {
        algo: None,
        k: labels.k(),
        min_size: None,
        epsilon: None,
        seed: None,
        min_sp: g.min_sp(),
        mst_sp: g.mst().total,
        sizes,
        quad_loss: quadratic_loss(model, labels),
        runtime_s: None,
    })
}
