//! Single-linkage agglomeration, recorded once and cut at any prefix.
//!
//! Ties between equal spacings are broken by the realized closest pair of
//! points: the pair `(a, b)` with `a < b` that is lexicographically smallest
//! wins. Under that strict order on edges the minimum spanning tree is
//! unique, and single-linkage merges are exactly its edges in sorted order.
//! The tree is built with a dense Prim pass (`O(n²)` time, `O(n)` memory) and
//! then replayed through a union-find to produce the merge records.

use std::cmp::Ordering;
use std::io::Write;

use crate::dataset::{DistanceModel, Labels};
use crate::error::{Error, Result};

/// An edge between points `a < b`, ordered by `(weight, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Edge {
    pub weight: f64,
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(weight: f64, i: usize, j: usize) -> Self {
        Edge { weight, a: i.min(j), b: i.max(j) }
    }

    pub fn cmp(&self, other: &Edge) -> Ordering {
        self.weight
            .partial_cmp(&other.weight)
            .expect("distances are finite")
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the new root, or `None` if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(ra)
    }
}

/// One agglomeration step.
///
/// Group ids follow the usual dendrogram convention: points are `0..n`, and
/// the group created by merge `i` is `n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub id: usize,
    /// Spacing between the two merged groups.
    pub weight: f64,
    /// Realized closest pair, `a < b`.
    pub points: (usize, usize),
    /// Size of the new group.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeSequence {
    n: usize,
    merges: Vec<Merge>,
}

/// Runs single-linkage to completion and records all `n − 1` merges.
pub fn single_linkage(model: &DistanceModel) -> MergeSequence {
    let n = model.len();
    let mut edges = minimum_spanning_edges(model);
    edges.sort_by(Edge::cmp);

    let mut dsu = DisjointSet::new(n);
    let mut cluster_of_root: Vec<usize> = (0..n).collect();
    let mut size_of_root = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);
    for (step, e) in edges.into_iter().enumerate() {
        let (ra, rb) = (dsu.find(e.a), dsu.find(e.b));
        let (ca, cb) = (cluster_of_root[ra], cluster_of_root[rb]);
        let size = size_of_root[ra] + size_of_root[rb];
        let root = dsu.union(ra, rb).expect("spanning tree edges join distinct groups");
        let id = n + step;
        cluster_of_root[root] = id;
        size_of_root[root] = size;
        merges.push(Merge { left: ca.min(cb), right: ca.max(cb), id, weight: e.weight, points: (e.a, e.b), size });
    }
    MergeSequence { n, merges }
}

/// Dense Prim over the complete point graph under the strict `(w, a, b)` order.
fn minimum_spanning_edges(model: &DistanceModel) -> Vec<Edge> {
    let n = model.len();
    let mut remaining: Vec<usize> = (1..n).collect();
    let mut best: Vec<Edge> = vec![Edge::new(f64::INFINITY, 0, 0); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    while !remaining.is_empty() {
        let mut pick = 0;
        for (slot, &v) in remaining.iter().enumerate() {
            let cand = Edge::new(model.dist(current, v), current, v);
            if cand.cmp(&best[v]) == Ordering::Less {
                best[v] = cand;
            }
            if best[v].cmp(&best[remaining[pick]]) == Ordering::Less {
                pick = slot;
            }
        }
        current = remaining.swap_remove(pick);
        edges.push(best[current]);
    }
    edges
}

impl MergeSequence {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.weight)
    }

    fn check_prefix(&self, t: usize) -> Result<()> {
        if t >= self.n {
            return Err(Error::invalid(format!("merge count {t} out of range 0..={}", self.n - 1)));
        }
        Ok(())
    }

    /// Group id of every point after `t` merges, in canonical order
    /// (groups numbered by their smallest member).
    fn assignment(&self, t: usize) -> (Vec<usize>, usize) {
        let mut dsu = DisjointSet::new(self.n);
        for m in &self.merges[..t] {
            dsu.union(m.points.0, m.points.1);
        }
        let mut label_of_root = vec![usize::MAX; self.n];
        let mut next = 0;
        let assign = (0..self.n)
            .map(|p| {
                let r = dsu.find(p);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect();
        (assign, next)
    }

    /// Clustering after the first `t` merges: `n − t` groups.
    pub fn cut(&self, t: usize) -> Result<Labels> {
        self.check_prefix(t)?;
        let (assign, _) = self.assignment(t);
        Labels::new(assign)
    }

    /// Clustering with exactly `k` groups.
    pub fn cut_k(&self, k: usize) -> Result<Labels> {
        if k == 0 || k > self.n {
            return Err(Error::invalid(format!("k = {k} out of range 1..={}", self.n)));
        }
        self.cut(self.n - k)
    }

    /// Group sizes after `t` merges, in canonical group order.
    pub fn group_sizes(&self, t: usize) -> Result<Vec<usize>> {
        self.check_prefix(t)?;
        let (assign, k) = self.assignment(t);
        let mut sizes = vec![0; k];
        for g in assign {
            sizes[g] += 1;
        }
        Ok(sizes)
    }

    /// Writes the dendrogram as CSV: `step,left,right,weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,left,right,weight")?;
        for (step, m) in self.merges.iter().enumerate() {
            writeln!(out, "{},{},{},{}", step + 1, m.left, m.right, m.weight)?;
        }
        Ok(())
    }
}

/// Fraction of singleton groups in the single-linkage `k`-clustering, per `k`.
pub fn singleton_sweep(model: &DistanceModel, k_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    singleton_sweep_seq(&single_linkage(model), k_values)
}

pub fn singleton_sweep_seq(seq: &MergeSequence, k_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    let n = seq.n();
    k_values
        .iter()
        .map(|&k| {
            if k < 2 || k > n {
                return Err(Error::invalid(format!("k = {k} out of range 2..={n}")));
            }
            let sizes = seq.group_sizes(n - k)?;
            let singletons = sizes.iter().filter(|&&s| s == 1).count();
            Ok((k, singletons as f64 / k as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> DistanceModel {
        DistanceModel::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    /// Rescans every pair of current groups at every step.
    fn brute_force_agglomerate(model: &DistanceModel) -> Vec<(f64, (usize, usize))> {
        let n = model.len();
        let mut group: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        for _ in 1..n {
            let mut best: Option<Edge> = None;
            for i in 0..n {
                for j in (i + 1)..n {
                    if group[i] == group[j] {
                        continue;
                    }
                    let e = Edge::new(model.dist(i, j), i, j);
                    if best.is_none_or(|b| e.cmp(&b) == Ordering::Less) {
                        best = Some(e);
                    }
                }
            }
            let e = best.unwrap();
            let (from, to) = (group[e.b], group[e.a]);
            for g in group.iter_mut() {
                if *g == from {
                    *g = to;
                }
            }
            out.push((e.weight, (e.a, e.b)));
        }
        out
    }

    /// Kruskal over all pairs, weights only.
    fn kruskal_weights(model: &DistanceModel) -> Vec<f64> {
        let n = model.len();
        let mut edges: Vec<Edge> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| Edge::new(model.dist(i, j), i, j))
            .collect();
        edges.sort_by(Edge::cmp);
        let mut dsu = DisjointSet::new(n);
        edges.into_iter().filter(|e| dsu.union(e.a, e.b).is_some()).map(|e| e.weight).collect()
    }

    #[test]
    fn three_points_on_a_line() {
        let seq = single_linkage(&line(&[0.0, 1.0, 10.0]));
        let m = seq.merges();
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].left, m[0].right, m[0].id, m[0].weight), (0, 1, 3, 1.0));
        assert_eq!((m[1].left, m[1].right, m[1].id, m[1].weight), (2, 3, 4, 9.0));
        assert_eq!(m[1].size, 3);
    }

    #[test]
    fn chaining_example_merge_order() {
        let pts = vec![vec![100.0, 1.0], vec![100.0, 2.0], vec![200.0, 1.0], vec![200.0, 2.0], vec![100.0, 3.0]];
        let seq = single_linkage(&DistanceModel::from_points(pts).unwrap());
        let first: Vec<_> = seq.merges()[..3].iter().map(|m| (m.weight, m.points)).collect();
        assert_eq!(first, vec![(1.0, (0, 1)), (1.0, (1, 4)), (1.0, (2, 3))]);
        assert_eq!(seq.cut(2).unwrap().groups(), vec![vec![0, 1, 4], vec![2], vec![3]]);
    }

    #[test]
    fn cut_extremes_and_range() {
        let seq = single_linkage(&line(&[0.0, 1.0, 10.0, 11.0]));
        assert_eq!(seq.cut(0).unwrap().k(), 4);
        assert_eq!(seq.cut(3).unwrap().k(), 1);
        assert_eq!(seq.cut(2).unwrap().groups(), vec![vec![0, 1], vec![2, 3]]);
        assert!(seq.cut(4).is_err());
    }

    #[test]
    fn singleton_proportions() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(singleton_sweep(&m, &[2]).unwrap(), vec![(2, 0.0)]);
        let m = line(&[0.0, 1.0, 2.0, 100.0]);
        assert_eq!(singleton_sweep(&m, &[2, 4]).unwrap(), vec![(2, 0.5), (4, 1.0)]);
        assert!(singleton_sweep(&m, &[1]).is_err());
        assert!(singleton_sweep(&m, &[5]).is_err());
    }

    #[test]
    fn dendrogram_csv() {
        let seq = single_linkage(&line(&[0.0, 1.0, 10.0]));
        let mut buf = Vec::new();
        seq.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,left,right,weight\n1,0,1,1\n2,2,3,9\n");
    }

    #[test]
    fn tied_grid_matches_brute_force() {
        let pts: Vec<Vec<f64>> = (0..4).flat_map(|x| (0..3).map(move |y| vec![x as f64, y as f64])).collect();
        let model = DistanceModel::from_points(pts).unwrap();
        let seq = single_linkage(&model);
        let got: Vec<_> = seq.merges().iter().map(|m| (m.weight, m.points)).collect();
        assert_eq!(got, brute_force_agglomerate(&model));
    }

    proptest! {
        #[test]
        fn matches_brute_force_agglomeration(
            pts in proptest::collection::vec((0i32..6, 0i32..6), 2..14),
        ) {
            // Small integer grid: plenty of ties and duplicate points.
            let model = DistanceModel::from_points(
                pts.iter().map(|&(x, y)| vec![x as f64, y as f64]).collect()).unwrap();
            let seq = single_linkage(&model);
            let got: Vec<_> = seq.merges().iter().map(|m| (m.weight, m.points)).collect();
            prop_assert_eq!(got, brute_force_agglomerate(&model));
        }

        #[test]
        fn weights_nondecreasing_and_equal_to_kruskal(
            pts in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 2), 2..64),
        ) {
            let model = DistanceModel::from_points(pts).unwrap();
            let seq = single_linkage(&model);
            let w: Vec<f64> = seq.weights().collect();
            prop_assert!(w.windows(2).all(|p| p[0] <= p[1]));
            prop_assert_eq!(w, kruskal_weights(&model));
        }

        #[test]
        fn cut_yields_n_minus_t_covering_groups(
            pts in proptest::collection::vec(-20.0f64..20.0, 2..30),
            frac in 0.0f64..1.0,
        ) {
            let model = line(&pts);
            let seq = single_linkage(&model);
            let t = ((model.len() - 1) as f64 * frac) as usize;
            let labels = seq.cut(t).unwrap();
            prop_assert_eq!(labels.k(), model.len() - t);
            prop_assert_eq!(labels.sizes().iter().sum::<usize>(), model.len());
            prop_assert_eq!(seq.group_sizes(t).unwrap(), labels.sizes());
        }
    }
}
