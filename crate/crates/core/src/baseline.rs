//! k-means++ seeding followed by Lloyd iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DistanceModel, Labels};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Labels,
    /// Row-major `k × d`.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each Lloyd iteration.
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Flat copy of the coordinates, or an error in matrix mode.
fn coordinates(model: &DistanceModel) -> Result<(usize, Vec<f64>)> {
    let dim = model.dim().ok_or(Error::NeedsCoordinates)?;
    let mut data = Vec::with_capacity(model.len() * dim);
    for i in 0..model.len() {
        data.extend_from_slice(model.point(i).ok_or(Error::NeedsCoordinates)?);
    }
    Ok((dim, data))
}

/// D² sampling. When every remaining point coincides with a chosen center
/// the lowest-index unchosen point is taken.
fn plus_plus(data: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = data.len() / dim;
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = point(first).to_vec();
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(point(i), point(first))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            // Guard against rounding leaving the target past the last positive weight.
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).expect("total > 0");
            }
            pick
        } else {
            chosen.iter().position(|c| !c).expect("k <= n")
        };
        chosen[next] = true;
        centers.extend_from_slice(point(next));
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(point(i), point(next)));
        }
    }
    centers
}

/// Nearest centroid per point, lower centroid id on ties.
fn assign(data: &[f64], dim: usize, centers: &[f64], out: &mut [usize]) {
    let k = centers.len() / dim;
    for (i, slot) in out.iter_mut().enumerate() {
        let p = &data[i * dim..(i + 1) * dim];
        let mut best = (f64::INFINITY, 0);
        for c in 0..k {
            let d = sq_dist(p, &centers[c * dim..(c + 1) * dim]);
            if d < best.0 {
                best = (d, c);
            }
        }
        *slot = best.1;
    }
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(data: &[f64], dim: usize, centers: &mut [f64], labels: &mut [usize]) {
    let k = centers.len() / dim;
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else { return };
        let mut far = (f64::NEG_INFINITY, usize::MAX);
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let d = sq_dist(&data[i * dim..(i + 1) * dim], &centers[l * dim..(l + 1) * dim]);
            if d > far.0 {
                far = (d, i);
            }
        }
        let p = far.1;
        labels[p] = empty;
        centers[empty * dim..(empty + 1) * dim].copy_from_slice(&data[p * dim..(p + 1) * dim]);
    }
}

fn update(data: &[f64], dim: usize, labels: &[usize], centers: &mut [f64]) {
    let k = centers.len() / dim;
    let mut counts = vec![0usize; k];
    centers.iter_mut().for_each(|c| *c = 0.0);
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (c, x) in centers[l * dim..(l + 1) * dim].iter_mut().zip(&data[i * dim..(i + 1) * dim]) {
            *c += x;
        }
    }
    for (l, &count) in counts.iter().enumerate() {
        for c in &mut centers[l * dim..(l + 1) * dim] {
            *c /= count as f64;
        }
    }
}

fn inertia(data: &[f64], dim: usize, labels: &[usize], centers: &[f64]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(&data[i * dim..(i + 1) * dim], &centers[l * dim..(l + 1) * dim]))
        .sum()
}

/// Lloyd's algorithm from a k-means++ start.
///
/// Stops once no centroid moves by more than `tol` times the data's RMS
/// spread, or after `max_iter` iterations.
pub fn kmeans(model: &DistanceModel, k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<KMeansResult> {
    let (dim, data) = coordinates(model)?;
    let n = model.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} out of range 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus(&data, dim, k, &mut rng);

    let mut mean = vec![0.0; dim];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(&data[i * dim..(i + 1) * dim]) {
            *m += x / n as f64;
        }
    }
    let spread = ((0..n).map(|i| sq_dist(&data[i * dim..(i + 1) * dim], &mean)).sum::<f64>() / n as f64).sqrt();
    let threshold = tol * spread;

    let mut labels = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        assign(&data, dim, &centers, &mut labels);
        repair_empty(&data, dim, &mut centers, &mut labels);
        let previous = centers.clone();
        update(&data, dim, &labels, &mut centers);
        history.push(inertia(&data, dim, &labels, &centers));
        let shift = (0..k)
            .map(|c| sq_dist(&previous[c * dim..(c + 1) * dim], &centers[c * dim..(c + 1) * dim]).sqrt())
            .fold(0.0, f64::max);
        if shift <= threshold {
            break;
        }
    }
    let inertia = *history.last().expect("at least one iteration");
    Ok(KMeansResult { labels: Labels::new(labels)?, centroids: centers, inertia, iterations, history })
}

/// Minimum group size handed to the constrained algorithms: `⌈4s/3⌉` for the
/// smallest k-means group `s`, capped at `⌊n/k⌋` so the instance stays feasible.
pub fn derived_min_size(kmeans_labels: &Labels) -> usize {
    let n = kmeans_labels.len();
    let k = kmeans_labels.k();
    let s = kmeans_labels.sizes().into_iter().min().unwrap_or(0);
    (4 * s).div_ceil(3).min(n / k).max(1)
}
