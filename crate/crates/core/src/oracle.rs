//! Exhaustive ground truth for tiny instances.
//!
//! Every set partition of the points into `k` blocks of at least `L` points is
//! enumerated once (restricted growth strings, blocks numbered by their
//! smallest member), scored through the pairwise [`spacing_graph`] route, and
//! used to check the guarantees of the clustering algorithms.

use serde::Serialize;

use crate::constrained::{
    algo_min_sp, constrained_max_mst, harmonic, EllSchedule, MaxMstTrace, MinSpOptions, PrefixSearch, SizeConstraint,
};
use crate::dataset::{DistanceModel, Labels};
use crate::error::{Error, Result};
use crate::linkage::single_linkage;
use crate::scheduling::Scheduler;
use crate::spacing::spacing_graph;

/// Largest point count the enumerator accepts.
pub const MAX_POINTS: usize = 12;

/// Relative slack for inequalities between sums or products of distances.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Streaming enumeration of `(k, L)`-clusterings as canonical labels.
#[derive(Debug, Clone)]
pub struct Clusterings {
    n: usize,
    k: usize,
    min_size: usize,
    assign: Vec<usize>,
    sizes: Vec<usize>,
    blocks: usize,
    pos: usize,
    next_value: Vec<usize>,
    done: bool,
}

pub fn enumerate_clusterings(n: usize, k: usize, min_size: usize) -> Result<Clusterings> {
    if n > MAX_POINTS {
        return Err(Error::TooLarge(format!("{n} points exceeds the enumeration cap of {MAX_POINTS}")));
    }
    if n == 0 || k == 0 || min_size == 0 {
        return Err(Error::invalid("n, k and L must be positive"));
    }
    if k * min_size > n {
        return Err(Error::Infeasible(format!("k·L = {}·{min_size} exceeds n = {n}", k)));
    }
    Ok(Clusterings {
        n,
        k,
        min_size,
        assign: vec![0; n],
        sizes: vec![0; k],
        blocks: 0,
        pos: 0,
        next_value: vec![0; n],
        done: false,
    })
}

impl Clusterings {
    /// Can positions after `p` still complete a valid partition once `p`
    /// takes block `v`?
    fn completable(&self, p: usize, v: usize) -> bool {
        let blocks = self.blocks.max(v + 1);
        let deficit: usize = (0..blocks)
            .map(|b| {
                let s = self.sizes[b] + usize::from(b == v);
                self.min_size.saturating_sub(s)
            })
            .sum::<usize>()
            + (self.k - blocks) * self.min_size;
        deficit < self.n - p
    }

    fn place(&mut self, p: usize, v: usize) {
        self.assign[p] = v;
        self.sizes[v] += 1;
        if v == self.blocks {
            self.blocks += 1;
        }
    }

    fn unplace(&mut self, p: usize) {
        let v = self.assign[p];
        self.sizes[v] -= 1;
        if self.sizes[v] == 0 {
            self.blocks -= 1;
        }
    }
}

impl Iterator for Clusterings {
    type Item = Labels;

    fn next(&mut self) -> Option<Labels> {
        loop {
            if self.done {
                return None;
            }
            if self.pos == self.n {
                let out = Labels::new(self.assign.clone()).expect("complete partitions have no empty block");
                self.pos -= 1;
                self.unplace(self.pos);
                return Some(out);
            }
            let p = self.pos;
            let limit = self.blocks.min(self.k - 1);
            let mut placed = false;
            while self.next_value[p] <= limit {
                let v = self.next_value[p];
                self.next_value[p] += 1;
                if self.completable(p, v) {
                    self.place(p, v);
                    self.pos += 1;
                    if self.pos < self.n {
                        self.next_value[self.pos] = 0;
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                if p == 0 {
                    self.done = true;
                    return None;
                }
                self.pos -= 1;
                self.unplace(self.pos);
            }
        }
    }
}

/// Exact optima over all `(k, L)`-clusterings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalProfile {
    pub best_min_sp: f64,
    pub best_mst_sp: f64,
    pub argmax_min_sp: Labels,
    pub argmax_mst_sp: Labels,
    /// Sorted MST weights of `argmax_mst_sp`; `w_star[i]` is the `(i+1)`-th cheapest.
    pub w_star: Vec<f64>,
    pub count: usize,
}

pub fn optimal_profile(model: &DistanceModel, k: usize, min_size: usize) -> Result<OptimalProfile> {
    if k < 2 {
        return Err(Error::TooFewGroups);
    }
    let mut best: Option<OptimalProfile> = None;
    for labels in enumerate_clusterings(model.len(), k, min_size)? {
        let g = spacing_graph(model, &labels)?;
        let min_sp = g.min_sp();
        let mst = g.mst();
        match &mut best {
            None => {
                best = Some(OptimalProfile {
                    best_min_sp: min_sp,
                    best_mst_sp: mst.total,
                    argmax_min_sp: labels.clone(),
                    argmax_mst_sp: labels,
                    w_star: mst.sorted_weights,
                    count: 1,
                })
            }
            Some(b) => {
                b.count += 1;
                if min_sp > b.best_min_sp {
                    b.best_min_sp = min_sp;
                    b.argmax_min_sp = labels.clone();
                }
                if mst.total > b.best_mst_sp {
                    b.best_mst_sp = mst.total;
                    b.argmax_mst_sp = labels;
                    b.w_star = mst.sorted_weights;
                }
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no clustering to enumerate".into()))
}

/// Outcome of one guarantee.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub min_size: usize,
    pub checks: Vec<Check>,
    /// `MST-Sp` of the full-schedule output over the sum of `Min-Sp(A′_ℓ)`.
    pub upper_bound_ratio: Option<f64>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn at_least(value: f64, bound: f64) -> bool {
    value >= bound - SUM_TOLERANCE * bound.abs().max(1.0)
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, witness: impl FnOnce() -> String) {
        let witness = (!passed).then(witness);
        self.0.push(Check { name: name.into(), passed, witness });
    }
}

/// Checks of the size-constrained `MST-Sp` algorithm for one `ℓ` schedule.
fn check_max_mst(
    checks: &mut Checks,
    tag: &str,
    k: usize,
    trace: &MaxMstTrace,
    labels: &Labels,
    model: &DistanceModel,
    profile: &OptimalProfile,
) -> Result<f64> {
    let w_star = &profile.w_star;
    let mut small_groups = Vec::new();
    let mut coarse_low = Vec::new();
    let mut refined_low = Vec::new();
    let mut skipped = Vec::new();
    let mut upper = 0.0;
    for r in &trace.records {
        let ell = r.ell;
        let (Some(min_sp_prime), Some(mst_sp), Some(refined)) = (r.min_sp_prime, r.mst_sp, r.labels.as_ref()) else {
            skipped.push(format!("ℓ={ell}: {}", r.reason.as_deref().unwrap_or("skipped")));
            continue;
        };
        upper += min_sp_prime;
        let w = w_star[k - ell];
        if min_sp_prime < w {
            coarse_low.push(format!("ℓ={ell}: Min-Sp(A′)={min_sp_prime} < w*={w}"));
        }
        if !at_least(mst_sp, (ell - 1) as f64 * w) || !at_least(mst_sp, (ell - 1) as f64 * min_sp_prime) {
            refined_low.push(format!("ℓ={ell}: MST-Sp(A)={mst_sp}, w*={w}, Min-Sp(A′)={min_sp_prime}"));
        }
        if let Some(s) = refined.sizes().into_iter().find(|&s| s < trace.size_floor) {
            small_groups.push(format!("ℓ={ell}: group of {s} < {}", trace.size_floor));
        }
    }
    checks.push(format!("all_ell_ran_{tag}"), skipped.is_empty(), || skipped.join("; "));
    checks.push(format!("refined_sizes_{tag}"), small_groups.is_empty(), || small_groups.join("; "));
    checks.push(format!("coarse_min_sp_{tag}"), coarse_low.is_empty(), || coarse_low.join("; "));
    checks.push(format!("refined_mst_{tag}"), refined_low.is_empty(), || refined_low.join("; "));

    let final_mst = spacing_graph(model, labels)?.mst().total;
    let h = harmonic(k - 1);
    checks.push(format!("maxmst_harmonic_bound_{tag}"), at_least(final_mst * h, profile.best_mst_sp), || {
        format!("MST-Sp={final_mst}, OPT={}, H={h}", profile.best_mst_sp)
    });
    let smallest = labels.sizes().into_iter().min().unwrap_or(0);
    checks.push(format!("maxmst_sizes_{tag}"), smallest >= trace.size_floor, || {
        format!("smallest group {smallest} < {}", trace.size_floor)
    });
    let ratio = final_mst / upper;
    checks
        .push(format!("ratio_lower_{tag}"), at_least(ratio * h, 1.0), || format!("ratio {ratio} < 1/H = {}", 1.0 / h));
    checks.push(format!("ratio_upper_{tag}"), at_least(1.0, ratio), || {
        format!("MST-Sp={final_mst} exceeds Σ Min-Sp(A′_ℓ)={upper}")
    });
    Ok(ratio)
}

/// Runs every algorithm on a tiny instance and checks each guarantee
/// against exhaustive optima. Failures are reported, not raised.
pub fn verify_guarantees(model: &DistanceModel, k: usize, constraint: &SizeConstraint, seed: u64) -> Result<Verdict> {
    let n = model.len();
    let min_size = constraint.min_size();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("k = {k} out of range 2..={n}")));
    }
    if k * min_size > n {
        return Err(Error::Infeasible(format!("k·L = {k}·{min_size} exceeds n = {n}")));
    }
    let seq = single_linkage(model);
    let mut checks = Checks::default();

    // Unconstrained: single-linkage is optimal for both criteria.
    let free = optimal_profile(model, k, 1)?;
    let sl = seq.cut_k(k)?;
    let sl_graph = spacing_graph(model, &sl)?;
    let sl_min = sl_graph.min_sp();
    let sl_mst = sl_graph.mst();
    checks.push("sl_optimal_min_sp", sl_min == free.best_min_sp, || {
        format!("single-linkage {sl_min} vs optimum {}", free.best_min_sp)
    });
    checks.push("sl_optimal_mst_sp", sl_mst.total == free.best_mst_sp, || {
        format!("single-linkage {} vs optimum {}", sl_mst.total, free.best_mst_sp)
    });
    let mut dominance = None;
    for labels in enumerate_clusterings(n, k, 1)? {
        let w = spacing_graph(model, &labels)?.mst().sorted_weights;
        if let Some(i) = (0..k - 1).find(|&i| sl_mst.sorted_weights[i] < w[i]) {
            dominance = Some(format!("{:?}: w_{} = {} > {}", labels.as_slice(), i + 1, w[i], sl_mst.sorted_weights[i]));
            break;
        }
    }
    checks.push("sl_mst_dominance", dominance.is_none(), || dominance.unwrap_or_default());

    // Size-constrained.
    let profile = optimal_profile(model, k, min_size)?;
    let floor = constraint.size_floor();
    let exact = MinSpOptions { scheduler: Scheduler::Exact, search: PrefixSearch::Binary };
    let a = algo_min_sp(&seq, k, constraint, exact)?;
    let a_min = spacing_graph(model, &a.labels)?.min_sp();
    let a_small = a.labels.sizes().into_iter().min().unwrap_or(0);
    checks.push("minsp_sizes", a.labels.k() == k && a_small >= floor, || {
        format!("{} groups, smallest {a_small} < {floor}", a.labels.k())
    });
    checks.push("minsp_reaches_optimum", a_min >= profile.best_min_sp, || {
        format!("Min-Sp {a_min} < optimum {}", profile.best_min_sp)
    });
    let linear = algo_min_sp(&seq, k, constraint, MinSpOptions { search: PrefixSearch::Linear, ..exact })?;
    checks.push("binary_search_matches_scan", linear.labels == a.labels && linear.merges == a.merges, || {
        format!("binary t={} vs scan t={}", a.merges, linear.merges)
    });
    let lpt = algo_min_sp(&seq, k, constraint, MinSpOptions::default())?;
    let lpt_small = lpt.labels.sizes().into_iter().min().unwrap_or(0);
    checks.push("lpt_sizes", lpt.labels.k() == k && lpt_small >= floor, || format!("smallest {lpt_small} < {floor}"));

    let mut ratio = None;
    for (tag, schedule) in [("full", EllSchedule::Full), ("fast", EllSchedule::Fast)] {
        let (labels, trace) = constrained_max_mst(&seq, k, constraint, seed, schedule, exact)?;
        let r = check_max_mst(&mut checks, tag, k, &trace, &labels, model, &profile)?;
        if schedule == EllSchedule::Full {
            ratio = Some(r);
        }
    }

    Ok(Verdict { n, k, min_size, checks: checks.0, upper_bound_ratio: ratio })
}
