//! Separation-maximizing clustering with a minimum group size.
//!
//! [`algo_min_sp`] cuts the single-linkage dendrogram at the largest merge
//! prefix whose groups can be packed into `k` groups of at least
//! `(1 − ε)·L` points, packing with a max-min scheduler. It never loses
//! `Min-Sp` against the best `(k, L)`-clustering when the scheduler is exact.
//!
//! [`constrained_max_mst`] runs [`algo_min_sp`] for a range of coarser group
//! counts `ℓ`, refines each result into exactly `k` groups by splitting the
//! largest groups first, and keeps the refinement with the largest `MST-Sp`.
//! Its `MST-Sp` is within `1/H_{k−1}` of the best `(k, L)`-clustering while
//! every group keeps at least `⌊ρ(1 − ε)L/2⌋` points, `ρ = min(n/(kL), 2)`.
//!
//! All size thresholds are compared in exact rational arithmetic.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Labels;
use crate::error::{Error, Result};
use crate::linkage::MergeSequence;
use crate::scheduling::{ScheduleAssignment, Scheduler};
use crate::spacing::tree_criteria;

pub type Rational = Ratio<i64>;

/// Parses `"0"`, `"0.25"`, `".5"` or `"1/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("not a decimal or fraction: {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let scale = 10i64.pow(frac.len() as u32);
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    Ok(Rational::new(if negative { -num } else { num }, scale))
}

fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Minimum group size `L` with relaxation `ε ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeConstraint {
    min_size: usize,
    epsilon: Rational,
}

impl SizeConstraint {
    pub fn new(min_size: usize, epsilon: Rational) -> Result<Self> {
        if min_size == 0 {
            return Err(Error::invalid("minimum group size must be positive"));
        }
        if epsilon < Rational::from_integer(0) || epsilon >= Rational::from_integer(1) {
            return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1)")));
        }
        Ok(SizeConstraint { min_size, epsilon })
    }

    pub fn strict(min_size: usize) -> Result<Self> {
        Self::new(min_size, Rational::from_integer(0))
    }

    pub fn min_size(&self) -> usize {
        self.min_size
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    pub fn epsilon_f64(&self) -> f64 {
        ratio_to_f64(self.epsilon)
    }

    /// `τ = (1 − ε)·L`.
    pub fn threshold(&self) -> Rational {
        (Rational::from_integer(1) - self.epsilon) * Rational::from_integer(self.min_size as i64)
    }

    /// Whether a group of `size` points meets `τ`.
    pub fn admits(&self, size: u64) -> bool {
        Rational::from_integer(size as i64) >= self.threshold()
    }

    /// `⌈τ⌉`, the smallest admissible group size.
    pub fn size_floor(&self) -> usize {
        self.threshold().ceil().to_integer() as usize
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        if k < 2 || k > n {
            return Err(Error::invalid(format!("k = {k} out of range 2..={n}")));
        }
        if k * self.min_size > n {
            return Err(Error::Infeasible(format!("k·L = {}·{} exceeds n = {n}", k, self.min_size)));
        }
        Ok(())
    }
}

/// How [`algo_min_sp`] looks for the merge prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrefixSearch {
    /// Binary search, certified or backed by a partial descending scan.
    #[default]
    Binary,
    /// Descending scan from `n − k`, one schedule per prefix.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinSpOptions {
    pub scheduler: Scheduler,
    pub search: PrefixSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSpOutcome {
    pub labels: Labels,
    /// Number of single-linkage merges `t` behind the result.
    pub merges: usize,
    /// Scheduler that produced the accepted packing.
    pub scheduler: Scheduler,
    /// The binary search could not certify its answer and part of the
    /// descending scan ran.
    pub scanned: bool,
}

/// Upper bound on the optimal max-min load: the `j` largest items sit on at
/// most `j` machines, so the other `k − j` share the rest.
fn covering_upper_bound(sizes: &[u64], k: usize) -> u64 {
    if sizes.len() < k {
        return 0;
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut rest: u64 = sorted.iter().sum();
    let mut bound = u64::MAX;
    for (j, &s) in sorted.iter().take(k).enumerate() {
        bound = bound.min(rest / (k - j) as u64);
        rest -= s;
    }
    bound
}

struct PrefixProbe<'a> {
    seq: &'a MergeSequence,
    k: usize,
    constraint: &'a SizeConstraint,
    scheduler: Scheduler,
}

impl PrefixProbe<'_> {
    fn sizes(&self, t: usize) -> Result<Vec<u64>> {
        Ok(self.seq.group_sizes(t)?.into_iter().map(|s| s as u64).collect())
    }

    fn feasible_with(&self, t: usize, scheduler: Scheduler) -> Result<Option<ScheduleAssignment>> {
        let schedule = scheduler.schedule(&self.sizes(t)?, self.k)?;
        Ok(self.constraint.admits(schedule.min_load).then_some(schedule))
    }

    fn feasible(&self, t: usize) -> Result<Option<ScheduleAssignment>> {
        self.feasible_with(t, self.scheduler)
    }

    /// True when no prefix `≥ t` can be feasible under any scheduler.
    fn certainly_infeasible_from(&self, t: usize) -> Result<bool> {
        // Merging groups never raises the optimal min load, so a bound at t
        // covers every longer prefix.
        let bound = covering_upper_bound(&self.sizes(t)?, self.k);
        Ok(!self.constraint.admits(bound))
    }

    fn build(
        &self,
        t: usize,
        schedule: &ScheduleAssignment,
        scheduler: Scheduler,
        scanned: bool,
    ) -> Result<MinSpOutcome> {
        let groups = self.seq.cut(t)?;
        let assign = groups.as_slice().iter().map(|&g| schedule.machine_of[g]).collect();
        Ok(MinSpOutcome { labels: Labels::new(assign)?.canonical(), merges: t, scheduler, scanned })
    }

    fn linear(&self, from: usize, down_to: usize) -> Result<Option<(usize, ScheduleAssignment)>> {
        for t in (down_to..=from).rev() {
            if let Some(s) = self.feasible(t)? {
                return Ok(Some((t, s)));
            }
        }
        Ok(None)
    }

    /// Largest feasible prefix, identical to the descending scan.
    fn binary(&self, top: usize) -> Result<Option<(usize, ScheduleAssignment, bool)>> {
        if let Some(s) = self.feasible(top)? {
            return Ok(Some((top, s, false)));
        }
        if top == 0 {
            return Ok(None);
        }
        let Some(mut lo_schedule) = self.feasible(0)? else {
            // A descending scan would also have reached t = 0 and failed; any
            // feasible prefix above it would make this a nonmonotone instance.
            return Ok(self.linear(top - 1, 1)?.map(|(t, s)| (t, s, true)));
        };
        let (mut lo, mut hi) = (0, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match self.feasible(mid)? {
                Some(s) => {
                    lo = mid;
                    lo_schedule = s;
                }
                None => hi = mid,
            }
        }
        let certified = self.scheduler == Scheduler::Exact || self.certainly_infeasible_from(hi)?;
        if certified || hi + 1 > top - 1 {
            return Ok(Some((lo, lo_schedule, false)));
        }
        match self.linear(top - 1, hi + 1)? {
            Some((t, s)) => Ok(Some((t, s, true))),
            None => Ok(Some((lo, lo_schedule, true))),
        }
    }
}

/// Cuts the dendrogram at the largest prefix `t` whose group sizes pack onto
/// `k` machines with every load at least `(1 − ε)·L`, and returns that packing.
pub fn algo_min_sp(
    seq: &MergeSequence,
    k: usize,
    constraint: &SizeConstraint,
    opts: MinSpOptions,
) -> Result<MinSpOutcome> {
    let n = seq.n();
    constraint.check(n, k)?;
    let probe = PrefixProbe { seq, k, constraint, scheduler: opts.scheduler };
    let top = n - k;
    let found = match opts.search {
        PrefixSearch::Linear => probe.linear(top, 0)?.map(|(t, s)| (t, s, false)),
        PrefixSearch::Binary => probe.binary(top)?,
    };
    if let Some((t, schedule, scanned)) = found {
        return probe.build(t, &schedule, opts.scheduler, scanned);
    }
    if opts.scheduler == Scheduler::Lpt {
        if let Some(schedule) = probe.feasible_with(0, Scheduler::Exact)? {
            return probe.build(0, &schedule, Scheduler::Exact, false);
        }
    }
    Err(Error::Infeasible(format!(
        "no merge prefix packs into {k} groups of at least {} points",
        constraint.threshold()
    )))
}

/// Which coarse group counts `ℓ` to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EllSchedule {
    /// Every `ℓ` in `2..=k`.
    #[default]
    Full,
    /// `⌈k/2^t⌉` for `t = 0..=⌊log₂ k⌋`, restricted to `ℓ ≥ 2`.
    Fast,
}

/// The `ℓ` values of a schedule, ascending and distinct.
pub fn ell_values(k: usize, schedule: EllSchedule) -> Vec<usize> {
    if k < 2 {
        return Vec::new();
    }
    match schedule {
        EllSchedule::Full => (2..=k).collect(),
        EllSchedule::Fast => {
            let mut out: Vec<usize> = (0..=k.ilog2()).map(|t| k.div_ceil(1 << t)).filter(|&l| l >= 2).collect();
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

/// Splits `group` into `m` parts whose sizes differ by at most one.
///
/// Membership comes from a seeded shuffle followed by contiguous chunks; each
/// part is returned in ascending order.
pub fn balanced_split(group: &[usize], m: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    balanced_split_with(group, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn balanced_split_with(group: &[usize], m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if m == 0 || m > group.len() {
        return Err(Error::invalid(format!("cannot split {} points into {m} parts", group.len())));
    }
    let mut shuffled = group.to_vec();
    if m > 1 {
        shuffled.shuffle(rng);
    }
    let (base, extra) = (group.len() / m, group.len() % m);
    let mut parts = Vec::with_capacity(m);
    let mut start = 0;
    for i in 0..m {
        let len = base + usize::from(i < extra);
        let mut part = shuffled[start..start + len].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += len;
    }
    Ok(parts)
}

/// One `ℓ` of [`constrained_max_mst`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllRecord {
    pub ell: usize,
    /// `Min-Sp` of the `ℓ`-clustering.
    pub min_sp_prime: Option<f64>,
    /// `MST-Sp` of its refinement into `k` groups.
    pub mst_sp: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Split-count clamps applied while refining.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
    /// Merge prefix behind the `ℓ`-clustering.
    #[serde(skip)]
    pub merges: Option<usize>,
    /// The refined `k`-clustering.
    #[serde(skip)]
    pub labels: Option<Labels>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxMstTrace {
    pub records: Vec<EllRecord>,
    pub rho: f64,
    /// `ρ` as an exact fraction.
    pub rho_exact: String,
    pub chosen_ell: usize,
    #[serde(rename = "bound_1_over_H")]
    pub bound_1_over_h: f64,
    /// `⌊ρ(1 − ε)L/2⌋`, the guaranteed smallest group.
    pub size_floor: usize,
}

/// `H_m = 1 + 1/2 + … + 1/m`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// `ρ = min(n/(kL), 2)`.
pub fn rho(n: usize, k: usize, constraint: &SizeConstraint) -> Rational {
    let r = Rational::new(n as i64, (k * constraint.min_size()) as i64);
    r.min(Rational::from_integer(2))
}

struct Refinement {
    groups: Vec<Vec<usize>>,
    events: Vec<String>,
}

/// Turns an `ℓ`-clustering into a `k`-clustering, visiting groups from the
/// largest to the smallest and splitting each into balanced parts.
fn refine(coarse: &Labels, k: usize, rho_tau: Rational, rng: &mut ChaCha8Rng) -> Result<Refinement> {
    let groups = coarse.groups();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by_key(|&g| (std::cmp::Reverse(groups[g].len()), g));

    let mut out: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut events = Vec::new();
    let mut non_visited = groups.len();
    for (pos, &g) in order.iter().enumerate() {
        let group = &groups[g];
        non_visited -= 1;
        let raw = (Rational::from_integer(2 * group.len() as i64) / rho_tau).floor().to_integer() as usize;
        let split = raw.clamp(1, group.len());
        if split != raw {
            events.push(format!("split count for a group of {} clamped from {raw} to {split}", group.len()));
        }
        if out.len() + non_visited + split < k {
            out.extend(balanced_split_with(group, split, rng)?);
        } else {
            let parts = k - out.len() - non_visited;
            out.extend(balanced_split_with(group, parts, rng)?);
            out.extend(order[pos + 1..].iter().map(|&h| groups[h].clone()));
            return Ok(Refinement { groups: out, events });
        }
    }
    Err(Error::Infeasible(format!("refinement stopped at {} of {k} groups", out.len())))
}

/// Best `MST-Sp` refinement over the `ℓ` schedule.
///
/// Each `ℓ` is independent and runs in parallel; the trace is ordered by `ℓ`
/// and ties in `MST-Sp` go to the smaller `ℓ`. A failing `ℓ` is recorded as
/// skipped; the call fails only if every `ℓ` does.
pub fn constrained_max_mst(
    seq: &MergeSequence,
    k: usize,
    constraint: &SizeConstraint,
    seed: u64,
    schedule: EllSchedule,
    opts: MinSpOptions,
) -> Result<(Labels, MaxMstTrace)> {
    let n = seq.n();
    constraint.check(n, k)?;
    let rho = rho(n, k, constraint);
    let rho_tau = rho * constraint.threshold();
    let size_floor = (rho_tau / Rational::from_integer(2)).floor().to_integer() as usize;

    let records: Vec<EllRecord> = ell_values(k, schedule)
        .into_par_iter()
        .map(|ell| {
            let mut record = EllRecord {
                ell,
                min_sp_prime: None,
                mst_sp: None,
                skipped: false,
                reason: None,
                events: Vec::new(),
                merges: None,
                labels: None,
            };
            let attempt = (|| -> Result<()> {
                let coarse = algo_min_sp(seq, ell, constraint, opts)?;
                record.merges = Some(coarse.merges);
                record.min_sp_prime = Some(tree_criteria(seq, &coarse.labels)?.min_sp);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(ell as u64);
                let refined = refine(&coarse.labels, k, rho_tau, &mut rng)?;
                record.events = refined.events;
                let labels = Labels::from_groups(n, &refined.groups)?.canonical();
                record.mst_sp = Some(tree_criteria(seq, &labels)?.mst_total);
                record.labels = Some(labels);
                Ok(())
            })();
            if let Err(e) = attempt {
                record.skipped = true;
                record.reason = Some(e.to_string());
            }
            record
        })
        .collect();

    let mut chosen: Option<&EllRecord> = None;
    for r in records.iter().filter(|r| !r.skipped) {
        if chosen.is_none_or(|c| r.mst_sp > c.mst_sp) {
            chosen = Some(r);
        }
    }
    let Some(best) = chosen else {
        let reasons: Vec<String> =
            records.iter().map(|r| format!("ℓ={}: {}", r.ell, r.reason.as_deref().unwrap_or("?"))).collect();
        return Err(Error::Infeasible(format!("every ℓ failed ({})", reasons.join("; "))));
    };
    let labels = best.labels.clone().expect("kept records carry labels");
    let chosen_ell = best.ell;
    Ok((
        labels,
        MaxMstTrace {
            records,
            rho: ratio_to_f64(rho),
            rho_exact: rho.to_string(),
            chosen_ell,
            bound_1_over_h: 1.0 / harmonic(k - 1),
            size_floor,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DistanceModel;
    use crate::linkage::single_linkage;
    use crate::spacing::spacing_graph;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> DistanceModel {
        DistanceModel::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn exact() -> MinSpOptions {
        MinSpOptions { scheduler: Scheduler::Exact, search: PrefixSearch::Binary }
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("0").unwrap(), Rational::from_integer(0));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational("0.1").unwrap(), Rational::new(1, 10));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn threshold_is_exact() {
        let c = SizeConstraint::new(10, parse_rational("0.1").unwrap()).unwrap();
        assert_eq!(c.threshold(), Rational::from_integer(9));
        assert!(c.admits(9));
        assert!(!c.admits(8));
        let c = SizeConstraint::new(3, parse_rational("0.5").unwrap()).unwrap();
        assert_eq!(c.size_floor(), 2);
        assert!(SizeConstraint::new(3, Rational::from_integer(1)).is_err());
        assert!(SizeConstraint::new(0, Rational::from_integer(0)).is_err());
    }

    #[test]
    fn three_pairs() {
        let m = line(&[0.0, 1.0, 10.0, 11.0, 20.0, 21.0]);
        let seq = single_linkage(&m);
        let out = algo_min_sp(&seq, 3, &SizeConstraint::strict(2).unwrap(), MinSpOptions::default()).unwrap();
        assert_eq!(out.merges, 3);
        assert_eq!(out.labels.groups(), vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        assert_eq!(spacing_graph(&m, &out.labels).unwrap().min_sp(), 9.0);
    }

    #[test]
    fn outlier_absorbed() {
        let m = line(&[0.0, 1.0, 2.0, 10.0, 20.0, 21.0, 22.0]);
        let seq = single_linkage(&m);
        for opts in [MinSpOptions::default(), exact()] {
            let out = algo_min_sp(&seq, 2, &SizeConstraint::strict(3).unwrap(), opts).unwrap();
            assert_eq!(out.merges, 5);
            assert_eq!(out.labels.groups(), vec![vec![0, 1, 2, 3], vec![4, 5, 6]]);
            assert_eq!(spacing_graph(&m, &out.labels).unwrap().min_sp(), 10.0);
        }
    }

    #[test]
    fn infeasible_size() {
        let seq = single_linkage(&line(&[0.0, 1.0, 2.0, 3.0, 4.0]));
        let err = algo_min_sp(&seq, 2, &SizeConstraint::strict(3).unwrap(), MinSpOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
        assert!(err.to_string().contains("infeasible"));
    }

    #[test]
    fn fast_schedule_values() {
        assert_eq!(ell_values(26, EllSchedule::Fast), vec![2, 4, 7, 13, 26]);
        assert_eq!(ell_values(2, EllSchedule::Fast), vec![2]);
        assert_eq!(ell_values(2, EllSchedule::Full), vec![2]);
        assert_eq!(ell_values(5, EllSchedule::Full), vec![2, 3, 4, 5]);
    }

    #[test]
    fn balanced_split_contract() {
        let ids: Vec<usize> = (0..7).collect();
        let parts = balanced_split(&ids, 3, 1).unwrap();
        let mut sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, ids);
        assert_eq!(balanced_split(&ids[..6], 1, 9).unwrap(), vec![ids[..6].to_vec()]);
        assert_eq!(balanced_split(&ids, 3, 42).unwrap(), balanced_split(&ids, 3, 42).unwrap());
        assert!(balanced_split(&ids, 8, 0).is_err());
        assert!(balanced_split(&ids, 0, 0).is_err());
    }

    #[test]
    fn k_two_is_algo_min_sp() {
        let m = line(&[0.0, 1.0, 2.0, 10.0, 20.0, 21.0, 22.0]);
        let seq = single_linkage(&m);
        let c = SizeConstraint::strict(3).unwrap();
        let direct = algo_min_sp(&seq, 2, &c, MinSpOptions::default()).unwrap();
        for schedule in [EllSchedule::Full, EllSchedule::Fast] {
            let (labels, trace) = constrained_max_mst(&seq, 2, &c, 0, schedule, MinSpOptions::default()).unwrap();
            assert_eq!(labels, direct.labels);
            assert_eq!(trace.records.len(), 1);
            assert_eq!(trace.chosen_ell, 2);
        }
    }

    #[test]
    fn three_clumps() {
        let m = line(&[0.0, 1.0, 2.0, 3.0, 100.0, 101.0, 102.0, 103.0, 200.0, 201.0]);
        let seq = single_linkage(&m);
        let c = SizeConstraint::strict(2).unwrap();
        let (labels, trace) = constrained_max_mst(&seq, 3, &c, 7, EllSchedule::Full, exact()).unwrap();
        assert_eq!(trace.rho_exact, "5/3");
        let r3 = trace.records.iter().find(|r| r.ell == 3).unwrap();
        assert!(r3.min_sp_prime.unwrap() >= 97.0);
        // The three clumps are the optimal (3,2)-clustering: MST-Sp 97 + 97.
        assert_eq!(labels.groups(), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9]]);
        let g = spacing_graph(&m, &labels).unwrap();
        assert_eq!(g.mst().total, 194.0);
        assert!(labels.sizes().iter().all(|&s| s >= trace.size_floor));
        assert_eq!(trace.size_floor, 1);
    }

    #[test]
    fn trace_json_shape() {
        let m = line(&[0.0, 1.0, 2.0, 3.0, 100.0, 101.0, 102.0, 103.0, 200.0, 201.0]);
        let seq = single_linkage(&m);
        let (_, trace) = constrained_max_mst(
            &seq,
            3,
            &SizeConstraint::strict(2).unwrap(),
            7,
            EllSchedule::Full,
            MinSpOptions::default(),
        )
        .unwrap();
        let rec = &trace.records[0];
        assert_eq!(rec.ell, 2);
        assert!(!rec.skipped && rec.reason.is_none());
    }

    #[test]
    fn covering_bound_examples() {
        assert_eq!(covering_upper_bound(&[5, 4, 3, 3, 2], 2), 8);
        assert_eq!(covering_upper_bound(&[10, 1, 1], 2), 2);
        assert_eq!(covering_upper_bound(&[1], 2), 0);
    }

    proptest! {
        #[test]
        fn binary_search_equals_descending_scan(
            xs in proptest::collection::vec(0.0f64..1000.0, 6..60),
            k in 2usize..6,
            l in 1usize..6,
        ) {
            prop_assume!(k * l <= xs.len());
            let seq = single_linkage(&line(&xs));
            let c = SizeConstraint::strict(l).unwrap();
            let bin = algo_min_sp(&seq, k, &c, MinSpOptions { scheduler: Scheduler::Lpt, search: PrefixSearch::Binary }).unwrap();
            let lin = algo_min_sp(&seq, k, &c, MinSpOptions { scheduler: Scheduler::Lpt, search: PrefixSearch::Linear }).unwrap();
            prop_assert_eq!(bin.merges, lin.merges);
            prop_assert_eq!(bin.labels, lin.labels);
        }

        #[test]
        fn covering_bound_dominates_optimum(sizes in proptest::collection::vec(1u64..30, 1..10), k in 1usize..5) {
            let opt = crate::scheduling::exact_schedule(&sizes, k).unwrap().min_load;
            prop_assert!(covering_upper_bound(&sizes, k) >= opt);
        }

        #[test]
        fn max_mst_sizes_and_count(
            xs in proptest::collection::vec(0.0f64..100.0, 8..40),
            k in 2usize..6,
            l in 1usize..5,
            seed in 0u64..1000,
        ) {
            prop_assume!(k * l <= xs.len());
            let seq = single_linkage(&line(&xs));
            let c = SizeConstraint::strict(l).unwrap();
            let (labels, trace) = constrained_max_mst(&seq, k, &c, seed, EllSchedule::Full, MinSpOptions::default()).unwrap();
            prop_assert_eq!(labels.k(), k);
            prop_assert!(labels.sizes().iter().all(|&s| s >= trace.size_floor));
            let chosen = trace.records.iter().find(|r| r.ell == trace.chosen_ell).unwrap();
            prop_assert!(trace.records.iter().filter(|r| !r.skipped).all(|r| r.mst_sp <= chosen.mst_sp));
        }

        #[test]
        fn balanced_parts_differ_by_at_most_one(len in 1usize..50, m in 1usize..50, seed in 0u64..100) {
            prop_assume!(m <= len);
            let ids: Vec<usize> = (100..100 + len).collect();
            let parts = balanced_split(&ids, m, seed).unwrap();
            prop_assert_eq!(parts.len(), m);
            let max = parts.iter().map(Vec::len).max().unwrap();
            let min = parts.iter().map(Vec::len).min().unwrap();
            prop_assert!(max - min <= 1);
            let mut all = parts.concat();
            all.sort_unstable();
            prop_assert_eq!(all, ids);
        }
    }
}
