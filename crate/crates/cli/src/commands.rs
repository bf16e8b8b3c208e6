use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use spacing_clust::baseline::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use spacing_clust::constrained::{
    algo_min_sp, constrained_max_mst, parse_rational, EllSchedule, MinSpOptions, PrefixSearch, SizeConstraint,
};
use spacing_clust::dataset::{self, CsvOptions, DistanceModel, Labels};
use spacing_clust::linkage::{single_linkage, singleton_sweep_seq, MergeSequence};
use spacing_clust::oracle::verify_guarantees;
use spacing_clust::scheduling::{exact_schedule, lpt_schedule, ScheduleAssignment, Scheduler};
use spacing_clust::spacing::{quadratic_loss, report, tree_criteria};

use crate::output::{cell, emit, json, CliError};
use crate::{
    Algo, CompareArgs, DendrogramArgs, InputArgs, RunArgs, SchedArgs, SchedulerArg, SearchArg, SingletonArgs,
    VerifyArgs,
};

fn load(input: &InputArgs) -> Result<DistanceModel, CliError> {
    let model = match (&input.input, &input.matrix) {
        (Some(path), None) => {
            dataset::load_csv(path, CsvOptions { has_header: input.header, label_col: input.label_col })?
        }
        (None, Some(path)) => {
            if input.label_col {
                return Err(CliError::config("--label-col applies to point input only"));
            }
            dataset::load_matrix(path, input.header)?
        }
        _ => return Err(CliError::config("give exactly one of --input and --matrix")),
    };
    Ok(model)
}

impl From<SchedulerArg> for Scheduler {
    fn from(s: SchedulerArg) -> Self {
        match s {
            SchedulerArg::Lpt => Scheduler::Lpt,
            SchedulerArg::Exact => Scheduler::Exact,
        }
    }
}

fn scheduler_name(s: Scheduler) -> &'static str {
    match s {
        Scheduler::Lpt => "lpt",
        Scheduler::Exact => "exact",
    }
}

/// Whole seconds, so that reruns stay byte-identical on fast inputs.
fn seconds(elapsed: Duration, enabled: bool) -> Option<f64> {
    enabled.then_some(elapsed.as_secs() as f64)
}

fn labels_csv(labels: &Labels) -> Vec<u8> {
    let mut out = String::from("point,group\n");
    for (p, g) in labels.canonical().as_slice().iter().enumerate() {
        let _ = writeln!(out, "{p},{g}");
    }
    out.into_bytes()
}

#[derive(Serialize)]
struct MinSpTrace {
    merges: usize,
    scheduler: &'static str,
    scanned: bool,
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let model = load(&args.input)?;
    let epsilon = parse_rational(&args.epsilon)?;
    let opts = MinSpOptions {
        scheduler: args.scheduler.into(),
        search: match args.search {
            SearchArg::Binary => PrefixSearch::Binary,
            SearchArg::Linear => PrefixSearch::Linear,
        },
    };
    let constraint = || -> Result<SizeConstraint, CliError> {
        let l = args.min_size.ok_or_else(|| CliError::config("--L is required for minsp and maxmst"))?;
        Ok(SizeConstraint::new(l, epsilon)?)
    };

    let start = Instant::now();
    let mut trace = None;
    let (labels, name, used_l) = match args.algo {
        Algo::SingleLinkage => (single_linkage(&model).cut_k(args.k)?, "single-linkage", None),
        Algo::Kmeans => {
            let r = baseline::kmeans(&model, args.k, args.seed, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
            (r.labels, "kmeans", None)
        }
        Algo::Minsp => {
            let c = constraint()?;
            let outcome = algo_min_sp(&single_linkage(&model), args.k, &c, opts)?;
            trace = Some(json(&MinSpTrace {
                merges: outcome.merges,
                scheduler: scheduler_name(outcome.scheduler),
                scanned: outcome.scanned,
            })?);
            (outcome.labels, "minsp", Some(c))
        }
        Algo::Maxmst | Algo::MaxmstFast => {
            let c = constraint()?;
            let fast = args.fast || args.algo == Algo::MaxmstFast;
            let schedule = if fast { EllSchedule::Fast } else { EllSchedule::Full };
            let (labels, t) = constrained_max_mst(&single_linkage(&model), args.k, &c, args.seed, schedule, opts)?;
            trace = Some(json(&t)?);
            (labels, if fast { "maxmst-fast" } else { "maxmst" }, Some(c))
        }
    };
    let elapsed = start.elapsed();

    let mut rep = report(&model, &labels)?;
    rep.algo = Some(name.to_string());
    rep.min_size = used_l.map(|c| c.min_size());
    rep.epsilon = used_l.map(|c| c.epsilon_f64());
    rep.seed = Some(args.seed);
    rep.runtime_s = seconds(elapsed, !args.no_runtime);

    if let Some(path) = &args.out_labels {
        emit(Some(path), &labels_csv(&labels))?;
    }
    if let (Some(path), Some(bytes)) = (&args.out_trace, &trace) {
        emit(Some(path), bytes)?;
    }
    emit(args.out_report.as_deref(), &json(&rep)?)
}

/// `"0..10"`, `"3"`, `"1,4,7"` or a mix.
fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::config(format!("invalid --seeds value {text:?}"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

struct Row {
    seed: u64,
    algo: &'static str,
    min_size: usize,
    min_sp: f64,
    mst_sp: f64,
    smallest: usize,
    quad_loss: Option<f64>,
    runtime_s: Option<f64>,
}

impl Row {
    fn new(
        seq: &MergeSequence,
        model: &DistanceModel,
        labels: &Labels,
        seed: u64,
        algo: &'static str,
        min_size: usize,
        runtime_s: Option<f64>,
    ) -> Result<Row, CliError> {
        let t = tree_criteria(seq, labels)?;
        Ok(Row {
            seed,
            algo,
            min_size,
            min_sp: t.min_sp,
            mst_sp: t.mst_total,
            smallest: labels.sizes().into_iter().min().unwrap_or(0),
            quad_loss: quadratic_loss(model, labels),
            runtime_s,
        })
    }
}

const COMPARE_HEADER: &str = "seed,algo,k,L,min_sp,mst_sp,smallest_size,quad_loss,runtime_s\n";
const ALGOS: [&str; 3] = ["kmeans", "minsp", "maxmst"];

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    if args.input.matrix.is_some() {
        return Err(CliError::config("compare runs k-means and needs point input (--input)"));
    }
    let model = load(&args.input)?;
    let epsilon = parse_rational(&args.epsilon)?;
    let seeds = parse_seeds(&args.seeds)?;
    let k = args.k;
    let timing = !args.no_runtime;
    let opts = MinSpOptions { scheduler: args.scheduler.into(), ..MinSpOptions::default() };
    let schedule = if args.fast { EllSchedule::Fast } else { EllSchedule::Full };

    let start = Instant::now();
    let seq = single_linkage(&model);
    let linkage_time = start.elapsed();

    let per_seed: Vec<Vec<Row>> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<Row>, CliError> {
            let start = Instant::now();
            let km = baseline::kmeans(&model, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
            let km_time = start.elapsed();
            let l = baseline::derived_min_size(&km.labels);
            let c = SizeConstraint::new(l, epsilon)?;

            let start = Instant::now();
            let minsp = algo_min_sp(&seq, k, &c, opts)?;
            let minsp_time = start.elapsed() + linkage_time;

            let start = Instant::now();
            let (maxmst, _) = constrained_max_mst(&seq, k, &c, seed, schedule, opts)?;
            let maxmst_time = start.elapsed() + linkage_time;

            Ok(vec![
                Row::new(&seq, &model, &km.labels, seed, ALGOS[0], l, seconds(km_time, timing))?,
                Row::new(&seq, &model, &minsp.labels, seed, ALGOS[1], l, seconds(minsp_time, timing))?,
                Row::new(&seq, &model, &maxmst, seed, ALGOS[2], l, seconds(maxmst_time, timing))?,
            ])
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Row> = per_seed.into_iter().flatten().collect();

    let mut out = String::from(COMPARE_HEADER);
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{k},{},{},{},{},{},{}",
            r.seed,
            r.algo,
            r.min_size,
            r.min_sp,
            r.mst_sp,
            r.smallest,
            cell(r.quad_loss),
            cell(r.runtime_s)
        );
    }
    emit(args.out.as_deref(), out.as_bytes())?;

    if let Some(path) = &args.out_summary {
        let mut summary = String::from("algo,k,seeds,min_sp,mst_sp,smallest_size,quad_loss,runtime_s\n");
        for algo in ALGOS {
            let group: Vec<&Row> = rows.iter().filter(|r| r.algo == algo).collect();
            let mean = |f: &dyn Fn(&Row) -> Option<f64>| -> Option<f64> {
                let values: Option<Vec<f64>> = group.iter().map(|r| f(r)).collect();
                values.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            };
            let _ = writeln!(
                summary,
                "{algo},{k},{},{},{},{},{},{}",
                group.len(),
                cell(mean(&|r| Some(r.min_sp))),
                cell(mean(&|r| Some(r.mst_sp))),
                cell(mean(&|r| Some(r.smallest as f64))),
                cell(mean(&|r| r.quad_loss)),
                cell(mean(&|r| r.runtime_s)),
            );
        }
        emit(Some(path), summary.as_bytes())?;
    }
    Ok(())
}

pub fn singletons(args: &SingletonArgs) -> Result<(), CliError> {
    let model = load(&args.input)?;
    let n = model.len();
    let k_max = args.k_max.unwrap_or(n);
    if args.k_min < 2 || args.k_min > k_max || k_max > n {
        return Err(CliError::config(format!(
            "k range {}..={k_max} must lie within 2..={n} and be non-empty",
            args.k_min
        )));
    }
    let ks: Vec<usize> = (args.k_min..=k_max).collect();
    let sweep = singleton_sweep_seq(&single_linkage(&model), &ks)?;
    let mut out = String::from("k,proportion\n");
    for (k, p) in sweep {
        let _ = writeln!(out, "{k},{p}");
    }
    emit(args.out.as_deref(), out.as_bytes())
}

pub fn dendrogram(args: &DendrogramArgs) -> Result<(), CliError> {
    let model = load(&args.input)?;
    let mut bytes = Vec::new();
    single_linkage(&model).write_csv(&mut bytes).map_err(|e| CliError::internal(e.to_string()))?;
    emit(args.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct Failure {
    trial: usize,
    check: String,
    witness: Option<String>,
}

#[derive(Serialize)]
struct VerifySummary {
    n: usize,
    k: usize,
    #[serde(rename = "L")]
    min_size: usize,
    epsilon: f64,
    dim: usize,
    seed: u64,
    trials: usize,
    passed_trials: usize,
    /// Failing trials per check.
    check_failures: BTreeMap<String, usize>,
    failures: Vec<Failure>,
    mean_upper_bound_ratio: Option<f64>,
}

const MAX_LISTED_FAILURES: usize = 20;

pub fn oracle_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.dim == 0 {
        return Err(CliError::config("--dim must be positive"));
    }
    let c = SizeConstraint::new(args.min_size, parse_rational(&args.epsilon)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let instances: Vec<DistanceModel> = (0..args.trials)
        .map(|_| {
            let pts = (0..args.n).map(|_| (0..args.dim).map(|_| rng.random::<f64>() * 100.0).collect()).collect();
            DistanceModel::from_points(pts)
        })
        .collect::<Result<_, _>>()?;
    let verdicts: Vec<_> = instances
        .par_iter()
        .enumerate()
        .map(|(trial, model)| verify_guarantees(model, args.k, &c, args.seed.wrapping_add(trial as u64)))
        .collect::<Result<_, _>>()?;

    let mut check_failures = BTreeMap::new();
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for (trial, v) in verdicts.iter().enumerate() {
        ratios.extend(v.upper_bound_ratio);
        for f in v.failures() {
            *check_failures.entry(f.name.clone()).or_insert(0) += 1;
            if failures.len() < MAX_LISTED_FAILURES {
                failures.push(Failure { trial, check: f.name.clone(), witness: f.witness.clone() });
            }
        }
    }
    let summary = VerifySummary {
        n: args.n,
        k: args.k,
        min_size: args.min_size,
        epsilon: c.epsilon_f64(),
        dim: args.dim,
        seed: args.seed,
        trials: args.trials,
        passed_trials: verdicts.iter().filter(|v| v.passed()).count(),
        check_failures,
        failures,
        mean_upper_bound_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
    };
    emit(args.out.as_deref(), &json(&summary)?)
}

#[derive(Serialize)]
struct ScheduleView {
    loads: Vec<u64>,
    min_load: u64,
    machines: Vec<Vec<usize>>,
}

impl From<ScheduleAssignment> for ScheduleView {
    fn from(s: ScheduleAssignment) -> Self {
        ScheduleView { machines: s.machines(), loads: s.loads, min_load: s.min_load }
    }
}

#[derive(Serialize)]
struct SchedComparison {
    k: usize,
    sizes: Vec<u64>,
    lpt: ScheduleView,
    exact: ScheduleView,
}

pub fn oracle_sched(args: &SchedArgs) -> Result<(), CliError> {
    let lpt = lpt_schedule(&args.sizes, args.k)?;
    let exact = exact_schedule(&args.sizes, args.k)?;
    let view = SchedComparison { k: args.k, sizes: args.sizes.clone(), lpt: lpt.into(), exact: exact.into() };
    emit(None, &json(&view)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("5, 1,0..2").unwrap(), vec![5, 1, 0, 1]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("a").is_err());
        assert!(parse_seeds("3..3").is_err());
    }

    #[test]
    fn whole_seconds() {
        assert_eq!(seconds(Duration::from_millis(1999), true), Some(1.0));
        assert_eq!(seconds(Duration::from_millis(10), false), None);
    }
}
