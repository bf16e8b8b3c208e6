//! Max-min scheduling on identical machines (machine covering).
//!
//! Items are the sizes of groups, machines are the output groups: maximizing
//! the smallest machine load maximizes the smallest group size.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Largest instance the exact solver accepts unconditionally.
pub const EXACT_MAX_ITEMS: usize = 20;
/// With at most [`EXACT_FEW_MACHINES`] machines the exact solver accepts this many items.
pub const EXACT_MAX_ITEMS_FEW_MACHINES: usize = 24;
pub const EXACT_FEW_MACHINES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleAssignment {
    /// Machine of each item, indexed like the input sizes. The caller's item
    /// index is its group index, so this doubles as the group → machine map.
    pub machine_of: Vec<usize>,
    pub loads: Vec<u64>,
    pub min_load: u64,
}

impl ScheduleAssignment {
    fn from_assignment(sizes: &[u64], k: usize, machine_of: Vec<usize>) -> Self {
        let mut loads = vec![0; k];
        for (&m, &s) in machine_of.iter().zip(sizes) {
            loads[m] += s;
        }
        let min_load = loads.iter().copied().min().unwrap_or(0);
        ScheduleAssignment { machine_of, loads, min_load }
    }

    /// Items on each machine, ascending.
    pub fn machines(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.loads.len()];
        for (item, &m) in self.machine_of.iter().enumerate() {
            out[m].push(item);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    /// Longest Processing Time first; 3/4-approximate.
    #[default]
    Lpt,
    /// Branch and bound; small instances only.
    Exact,
}

impl Scheduler {
    pub fn schedule(self, sizes: &[u64], k: usize) -> Result<ScheduleAssignment> {
        match self {
            Scheduler::Lpt => lpt_schedule(sizes, k),
            Scheduler::Exact => exact_schedule(sizes, k),
        }
    }
}

fn validate(sizes: &[u64], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("need at least one machine"));
    }
    if sizes.is_empty() {
        return Err(Error::invalid("no items to schedule"));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::invalid(format!("item {i} has nonpositive size")));
    }
    Ok(())
}

/// Items by descending size, equal sizes by ascending index.
fn descending_order(sizes: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (Reverse(sizes[i]), i));
    order
}

/// Each item, largest first, goes to the currently least-loaded machine
/// (lowest machine id on equal loads).
pub fn lpt_schedule(sizes: &[u64], k: usize) -> Result<ScheduleAssignment> {
    validate(sizes, k)?;
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = (0..k).map(|m| Reverse((0, m))).collect();
    let mut machine_of = vec![0; sizes.len()];
    for i in descending_order(sizes) {
        let Reverse((load, m)) = heap.pop().expect("k >= 1");
        machine_of[i] = m;
        heap.push(Reverse((load + sizes[i], m)));
    }
    Ok(ScheduleAssignment::from_assignment(sizes, k, machine_of))
}

/// Optimal max-min schedule by depth-first branch and bound, seeded with LPT.
pub fn exact_schedule(sizes: &[u64], k: usize) -> Result<ScheduleAssignment> {
    validate(sizes, k)?;
    let m = sizes.len();
    let within_budget = m <= EXACT_MAX_ITEMS || (k <= EXACT_FEW_MACHINES && m <= EXACT_MAX_ITEMS_FEW_MACHINES);
    if !within_budget {
        return Err(Error::TooLarge(format!("{m} items on {k} machines")));
    }
    let incumbent = lpt_schedule(sizes, k)?;
    if m < k {
        return Ok(incumbent);
    }
    let total: u64 = sizes.iter().sum();
    let ceiling = total / k as u64;
    if incumbent.min_load == ceiling {
        return Ok(incumbent);
    }

    let order = descending_order(sizes);
    let sorted: Vec<u64> = order.iter().map(|&i| sizes[i]).collect();
    let mut suffix = vec![0u64; m + 1];
    for p in (0..m).rev() {
        suffix[p] = suffix[p + 1] + sorted[p];
    }
    let mut search = Search {
        sorted: &sorted,
        suffix: &suffix,
        ceiling,
        loads: vec![0; k],
        placed: vec![0; m],
        best: incumbent.min_load,
        best_placed: None,
    };
    search.dfs(0);

    match search.best_placed {
        None => Ok(incumbent),
        Some(placed) => {
            let mut machine_of = vec![0; m];
            for (pos, &item) in order.iter().enumerate() {
                machine_of[item] = placed[pos];
            }
            Ok(ScheduleAssignment::from_assignment(sizes, k, machine_of))
        }
    }
}

struct Search<'a> {
    sorted: &'a [u64],
    suffix: &'a [u64],
    ceiling: u64,
    loads: Vec<u64>,
    placed: Vec<usize>,
    best: u64,
    best_placed: Option<Vec<usize>>,
}

impl Search<'_> {
    /// No completion can beat the average of the `j` lightest machines once
    /// every remaining item lands on them.
    fn bound(&self, pos: usize) -> u64 {
        let mut loads = self.loads.clone();
        loads.sort_unstable();
        let mut acc = self.suffix[pos];
        let mut bound = u64::MAX;
        for (j, l) in loads.iter().enumerate() {
            acc += l;
            bound = bound.min(acc / (j as u64 + 1));
        }
        bound
    }

    fn dfs(&mut self, pos: usize) {
        if self.best >= self.ceiling {
            return;
        }
        if pos == self.sorted.len() {
            let min = *self.loads.iter().min().expect("k >= 1");
            if min > self.best {
                self.best = min;
                self.best_placed = Some(self.placed.clone());
            }
            return;
        }
        if self.bound(pos) <= self.best {
            return;
        }
        let mut machines: Vec<usize> = (0..self.loads.len()).collect();
        machines.sort_by_key(|&m| (self.loads[m], m));
        let mut last_load = None;
        for m in machines {
            // Machines with equal load are interchangeable.
            if last_load == Some(self.loads[m]) {
                continue;
            }
            last_load = Some(self.loads[m]);
            self.loads[m] += self.sorted[pos];
            self.placed[pos] = m;
            self.dfs(pos + 1);
            self.loads[m] -= self.sorted[pos];
        }
    }
}
