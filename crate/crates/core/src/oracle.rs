//! Ground truth for small instances: exact branch and bound over bin
//! assignments plus a matroid-aware first-fit-decreasing baseline.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use crate::config::{validate_packing, Configuration, Packing};
use crate::instance::{Instance, ItemId};
use crate::rational::{ceil_int, Rational};

#[derive(Debug, Clone)]
pub struct BnbLimits {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for BnbLimits {
    fn default() -> Self {
        BnbLimits {
            max_nodes: 20_000_000,
            time_limit: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExactResult {
    Solved { opt: usize, packing: Packing },
    CapExceeded { best_known: usize, packing: Packing },
}

impl ExactResult {
    pub fn optimal(&self) -> Option<usize> {
        match self {
            ExactResult::Solved { opt, .. } => Some(*opt),
            ExactResult::CapExceeded { .. } => None,
        }
    }
}

struct BnbBin {
    size: Rational,
    counts: Vec<u64>,
    items: Vec<ItemId>,
}

struct Bnb<'a> {
    inst: &'a Instance,
    suffix_size: Vec<Rational>,
    best: usize,
    best_bins: Vec<Vec<ItemId>>,
    bins: Vec<BnbBin>,
    nodes: u64,
    limits: BnbLimits,
    started: Instant,
    aborted: bool,
    analytic_lb: usize,
}

/// Provably minimal bin count by branch and bound: the largest unpacked item
/// goes into each feasible open bin (deduplicating equivalent bins) or a new
/// one. `lp_hint` may supply a known lower bound on the optimum.
pub fn exact_opt(inst: &Instance, limits: BnbLimits, lp_hint: Option<&Rational>) -> ExactResult {
    if inst.is_empty() {
        return ExactResult::Solved {
            opt: 0,
            packing: Packing::empty(),
        };
    }
    let ffd = first_fit_decreasing(inst);
    let mut analytic_lb = ceil_int(&inst.total_size())
        .max(inst.cardinality_bound().into());
    if let Some(lb) = lp_hint {
        analytic_lb = analytic_lb.max(ceil_int(lb));
    }
    let analytic_lb: usize = analytic_lb.try_into().unwrap_or(usize::MAX);
    if ffd.bins.len() <= analytic_lb {
        return ExactResult::Solved {
            opt: ffd.bins.len(),
            packing: ffd,
        };
    }

    let n = inst.n();
    let mut suffix_size = vec![Rational::zero(); n + 1];
    for idx in (0..n).rev() {
        suffix_size[idx] = &suffix_size[idx + 1] + inst.size(ItemId::from_idx(idx));
    }
    let mut state = Bnb {
        inst,
        suffix_size,
        best: ffd.bins.len(),
        best_bins: ffd.bins.iter().map(|b| b.items().to_vec()).collect(),
        bins: Vec::new(),
        nodes: 0,
        limits,
        started: Instant::now(),
        aborted: false,
        analytic_lb,
    };
    state.search(0);
    let packing = Packing {
        bins: state
            .best_bins
            .iter()
            .map(|b| Configuration::new(b.clone()))
            .collect(),
    };
    debug_assert!(validate_packing(inst, &packing, true).is_ok());
    if state.aborted {
        ExactResult::CapExceeded {
            best_known: state.best,
            packing,
        }
    } else {
        ExactResult::Solved {
            opt: state.best,
            packing,
        }
    }
}

impl Bnb<'_> {
    fn lower_bound(&self, next: usize) -> usize {
        // size residual: whatever the open bins cannot absorb needs new bins
        let free: Rational = self
            .bins
            .iter()
            .fold(Rational::zero(), |a, b| a + (Rational::one() - &b.size));
        let overflow = &self.suffix_size[next] - free;
        let mut extra: usize = 0;
        if overflow > Rational::zero() {
            extra = ceil_int(&overflow).try_into().unwrap_or(usize::MAX);
        }
        // matroid residual per group
        for (g, group) in self.inst.groups().iter().enumerate() {
            let remaining = group
                .members
                .iter()
                .filter(|i| i.idx() >= next)
                .count() as u64;
            if remaining == 0 {
                continue;
            }
            let spare: u64 = self.bins.iter().map(|b| group.cap - b.counts[g]).sum();
            if remaining > spare {
                let needed = (remaining - spare).div_ceil(group.cap) as usize;
                extra = extra.max(needed);
            }
        }
        self.bins.len() + extra
    }

    fn search(&mut self, next: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes % 4096 == 0 {
            if let Some(limit) = self.limits.time_limit {
                if self.started.elapsed() > limit {
                    self.aborted = true;
                    return;
                }
            }
        }
        if self.nodes > self.limits.max_nodes {
            self.aborted = true;
            return;
        }
        if next == self.inst.n() {
            if self.bins.len() < self.best {
                self.best = self.bins.len();
                self.best_bins = self.bins.iter().map(|b| b.items.clone()).collect();
            }
            return;
        }
        if self.lower_bound(next) >= self.best || self.best == self.analytic_lb {
            return;
        }

        let item = ItemId::from_idx(next);
        let g = self.inst.group_of(item);
        let size = self.inst.size(item).clone();

        // equivalent bins (same load and group usage) branch identically
        let mut tried: BTreeSet<(Rational, Vec<u64>)> = BTreeSet::new();
        for b in 0..self.bins.len() {
            let fits = self.bins[b].counts[g] < self.inst.group(g).cap
                && &self.bins[b].size + &size <= Rational::one();
            if !fits {
                continue;
            }
            let signature = (self.bins[b].size.clone(), self.bins[b].counts.clone());
            if !tried.insert(signature) {
                continue;
            }
            self.bins[b].size += &size;
            self.bins[b].counts[g] += 1;
            self.bins[b].items.push(item);
            self.search(next + 1);
            self.bins[b].items.pop();
            self.bins[b].counts[g] -= 1;
            self.bins[b].size -= &size;
        }
        // one new bin; all empty bins are equivalent
        if self.bins.len() + 1 < self.best {
            let mut counts = vec![0u64; self.inst.groups().len()];
            counts[g] = 1;
            self.bins.push(BnbBin {
                size,
                counts,
                items: vec![item],
            });
            self.search(next + 1);
            self.bins.pop();
        }
    }
}

/// First-fit decreasing with group caps: items in non-increasing size order
/// go to the first bin admitting both the size and the cardinality cap.
pub fn first_fit_decreasing(inst: &Instance) -> Packing {
    let mut bins: Vec<BnbBin> = Vec::new();
    for item in inst.item_ids() {
        let g = inst.group_of(item);
        let size = inst.size(item);
        let slot = bins.iter_mut().find(|b| {
            b.counts[g] < inst.group(g).cap && &b.size + size <= Rational::one()
        });
        match slot {
            Some(b) => {
                b.size += size;
                b.counts[g] += 1;
                b.items.push(item);
            }
            None => {
                let mut counts = vec![0u64; inst.groups().len()];
                counts[g] = 1;
                bins.push(BnbBin {
                    size: size.clone(),
                    counts,
                    items: vec![item],
                });
            }
        }
    }
    let packing = Packing {
        bins: bins
            .into_iter()
            .map(|b| Configuration::new(b.items))
            .collect(),
    };
    debug_assert!(validate_packing(inst, &packing, true).is_ok());
    packing
}

/// Exhaustive optimum over all set partitions; usable up to ~8 items.
/// Double-checks the branch and bound in tests.
pub fn exhaustive_opt(inst: &Instance) -> usize {
    fn rec(inst: &Instance, next: usize, bins: &mut Vec<Vec<ItemId>>, best: &mut usize) {
        if bins.len() >= *best {
            return;
        }
        if next == inst.n() {
            *best = bins.len();
            return;
        }
        let item = ItemId::from_idx(next);
        for b in 0..bins.len() {
            bins[b].push(item);
            if inst.is_configuration(&Configuration::new(bins[b].clone())) {
                rec(inst, next + 1, bins, best);
            }
            bins[b].pop();
        }
        bins.push(vec![item]);
        rec(inst, next + 1, bins, best);
        bins.pop();
    }
    if inst.is_empty() {
        return 0;
    }
    let mut best = inst.n();
    rec(inst, 0, &mut Vec::new(), &mut best);
    best
}
