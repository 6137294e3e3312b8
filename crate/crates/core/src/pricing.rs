//! Configuration maximization: given nonnegative item weights, find a
//! configuration of maximum total weight (knapsack with a partition matroid).
//! This is the pricing problem of the configuration LP.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::config::Configuration;
use crate::instance::{Instance, ItemId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PricingMode {
    /// Branch and bound over items sorted by weight density; exact optimum.
    Exact,
    /// Profit-scaling dynamic program; weight at least (1 - eps) * optimum.
    Fptas { eps: Rational },
}

#[derive(Debug, Clone)]
pub struct PricedConfig {
    pub config: Configuration,
    pub value: Rational,
}

#[derive(Debug, Clone)]
pub struct PricingOutcome {
    pub best: PricedConfig,
    /// Further distinct configurations of value above 1, best first; useful
    /// as a column pool.
    pub pool: Vec<PricedConfig>,
}

pub fn price_configuration(
    inst: &Instance,
    weights: &[Rational],
    mode: &PricingMode,
) -> PricedConfig {
    price_with_pool(inst, weights, mode).best
}

pub fn price_with_pool(
    inst: &Instance,
    weights: &[Rational],
    mode: &PricingMode,
) -> PricingOutcome {
    debug_assert_eq!(weights.len(), inst.n());
    let candidates: Vec<ItemId> = inst
        .item_ids()
        .filter(|i| weights[i.idx()].is_positive())
        .collect();
    if candidates.is_empty() {
        return PricingOutcome {
            best: PricedConfig {
                config: Configuration::empty(),
                value: Rational::zero(),
            },
            pool: Vec::new(),
        };
    }
    match mode {
        PricingMode::Exact => exact_branch_and_bound(inst, weights, candidates),
        PricingMode::Fptas { eps } => PricingOutcome {
            best: profit_scaling(inst, weights, candidates, eps),
            pool: Vec::new(),
        },
    }
}

/// Branch and bound over integer-scaled weights and sizes. Rational inputs
/// are lifted to a common denominator once, so the search runs on plain
/// integer arithmetic (u128 when everything fits, big integers otherwise)
/// without per-node gcd normalization.
trait PricingInt: Clone + Ord {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn add_assign(&mut self, o: &Self);
    /// ceil(self * a / b)
    fn mul_div_ceil(&self, a: &Self, b: &Self) -> Self;
}

impl PricingInt for u128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul_div_ceil(&self, a: &Self, b: &Self) -> Self {
        (self * a + (b - 1)) / b
    }
}

impl PricingInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul_div_ceil(&self, a: &Self, b: &Self) -> Self {
        (self * a + (b - BigInt::from(1))) / b
    }
}

struct Bnb<'a, T> {
    inst: &'a Instance,
    order: Vec<ItemId>,
    w: Vec<T>,
    s: Vec<T>,
    suffix_s: Vec<T>,
    /// Positions in density order, walked by the fractional bound.
    density_order: Vec<usize>,
    /// For each position, the next position holding a non-equivalent item
    /// (different group, weight or size); used to skip symmetric branches.
    next_distinct: Vec<usize>,
    group_counts: Vec<u64>,
    chosen: Vec<ItemId>,
    best: Vec<ItemId>,
    best_w: T,
    /// Scaled weight corresponding to dual value 1.
    unit_w: T,
    pool: Vec<(T, Vec<ItemId>)>,
}

fn lcm_of(dens: impl Iterator<Item = BigInt>) -> BigInt {
    use num_integer::Integer;
    dens.fold(BigInt::from(1), |a, d| a.lcm(&d))
}

fn exact_branch_and_bound(
    inst: &Instance,
    weights: &[Rational],
    candidates: Vec<ItemId>,
) -> PricingOutcome {
    let weight_scale = lcm_of(candidates.iter().map(|i| weights[i.idx()].denom().clone()));
    let size_scale = lcm_of(candidates.iter().map(|i| inst.size(*i).denom().clone()));
    let scaled_w: Vec<BigInt> = candidates
        .iter()
        .map(|i| {
            let r = &weights[i.idx()];
            r.numer() * (&weight_scale / r.denom())
        })
        .collect();
    let scaled_s: Vec<BigInt> = candidates
        .iter()
        .map(|i| {
            let r = inst.size(*i);
            r.numer() * (&size_scale / r.denom())
        })
        .collect();

    // branch on large items first (ties by id); the dust tail then collapses
    // into the all-fits shortcut instead of exploding the search
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scaled_s[b]
            .cmp(&scaled_s[a])
            .then(candidates[a].cmp(&candidates[b]))
    });
    let order_items: Vec<ItemId> = order.iter().map(|&i| candidates[i]).collect();
    let w: Vec<BigInt> = order.iter().map(|&i| scaled_w[i].clone()).collect();
    let s: Vec<BigInt> = order.iter().map(|&i| scaled_s[i].clone()).collect();
    // the fractional bound walks positions in density order (w/s descending)
    let mut density_order: Vec<usize> = (0..order.len()).collect();
    density_order.sort_by(|&a, &b| {
        let left = &w[b] * &s[a];
        let right = &w[a] * &s[b];
        left.cmp(&right).then(order_items[a].cmp(&order_items[b]))
    });

    // dual values never exceed 1, so scaled weights stay at or below the
    // scale; products fit u128 comfortably when the scales are narrow
    let narrow = weight_scale.bits() + size_scale.bits() + 10
        < 120 - (candidates.len().next_power_of_two().trailing_zeros() as u64)
        && w.iter().all(|x| x.bits() <= weight_scale.bits() + 4);
    let weights_narrow = weight_scale.bits() + 10
        < 120 - (candidates.len().next_power_of_two().trailing_zeros() as u64);
    // a coarse common size grid admits a dynamic program over exact sizes,
    // which is immune to the branch-and-bound's worst cases
    let dp_grid = size_scale.to_u64().filter(|&d| d <= 2048);
    let (best_items, pool_items) = if let Some(grid) = dp_grid {
        let sizes: Vec<u64> = s.iter().map(|x| x.to_u64().expect("fits grid")).collect();
        if weights_narrow {
            let to128 = |x: &BigInt| x.to_u128().expect("narrow weights fit u128");
            run_grid_dp(
                inst,
                order_items,
                w.iter().map(to128).collect(),
                sizes,
                to128(&weight_scale),
                grid,
            )
        } else {
            run_grid_dp(inst, order_items, w, sizes, weight_scale, grid)
        }
    } else if narrow {
        let to128 = |x: &BigInt| x.to_u128().expect("narrow scale fits u128");
        run_bnb(
            inst,
            order_items,
            w.iter().map(to128).collect(),
            s.iter().map(to128).collect(),
            density_order,
            to128(&weight_scale),
            to128(&size_scale),
        )
    } else {
        run_bnb(
            inst,
            order_items,
            w,
            s,
            density_order,
            weight_scale,
            size_scale,
        )
    };

    let value_of = |items: &[ItemId]| {
        items
            .iter()
            .fold(Rational::zero(), |a, i| a + &weights[i.idx()])
    };
    let best = PricedConfig {
        value: value_of(&best_items),
        config: Configuration::new(best_items),
    };
    let mut pool: Vec<PricedConfig> = Vec::new();
    for items in &pool_items {
        let config = Configuration::new(items.clone());
        if config == best.config || pool.iter().any(|p| p.config == config) {
            continue;
        }
        pool.push(PricedConfig {
            value: value_of(items),
            config,
        });
        if pool.len() == POOL_LIMIT {
            break;
        }
    }
    PricingOutcome { best, pool }
}

fn run_bnb<T: PricingInt>(
    inst: &Instance,
    order: Vec<ItemId>,
    w: Vec<T>,
    s: Vec<T>,
    density_order: Vec<usize>,
    unit_w: T,
    cap: T,
) -> (Vec<ItemId>, Vec<Vec<ItemId>>) {
    let n = order.len();
    let mut suffix_s = vec![T::zero(); n + 1];
    for i in (0..n).rev() {
        suffix_s[i] = suffix_s[i + 1].add(&s[i]);
    }
    let mut next_distinct = vec![n; n];
    for i in (0..n).rev() {
        let same = i + 1 < n
            && w[i] == w[i + 1]
            && s[i] == s[i + 1]
            && inst.group_of(order[i]) == inst.group_of(order[i + 1]);
        next_distinct[i] = if same { next_distinct[i + 1] } else { i + 1 };
    }
    let mut state = Bnb {
        inst,
        order,
        w,
        s,
        suffix_s,
        density_order,
        next_distinct,
        group_counts: vec![0; inst.groups().len()],
        chosen: Vec::new(),
        best: Vec::new(),
        best_w: T::zero(),
        unit_w,
        pool: Vec::new(),
    };
    state.dfs(0, &cap, &T::zero());
    let Bnb { best, mut pool, .. } = state;
    pool.sort_by(|(wa, _), (wb, _)| wb.cmp(wa));
    (best, pool.into_iter().map(|(_, items)| items).collect())
}

/// Exact pricing by dynamic programming over a common integer size grid:
/// per group, the best subset for every (count <= cap, used size) pair; the
/// group profiles then convolve over the size axis.
fn run_grid_dp<T: PricingInt>(
    inst: &Instance,
    order: Vec<ItemId>,
    w: Vec<T>,
    sizes: Vec<u64>,
    unit_w: T,
    grid: u64,
) -> (Vec<ItemId>, Vec<Vec<ItemId>>) {
    let d = grid as usize;
    let mut by_group: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (idx, item) in order.iter().enumerate() {
        by_group.entry(inst.group_of(*item)).or_default().push(idx);
    }

    // dp[t]: best weight using at most t size units, nondecreasing in t
    let mut dp: Vec<Option<T>> = vec![None; d + 1];
    dp[0] = Some(T::zero());
    let mut group_profiles: Vec<(usize, Vec<Option<(T, Vec<ItemId>)>>)> = Vec::new();
    let mut layers: Vec<Vec<Option<T>>> = vec![dp.clone()];
    for (&g, members) in &by_group {
        let cap = inst.group(g).cap.min(members.len() as u64) as usize;
        // best[c][t]: heaviest subset of the group with c items and size exactly t
        let mut best: Vec<Vec<Option<(T, Vec<ItemId>)>>> =
            vec![vec![None; d + 1]; cap + 1];
        best[0][0] = Some((T::zero(), Vec::new()));
        for &idx in members {
            let item = order[idx];
            let sz = sizes[idx] as usize;
            if sz > d {
                continue;
            }
            for c in (0..cap).rev() {
                for t in (0..=d - sz).rev() {
                    let Some((bw, bitems)) = best[c][t].clone() else {
                        continue;
                    };
                    let cand = bw.add(&w[idx]);
                    let slot = &mut best[c + 1][t + sz];
                    let better = match slot {
                        None => true,
                        Some((old, _)) => cand > *old,
                    };
                    if better {
                        let mut items = bitems;
                        items.push(item);
                        *slot = Some((cand, items));
                    }
                }
            }
        }
        // collapse the count axis
        let mut profile: Vec<Option<(T, Vec<ItemId>)>> = vec![None; d + 1];
        for row in &best {
            for (t, cell) in row.iter().enumerate() {
                let Some((cw, citems)) = cell else { continue };
                let better = match &profile[t] {
                    None => true,
                    Some((old, _)) => cw > old,
                };
                if better {
                    profile[t] = Some((cw.clone(), citems.clone()));
                }
            }
        }
        // convolve into dp
        let mut next: Vec<Option<T>> = vec![None; d + 1];
        for (t1, cell) in dp.iter().enumerate() {
            let Some(base) = cell else { continue };
            for (t2, pcell) in profile.iter().enumerate().take(d + 1 - t1) {
                let Some((pw, _)) = pcell else { continue };
                let cand = base.add(pw);
                let slot = &mut next[t1 + t2];
                let better = match slot {
                    None => true,
                    Some(old) => cand > *old,
                };
                if better {
                    *slot = Some(cand);
                }
            }
        }
        dp = next;
        layers.push(dp.clone());
        group_profiles.push((g, profile));
    }

    // backtrack the heaviest end cell, then runner-up cells for the pool
    let reconstruct = |target: usize| -> Vec<ItemId> {
        let mut items: Vec<ItemId> = Vec::new();
        let mut t = target;
        for (layer_idx, (_, profile)) in group_profiles.iter().enumerate().rev() {
            let want = layers[layer_idx + 1][t].clone().expect("cell reachable");
            let mut found = false;
            for t2 in 0..=t {
                let Some((pw, pitems)) = &profile[t2] else { continue };
                let Some(prev) = &layers[layer_idx][t - t2] else {
                    continue;
                };
                if prev.add(pw) == want {
                    items.extend_from_slice(pitems);
                    t -= t2;
                    found = true;
                    break;
                }
            }
            debug_assert!(found, "dp backtracking lost its trail");
        }
        items
    };

    let mut cells: Vec<(T, usize)> = dp
        .iter()
        .enumerate()
        .filter_map(|(t, c)| c.clone().map(|w| (w, t)))
        .collect();
    cells.sort_by(|(wa, ta), (wb, tb)| wb.cmp(wa).then(ta.cmp(tb)));
    let best_items = match cells.first() {
        Some((_, t)) => reconstruct(*t),
        None => Vec::new(),
    };
    let mut pool = Vec::new();
    for (cw, t) in cells.iter().skip(1) {
        if *cw <= unit_w || pool.len() >= POOL_LIMIT {
            break;
        }
        pool.push(reconstruct(*t));
    }
    (best_items, pool)
}

const POOL_LIMIT: usize = 8;

impl<T: PricingInt> Bnb<'_, T> {
    fn record(&mut self, value: &T, items: Vec<ItemId>) {
        if *value > self.best_w {
            self.best_w = value.clone();
            self.best = items.clone();
        }
        if *value > self.unit_w && !self.pool.iter().any(|(_, p)| *p == items) {
            self.pool.push((value.clone(), items));
            if self.pool.len() > 4 * POOL_LIMIT {
                self.pool.sort_by(|(wa, _), (wb, _)| wb.cmp(wa));
                self.pool.truncate(POOL_LIMIT);
            }
        }
    }

    /// Everything left fits by size: the optimum takes the per-group heaviest
    /// items within the remaining cardinality headroom.
    fn take_tail(&mut self, from: usize, value: &T) {
        let mut by_group: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for idx in from..self.order.len() {
            by_group
                .entry(self.inst.group_of(self.order[idx]))
                .or_default()
                .push(idx);
        }
        let mut items = self.chosen.clone();
        let mut total = value.clone();
        for (g, idxs) in by_group {
            let headroom = (self.inst.group(g).cap - self.group_counts[g]) as usize;
            let mut sorted = idxs;
            sorted.sort_by(|&a, &b| self.w[b].cmp(&self.w[a]));
            for &idx in sorted.iter().take(headroom) {
                total.add_assign(&self.w[idx]);
                items.push(self.order[idx]);
            }
        }
        let total = total.clone();
        self.record(&total, items);
    }

    /// Fractional knapsack bound (rounded up at the split item): fills the
    /// remaining capacity by density over the undecided positions, skipping
    /// items of saturated groups.
    fn upper_bound(&self, from: usize, capacity: &T) -> T {
        let mut bound = T::zero();
        let mut cap = capacity.clone();
        let zero = T::zero();
        for &idx in &self.density_order {
            if idx < from {
                continue;
            }
            if cap <= zero {
                break;
            }
            let g = self.inst.group_of(self.order[idx]);
            if self.group_counts[g] >= self.inst.group(g).cap {
                continue;
            }
            if self.s[idx] <= cap {
                cap = cap.sub(&self.s[idx]);
                bound.add_assign(&self.w[idx]);
            } else {
                bound.add_assign(&cap.mul_div_ceil(&self.w[idx], &self.s[idx]));
                break;
            }
        }
        bound
    }

    fn dfs(&mut self, from: usize, capacity: &T, value: &T) {
        if *value > self.best_w || *value > self.unit_w {
            let value = value.clone();
            self.record(&value, self.chosen.clone());
        }
        if from == self.order.len() {
            return;
        }
        if self.suffix_s[from] <= *capacity {
            self.take_tail(from, value);
            return;
        }
        if value.add(&self.upper_bound(from, capacity)) <= self.best_w {
            return;
        }
        let item = self.order[from];
        let g = self.inst.group_of(item);
        if self.s[from] <= *capacity && self.group_counts[g] < self.inst.group(g).cap {
            self.group_counts[g] += 1;
            self.chosen.push(item);
            let cap2 = capacity.sub(&self.s[from]);
            let val2 = value.add(&self.w[from]);
            self.dfs(from + 1, &cap2, &val2);
            self.chosen.pop();
            self.group_counts[g] -= 1;
        }
        // skipping this item makes its equivalents (same group, weight and
        // size) interchangeable with it, so skip them as well
        self.dfs(self.next_distinct[from], capacity, value);
    }
}

/// Profit-scaling FPTAS. Profits are floored to multiples of
/// eps * wmax / n, then a group-nested DP tracks the minimum size reaching
/// each scaled profit with at most k(G) picks per group.
fn profit_scaling(
    inst: &Instance,
    weights: &[Rational],
    candidates: Vec<ItemId>,
    eps: &Rational,
) -> PricedConfig {
    use num_traits::One;
    assert!(eps.is_positive() && *eps < Rational::one());
    let n = candidates.len();
    let wmax = candidates
        .iter()
        .map(|i| &weights[i.idx()])
        .max()
        .cloned()
        .expect("nonempty candidates");
    let mu = eps * &wmax / Rational::from_integer(BigInt::from(n));
    let profit: Vec<usize> = candidates
        .iter()
        .map(|i| {
            (&weights[i.idx()] / &mu)
                .floor()
                .to_integer()
                .to_usize()
                .expect("scaled profit fits usize")
        })
        .collect();
    let total: usize = profit.iter().sum();

    // dp[p] = min size over processed groups reaching scaled profit p,
    // together with the chosen items for reconstruction
    let mut dp: Vec<Option<(Rational, Vec<ItemId>)>> = vec![None; total + 1];
    dp[0] = Some((Rational::zero(), Vec::new()));

    let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); inst.groups().len()];
    for (pos, item) in candidates.iter().enumerate() {
        by_group[inst.group_of(*item)].push(pos);
    }

    for (g, members) in by_group.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let cap = inst.group(g).cap as usize;
        // subsets of this group: min size per (count <= cap, profit)
        let gtotal: usize = members.iter().map(|&p| profit[p]).sum();
        let mut gdp: Vec<Vec<Option<(Rational, Vec<ItemId>)>>> =
            vec![vec![None; gtotal + 1]; cap + 1];
        gdp[0][0] = Some((Rational::zero(), Vec::new()));
        for &pos in members {
            let item = candidates[pos];
            let p = profit[pos];
            let s = inst.size(item).clone();
            for c in (0..cap).rev() {
                for q in (0..=gtotal.saturating_sub(p)).rev() {
                    let Some((size, picks)) = gdp[c][q].clone() else {
                        continue;
                    };
                    let cand_size = size + &s;
                    if cand_size > Rational::one() {
                        continue;
                    }
                    let slot = &mut gdp[c + 1][q + p];
                    let better = match slot {
                        None => true,
                        Some((old, _)) => cand_size < *old,
                    };
                    if better {
                        let mut picks2 = picks;
                        picks2.push(item);
                        *slot = Some((cand_size, picks2));
                    }
                }
            }
        }
        let mut group_best: Vec<Option<(Rational, Vec<ItemId>)>> = vec![None; gtotal + 1];
        for row in &gdp {
            for (q, cell) in row.iter().enumerate() {
                let Some((size, picks)) = cell else { continue };
                let better = match &group_best[q] {
                    None => true,
                    Some((old, _)) => size < old,
                };
                if better {
                    group_best[q] = Some((size.clone(), picks.clone()));
                }
            }
        }
        // convolve into the outer dp
        let mut next: Vec<Option<(Rational, Vec<ItemId>)>> = vec![None; total + 1];
        for (p0, cell) in dp.iter().enumerate() {
            let Some((size0, picks0)) = cell else { continue };
            for (q, gcell) in group_best.iter().enumerate() {
                let Some((gsize, gpicks)) = gcell else { continue };
                let p = p0 + q;
                let size = size0 + gsize;
                if size > Rational::one() {
                    continue;
                }
                let better = match &next[p] {
                    None => true,
                    Some((old, _)) => size < *old,
                };
                if better {
                    let mut picks = picks0.clone();
                    picks.extend_from_slice(gpicks);
                    next[p] = Some((size, picks));
                }
            }
        }
        dp = next;
    }

    let mut best: Vec<ItemId> = Vec::new();
    for cell in dp.iter().rev() {
        if let Some((_, picks)) = cell {
            best = picks.clone();
            break;
        }
    }
    let value = best
        .iter()
        .fold(Rational::zero(), |a, i| a + &weights[i.idx()]);
    PricedConfig {
        config: Configuration::new(best),
        value,
    }
}
