//! Greedy packer for all-small instances. Builds one bin at a time: a
//! bounding subset keeps over-full groups in check, a fill loop tops the bin
//! up, and a swap loop trades items for larger same-group ones. The bin count
//! never exceeds (1 + 2 delta) * max(s(I), V(I)) + 2.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::config::{validate_packing, Configuration, Packing};
use crate::instance::{GroupIdx, Instance, ItemId};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum GreedyError {
    #[error("delta {0} must lie in (0, 1/2)")]
    BadDelta(String),
    #[error("item {item} has size above delta")]
    ItemTooLarge { item: ItemId },
    #[error("greedy exceeded its bin bound: used {used}, bound {bound}")]
    BoundViolated { used: usize, bound: String },
}

#[derive(Debug, Clone)]
pub struct BoundingContext {
    pub delta: Rational,
    /// max((1 + 2 delta) s(I) + 2, V(I)).
    pub promise: Rational,
    pub bounding_groups: Vec<GroupIdx>,
}

fn group_count(inst: &Instance, alive: &[ItemId], g: GroupIdx) -> usize {
    alive.iter().filter(|&&i| inst.group_of(i) == g).count()
}

fn cardinality_bound_of(inst: &Instance, alive: &[ItemId]) -> u64 {
    inst.groups()
        .iter()
        .enumerate()
        .map(|(g, group)| (group_count(inst, alive, g) as u64).div_ceil(group.cap))
        .max()
        .unwrap_or(0)
}

/// Promise and bounding groups of the sub-instance given by `alive`.
pub fn bounding_context(inst: &Instance, alive: &[ItemId], delta: &Rational) -> BoundingContext {
    let total = inst.size_of(alive);
    let v = cardinality_bound_of(inst, alive);
    let two = Rational::from_integer(2.into());
    let size_promise = (Rational::one() + &two * delta) * total + &two;
    let promise = size_promise.max(Rational::from_integer(BigInt::from(v)));
    let bounding_groups = inst
        .groups()
        .iter()
        .enumerate()
        .filter(|(g, group)| {
            let n = group_count(inst, alive, *g) as u64;
            let pressure = Rational::from_integer(BigInt::from(n.div_ceil(group.cap)));
            pressure > &promise - Rational::one()
        })
        .map(|(g, _)| g)
        .collect();
    BoundingContext {
        delta: delta.clone(),
        promise,
        bounding_groups,
    }
}

/// Union over bounding groups of the fewest smallest items whose removal
/// brings the group's pressure under the cardinality bound.
pub fn bounding_subset(inst: &Instance, alive: &[ItemId], ctx: &BoundingContext) -> Vec<ItemId> {
    let v = cardinality_bound_of(inst, alive) as i128;
    let mut subset = Vec::new();
    for &g in &ctx.bounding_groups {
        let members: Vec<ItemId> = alive
            .iter()
            .copied()
            .filter(|&i| inst.group_of(i) == g)
            .collect();
        let n = members.len() as i128;
        let k = inst.group(g).cap as i128;
        // minimal i with ceil((n - i) / k) <= V - 1
        let psi = (n - (v - 1) * k).max(0) as usize;
        debug_assert!(psi >= 1 && psi <= inst.group(g).cap as usize);
        // smallest sizes = largest ids
        subset.extend_from_slice(&members[members.len() - psi..]);
    }
    subset.sort_unstable();
    subset
}

/// Packs an all-small instance; every size must be at most `delta`.
pub fn greedy(inst: &Instance, delta: &Rational) -> Result<Packing, GreedyError> {
    if !delta.is_positive() || *delta >= crate::rational::rat(1, 2) {
        return Err(GreedyError::BadDelta(crate::rational::format_rational(
            delta,
        )));
    }
    for item in inst.item_ids() {
        if inst.size(item) > delta {
            return Err(GreedyError::ItemTooLarge { item });
        }
    }
    let full_bound = bin_bound(&inst.total_size(), inst.cardinality_bound(), delta);

    let mut alive: Vec<ItemId> = inst.item_ids().collect();
    let mut bins: Vec<Configuration> = Vec::new();
    while !alive.is_empty() {
        let as_config = Configuration::new(alive.clone());
        if inst.is_configuration(&as_config) {
            bins.push(as_config);
            break;
        }
        let ctx = bounding_context(inst, &alive, delta);
        let mut bin: BTreeSet<ItemId> = bounding_subset(inst, &alive, &ctx).into_iter().collect();
        let mut counts = vec![0u64; inst.groups().len()];
        let mut size = Rational::zero();
        for &i in &bin {
            counts[inst.group_of(i)] += 1;
            size += inst.size(i);
        }
        let limit = Rational::one() - delta;

        // fill: add the smallest-id item whose group still has headroom
        while size <= limit {
            let next = alive
                .iter()
                .copied()
                .find(|&i| !bin.contains(&i) && counts[inst.group_of(i)] < inst.group(inst.group_of(i)).cap);
            let Some(item) = next else { break };
            bin.insert(item);
            counts[inst.group_of(item)] += 1;
            size += inst.size(item);
        }

        // swap: trade a bin item for a strictly larger same-group outsider
        while size <= limit {
            let mut swap: Option<(ItemId, ItemId)> = None;
            'outer: for &inside in &bin {
                for &outside in &alive {
                    if bin.contains(&outside) {
                        continue;
                    }
                    if inst.group_of(outside) == inst.group_of(inside)
                        && inst.size(outside) > inst.size(inside)
                    {
                        swap = Some((inside, outside));
                        break 'outer;
                    }
                }
            }
            let Some((inside, outside)) = swap else { break };
            bin.remove(&inside);
            bin.insert(outside);
            size = size - inst.size(inside) + inst.size(outside);
        }

        if bin.is_empty() {
            // unreachable per the fill loop; defensively emit a singleton
            debug_assert!(false, "greedy made no progress");
            bin.insert(alive[0]);
        }
        let bin_config = Configuration::new(bin.iter().copied().collect());
        debug_assert!(inst.is_configuration(&bin_config));
        alive.retain(|i| !bin.contains(i));
        bins.push(bin_config);
    }

    let packing = Packing { bins };
    debug_assert!(validate_packing(inst, &packing, true).is_ok());
    if Rational::from_integer(BigInt::from(packing.bins.len())) > full_bound {
        return Err(GreedyError::BoundViolated {
            used: packing.bins.len(),
            bound: crate::rational::format_rational(&full_bound),
        });
    }
    Ok(packing)
}

/// (1 + 2 delta) * max(s(I), V(I)) + 2.
pub fn bin_bound(total_size: &Rational, cardinality: u64, delta: &Rational) -> Rational {
    let two = Rational::from_integer(2.into());
    let base = total_size
        .clone()
        .max(Rational::from_integer(BigInt::from(cardinality)));
    (Rational::one() + &two * delta) * base + two
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawGroup, RawInstance, RawItem};
    use crate::rational::{int, rat};

    fn inst(items: Vec<(&str, i64)>, groups: Vec<(i64, i64)>) -> Instance {
        let raw = RawInstance {
            items: items
                .iter()
                .enumerate()
                .map(|(i, (s, g))| RawItem {
                    id: i as i64 + 1,
                    size: s.to_string(),
                    group: *g,
                })
                .collect(),
            groups: groups
                .into_iter()
                .map(|(id, k)| RawGroup { id, k })
                .collect(),
        };
        Instance::validate(&raw).unwrap().instance
    }

    #[test]
    fn configuration_base_case() {
        // six 1/10 items in singleton groups: everything fits one bin
        let items = (0..6).map(|i| ("1/10", i + 1)).collect();
        let groups = (1..=6).map(|g| (g, 1)).collect();
        let i = inst(items, groups);
        let p = greedy(&i, &rat(1, 10)).unwrap();
        assert_eq!(p.bins.len(), 1);
        assert_eq!(p.bins[0].len(), 6);
    }

    #[test]
    fn twenty_tenths_fill_two_bins() {
        let items = (0..20).map(|_| ("1/10", 1)).collect();
        let i = inst(items, vec![(1, 20)]);
        let p = greedy(&i, &rat(1, 10)).unwrap();
        validate_packing(&i, &p, true).unwrap();
        // bound is 1.2 * max(2, 1) + 2 = 4.4; the fill loop actually does it in 2
        assert!(p.bins.len() <= 4);
        assert_eq!(p.bins.len(), 2);
    }

    #[test]
    fn cardinality_pressure_drives_bins() {
        // 5 items, cap 1: five bins forced; V = 5
        let items = (0..5).map(|_| ("1/100", 1)).collect();
        let i = inst(items, vec![(1, 1)]);
        let p = greedy(&i, &rat(1, 10)).unwrap();
        assert_eq!(p.bins.len(), 5);
    }

    #[test]
    fn empty_instance_packs_to_nothing() {
        let i = inst(vec![], vec![]);
        let p = greedy(&i, &rat(1, 10)).unwrap();
        assert!(p.bins.is_empty());
    }

    #[test]
    fn rejects_large_items_and_bad_delta() {
        let i = inst(vec![("1/2", 1)], vec![(1, 1)]);
        assert!(matches!(
            greedy(&i, &rat(1, 10)),
            Err(GreedyError::ItemTooLarge { .. })
        ));
        let j = inst(vec![("1/10", 1)], vec![(1, 1)]);
        assert!(matches!(greedy(&j, &rat(1, 2)), Err(GreedyError::BadDelta(_))));
        assert!(matches!(greedy(&j, &int(0)), Err(GreedyError::BadDelta(_))));
    }

    #[test]
    fn bounding_subset_takes_smallest_items() {
        // one group, 4 items, cap 1, V = 4; sizes descending
        let i = inst(
            vec![("4/100", 1), ("3/100", 1), ("2/100", 1), ("1/100", 1)],
            vec![(1, 1)],
        );
        let alive: Vec<ItemId> = i.item_ids().collect();
        let ctx = bounding_context(&i, &alive, &rat(1, 10));
        // V = 4 > promise - 1 iff the group is bounding; promise = max(2.12, 4) = 4
        assert_eq!(ctx.bounding_groups.len(), 1);
        let s = bounding_subset(&i, &alive, &ctx);
        // psi = 4 - 3 * 1 = 1: take the single smallest item
        assert_eq!(s, vec![ItemId(4)]);
    }

    #[test]
    fn respects_the_bound_on_mixed_instances() {
        let items = vec![
            ("1/10", 1),
            ("1/10", 1),
            ("1/12", 2),
            ("1/12", 2),
            ("1/12", 2),
            ("1/15", 3),
            ("1/15", 3),
            ("1/20", 3),
        ];
        let i = inst(items, vec![(1, 1), (2, 2), (3, 1)]);
        let p = greedy(&i, &rat(1, 10)).unwrap();
        validate_packing(&i, &p, true).unwrap();
        let bound = bin_bound(&i.total_size(), i.cardinality_bound(), &rat(1, 10));
        assert!(Rational::from_integer(BigInt::from(p.bins.len())) <= bound);
    }
}
