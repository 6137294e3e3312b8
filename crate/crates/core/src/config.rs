//! Configurations (feasible single-bin contents) and packings.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::instance::{Instance, ItemId};
use crate::rational::Rational;

/// A canonical (sorted, duplicate-free) set of item ids. Every bin, LP column
/// and prototype slot set is one of these.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration(Vec<ItemId>);

impl Configuration {
    pub fn empty() -> Configuration {
        Configuration(Vec::new())
    }

    pub fn new(mut items: Vec<ItemId>) -> Configuration {
        items.sort_unstable();
        items.dedup();
        Configuration(items)
    }

    pub fn singleton(item: ItemId) -> Configuration {
        Configuration(vec![item])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn without(&self, item: ItemId) -> Configuration {
        Configuration(self.0.iter().copied().filter(|&i| i != item).collect())
    }

    pub fn union(&self, other: &Configuration) -> Configuration {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Configuration::new(v)
    }

    pub fn size(&self, inst: &Instance) -> Rational {
        self.0
            .iter()
            .fold(Rational::zero(), |a, &i| a + inst.size(i))
    }

    pub fn group_count(&self, inst: &Instance, group: usize) -> usize {
        self.0.iter().filter(|&&i| inst.group_of(i) == group).count()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<ItemId> for Configuration {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        Configuration::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ItemSetError {
    #[error("unknown item id {0}")]
    UnknownItem(ItemId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PackingViolation {
    #[error("bin {bin} is not a configuration")]
    NotAConfiguration { bin: usize },
    #[error("item {item} appears in bins {first} and {second}")]
    Overlap { item: ItemId, first: usize, second: usize },
    #[error("item {item} is not covered by any bin")]
    Uncovered { item: ItemId },
    #[error("bin {bin} references unknown item {item}")]
    UnknownItem { bin: usize, item: ItemId },
}

/// An ordered list of bins. "Complete" packings additionally cover every item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Packing {
    pub bins: Vec<Configuration>,
}

impl Packing {
    pub fn empty() -> Packing {
        Packing { bins: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn covered_items(&self) -> Vec<ItemId> {
        let mut v: Vec<ItemId> = self.bins.iter().flat_map(|b| b.iter()).collect();
        v.sort_unstable();
        v
    }
}

impl Instance {
    /// True iff the set's total size is at most 1 and no group cap is exceeded.
    pub fn is_configuration(&self, set: &Configuration) -> bool {
        let mut total = Rational::zero();
        let mut counts = vec![0u64; self.groups().len()];
        for item in set.iter() {
            debug_assert!(self.contains_item(item));
            total += self.size(item);
            if total > Rational::one() {
                return false;
            }
            let g = self.group_of(item);
            counts[g] += 1;
            if counts[g] > self.group(g).cap {
                return false;
            }
        }
        true
    }

    /// [`Instance::is_configuration`] with item-id validation for untrusted input.
    pub fn check_configuration(&self, items: &[ItemId]) -> Result<bool, ItemSetError> {
        for &i in items {
            if !self.contains_item(i) {
                return Err(ItemSetError::UnknownItem(i));
            }
        }
        Ok(self.is_configuration(&Configuration::new(items.to_vec())))
    }

    /// Items that may ride along with slot set `config`: size at most
    /// min(eps^2, eps * (1 - s(config))).
    pub fn fit_config(&self, config: &Configuration, eps: &Rational) -> Vec<ItemId> {
        let residual = Rational::one() - config.size(self);
        let threshold = (eps * eps).min(eps * residual);
        self.item_ids()
            .filter(|&i| *self.size(i) <= threshold)
            .collect()
    }
}

/// Checks that every bin is a configuration and bins are pairwise disjoint;
/// with `require_complete`, also that every item is covered.
pub fn validate_packing(
    inst: &Instance,
    packing: &Packing,
    require_complete: bool,
) -> Result<(), PackingViolation> {
    let mut owner: Vec<Option<usize>> = vec![None; inst.n()];
    for (b, bin) in packing.bins.iter().enumerate() {
        for item in bin.iter() {
            if !inst.contains_item(item) {
                return Err(PackingViolation::UnknownItem { bin: b, item });
            }
            if let Some(first) = owner[item.idx()] {
                return Err(PackingViolation::Overlap {
                    item,
                    first,
                    second: b,
                });
            }
            owner[item.idx()] = Some(b);
        }
        if !inst.is_configuration(bin) {
            return Err(PackingViolation::NotAConfiguration { bin: b });
        }
    }
    if require_complete {
        for item in inst.item_ids() {
            if owner[item.idx()].is_none() {
                return Err(PackingViolation::Uncovered { item });
            }
        }
    }
    Ok(())
}

/// All configurations of a small instance, in canonical order. Exponential;
/// intended for oracles and tests.
pub fn enumerate_configurations(inst: &Instance) -> Vec<Configuration> {
    let mut out = Vec::new();
    let mut current: Vec<ItemId> = Vec::new();
    let mut counts = vec![0u64; inst.groups().len()];
    fn dfs(
        inst: &Instance,
        next: usize,
        size: &Rational,
        current: &mut Vec<ItemId>,
        counts: &mut Vec<u64>,
        out: &mut Vec<Configuration>,
    ) {
        out.push(Configuration::new(current.clone()));
        for idx in next..inst.n() {
            let item = ItemId::from_idx(idx);
            let g = inst.group_of(item);
            if counts[g] >= inst.group(g).cap {
                continue;
            }
            let new_size = size + inst.size(item);
            if new_size > Rational::one() {
                continue;
            }
            counts[g] += 1;
            current.push(item);
            dfs(inst, idx + 1, &new_size, current, counts, out);
            current.pop();
            counts[g] -= 1;
        }
    }
    dfs(
        inst,
        0,
        &Rational::zero(),
        &mut current,
        &mut counts,
        &mut out,
    );
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawGroup, RawInstance, RawItem};
    use crate::rational::rat;

    pub(crate) fn inst(items: Vec<(&str, i64)>, groups: Vec<(i64, i64)>) -> Instance {
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
    fn empty_set_is_a_configuration() {
        let i = inst(vec![("1/2", 1)], vec![(1, 1)]);
        assert!(i.is_configuration(&Configuration::empty()));
    }

    #[test]
    fn size_and_cardinality_violations() {
        let i = inst(vec![("3/5", 1), ("3/5", 2)], vec![(1, 1), (2, 1)]);
        assert!(!i.is_configuration(&Configuration::new(vec![ItemId(1), ItemId(2)])));

        let i = inst(vec![("1/4", 1), ("1/4", 1)], vec![(1, 1)]);
        assert!(!i.is_configuration(&Configuration::new(vec![ItemId(1), ItemId(2)])));
        assert!(i.is_configuration(&Configuration::singleton(ItemId(1))));
    }

    #[test]
    fn check_configuration_rejects_unknown_ids() {
        let i = inst(vec![("1/2", 1)], vec![(1, 1)]);
        assert_eq!(
            i.check_configuration(&[ItemId(7)]),
            Err(ItemSetError::UnknownItem(ItemId(7)))
        );
    }

    #[test]
    fn fit_config_examples() {
        // s(C)=1 leaves no residual capacity
        let i = inst(vec![("1", 1), ("1/200", 1)], vec![(1, 5)]);
        let full = Configuration::singleton(ItemId(1));
        assert!(i.fit_config(&full, &rat(1, 11)).is_empty());

        // empty configuration admits everything of size <= eps^2
        let i = inst(
            vec![("1/2", 1), ("1/121", 1), ("1/200", 1)],
            vec![(1, 5)],
        );
        assert_eq!(
            i.fit_config(&Configuration::empty(), &rat(1, 11)),
            vec![ItemId(2), ItemId(3)]
        );

        // s(C)=9/10, eps=1/11: threshold is min(1/121, 1/110) = 1/121
        let i = inst(
            vec![("9/10", 1), ("1/121", 2), ("1/115", 2)],
            vec![(1, 1), (2, 5)],
        );
        let c = Configuration::singleton(ItemId(1));
        assert_eq!(i.fit_config(&c, &rat(1, 11)), vec![ItemId(3)]);
        assert_eq!(*i.size(ItemId(3)), rat(1, 121));
    }

    #[test]
    fn packing_validation() {
        let i = inst(vec![("1/2", 1), ("1/2", 1)], vec![(1, 1)]);
        let ok = Packing {
            bins: vec![
                Configuration::singleton(ItemId(1)),
                Configuration::singleton(ItemId(2)),
            ],
        };
        validate_packing(&i, &ok, true).unwrap();

        let overlap = Packing {
            bins: vec![
                Configuration::singleton(ItemId(1)),
                Configuration::singleton(ItemId(1)),
            ],
        };
        assert!(matches!(
            validate_packing(&i, &overlap, false),
            Err(PackingViolation::Overlap { .. })
        ));

        let incomplete = Packing {
            bins: vec![Configuration::singleton(ItemId(1))],
        };
        validate_packing(&i, &incomplete, false).unwrap();
        assert!(matches!(
            validate_packing(&i, &incomplete, true),
            Err(PackingViolation::Uncovered { .. })
        ));
    }

    #[test]
    fn enumerates_all_configurations() {
        // sizes 2/5,2/5,2/5 one group cap 2: empty + 3 singletons + 3 pairs
        let i = inst(vec![("2/5", 1), ("2/5", 1), ("2/5", 1)], vec![(1, 2)]);
        let all = enumerate_configurations(&i);
        assert_eq!(all.len(), 7);
        assert!(all.contains(&Configuration::empty()));
    }
}
