//! Instance model: items with exact sizes in (0,1], a partition into groups,
//! and per-group cardinality caps.
//!
//! Items are canonicalized on construction: sorted non-increasing by size with
//! ties broken by input order, then numbered 1..n. Item id 1 is always a
//! largest item, so ascending ids mean non-increasing sizes everywhere below.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

/// 1-based item identifier; ordering follows the canonical size order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_idx(idx: usize) -> ItemId {
        ItemId(idx as u32 + 1)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index into [`Instance::groups`].
pub type GroupIdx = usize;

#[derive(Debug, Clone)]
pub struct Group {
    /// Identifier from the input description (kept for reporting).
    pub external_id: i64,
    pub cap: u64,
    /// Members in ascending item id order.
    pub members: Vec<ItemId>,
}

/// Raw, unvalidated instance description mirroring the JSON wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawItem {
    pub id: i64,
    pub size: String,
    pub group: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawGroup {
    pub id: i64,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawInstance {
    pub items: Vec<RawItem>,
    pub groups: Vec<RawGroup>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("item {id}: size `{size}` is not a valid rational: {reason}")]
    BadSize { id: i64, size: String, reason: String },
    #[error("item {id}: size out of (0,1]")]
    SizeOutOfRange { id: i64 },
    #[error("item {id}: unknown group {group}")]
    UnknownGroup { id: i64, group: i64 },
    #[error("item {id}: listed more than once, not a partition")]
    NotAPartition { id: i64 },
    #[error("duplicate item id {id}")]
    DuplicateItemId { id: i64 },
    #[error("duplicate group id {id}")]
    DuplicateGroupId { id: i64 },
    #[error("group {id}: cardinality cap {k} < 1")]
    CapTooSmall { id: i64, k: i64 },
}

/// A validated, canonicalized instance.
#[derive(Debug, Clone)]
pub struct Instance {
    sizes: Vec<Rational>,
    group_of: Vec<GroupIdx>,
    groups: Vec<Group>,
}

/// Result of [`Instance::validate`]: the canonical instance plus the original
/// item id for each canonical id (index 0 holds the original id of item 1).
#[derive(Debug, Clone)]
pub struct ValidatedInstance {
    pub instance: Instance,
    pub original_item_ids: Vec<i64>,
}

impl Instance {
    /// Validates a raw description, reporting every violation found.
    pub fn validate(raw: &RawInstance) -> Result<ValidatedInstance, Vec<InstanceError>> {
        let mut errors = Vec::new();
        let mut group_index: BTreeMap<i64, usize> = BTreeMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for g in &raw.groups {
            if group_index.contains_key(&g.id) {
                errors.push(InstanceError::DuplicateGroupId { id: g.id });
                continue;
            }
            if g.k < 1 {
                errors.push(InstanceError::CapTooSmall { id: g.id, k: g.k });
            }
            group_index.insert(g.id, groups.len());
            groups.push(Group {
                external_id: g.id,
                cap: g.k.max(1) as u64,
                members: Vec::new(),
            });
        }

        let mut seen: BTreeMap<i64, i64> = BTreeMap::new();
        let mut items: Vec<(Rational, GroupIdx, i64)> = Vec::new();
        for item in &raw.items {
            match seen.get(&item.id) {
                Some(prev_group) if *prev_group != item.group => {
                    errors.push(InstanceError::NotAPartition { id: item.id });
                    continue;
                }
                Some(_) => {
                    errors.push(InstanceError::DuplicateItemId { id: item.id });
                    continue;
                }
                None => {
                    seen.insert(item.id, item.group);
                }
            }
            let size = match rational::parse_rational(&item.size) {
                Ok(s) => s,
                Err(e) => {
                    errors.push(InstanceError::BadSize {
                        id: item.id,
                        size: item.size.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            if !size.is_positive() || size > Rational::one() {
                errors.push(InstanceError::SizeOutOfRange { id: item.id });
                continue;
            }
            match group_index.get(&item.group) {
                Some(&gi) => items.push((size, gi, item.id)),
                None => errors.push(InstanceError::UnknownGroup {
                    id: item.id,
                    group: item.group,
                }),
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }

        // stable sort: equal sizes keep input order, which fixes all tie-breaks
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by(|&a, &b| items[b].0.cmp(&items[a].0).then(a.cmp(&b)));

        let mut sizes = Vec::with_capacity(items.len());
        let mut group_of = Vec::with_capacity(items.len());
        let mut original_item_ids = Vec::with_capacity(items.len());
        for (new_idx, &old) in order.iter().enumerate() {
            let (size, gi, orig) = &items[old];
            sizes.push(size.clone());
            group_of.push(*gi);
            original_item_ids.push(*orig);
            groups[*gi].members.push(ItemId::from_idx(new_idx));
        }

        Ok(ValidatedInstance {
            instance: Instance {
                sizes,
                group_of,
                groups,
            },
            original_item_ids,
        })
    }

    /// Builds an instance from `(size, group key)` pairs, canonicalizing order.
    /// Returns the instance and, per canonical item, the input position.
    pub fn from_items(
        items: Vec<(Rational, i64)>,
        caps: &BTreeMap<i64, u64>,
    ) -> (Instance, Vec<usize>) {
        let mut group_index: BTreeMap<i64, usize> = BTreeMap::new();
        let mut groups = Vec::new();
        for (&gid, &cap) in caps {
            assert!(cap >= 1, "group cap must be at least 1");
            group_index.insert(gid, groups.len());
            groups.push(Group {
                external_id: gid,
                cap,
                members: Vec::new(),
            });
        }
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by(|&a, &b| items[b].0.cmp(&items[a].0).then(a.cmp(&b)));
        let mut sizes = Vec::with_capacity(items.len());
        let mut group_of = Vec::with_capacity(items.len());
        let mut positions = Vec::with_capacity(items.len());
        for (new_idx, &old) in order.iter().enumerate() {
            let (size, gid) = &items[old];
            assert!(size.is_positive() && *size <= Rational::one());
            let gi = *group_index.get(gid).expect("item references missing group");
            sizes.push(size.clone());
            group_of.push(gi);
            positions.push(old);
            groups[gi].members.push(ItemId::from_idx(new_idx));
        }
        (
            Instance {
                sizes,
                group_of,
                groups,
            },
            positions,
        )
    }

    /// Rebuilds an instance with identical items but a new group structure.
    /// Item order (hence ids) is preserved; callers pass one group index per item.
    pub fn with_regrouped_items(&self, group_of: Vec<GroupIdx>, mut groups: Vec<Group>) -> Instance {
        assert_eq!(group_of.len(), self.n());
        for g in &mut groups {
            g.members.clear();
        }
        for idx in 0..self.n() {
            groups[group_of[idx]].members.push(ItemId::from_idx(idx));
        }
        Instance {
            sizes: self.sizes.clone(),
            group_of,
            groups,
        }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = ItemId> {
        (0..self.n()).map(ItemId::from_idx)
    }

    pub fn contains_item(&self, item: ItemId) -> bool {
        item.0 >= 1 && item.idx() < self.n()
    }

    pub fn size(&self, item: ItemId) -> &Rational {
        &self.sizes[item.idx()]
    }

    pub fn group_of(&self, item: ItemId) -> GroupIdx {
        self.group_of[item.idx()]
    }

    pub fn group(&self, idx: GroupIdx) -> &Group {
        &self.groups[idx]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn total_size(&self) -> Rational {
        self.sizes.iter().fold(Rational::zero(), |a, s| a + s)
    }

    pub fn size_of(&self, items: &[ItemId]) -> Rational {
        items
            .iter()
            .fold(Rational::zero(), |a, &i| a + self.size(i))
    }

    /// Cardinality bound `V`: max over groups of ceil(|G| / k(G)); 0 when empty.
    pub fn cardinality_bound(&self) -> u64 {
        self.groups
            .iter()
            .map(|g| (g.members.len() as u64).div_ceil(g.cap))
            .max()
            .unwrap_or(0)
    }

    /// Items that can stand in for slot `item`: same group, size at most `s(item)`.
    pub fn fit_slot(&self, item: ItemId) -> Vec<ItemId> {
        let s = self.size(item);
        self.groups[self.group_of(item)]
            .members
            .iter()
            .copied()
            .filter(|&j| self.size(j) <= s)
            .collect()
    }

    /// Large items: size at least eps^2.
    pub fn is_large(&self, item: ItemId, eps: &Rational) -> bool {
        *self.size(item) >= eps * eps
    }

    pub fn large_items(&self, eps: &Rational) -> Vec<ItemId> {
        let threshold = eps * eps;
        self.item_ids()
            .filter(|&i| *self.size(i) >= threshold)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn raw(items: Vec<(i64, &str, i64)>, groups: Vec<(i64, i64)>) -> RawInstance {
        RawInstance {
            items: items
                .into_iter()
                .map(|(id, size, group)| RawItem {
                    id,
                    size: size.to_string(),
                    group,
                })
                .collect(),
            groups: groups
                .into_iter()
                .map(|(id, k)| RawGroup { id, k })
                .collect(),
        }
    }

    #[test]
    fn validates_and_sorts() {
        let v = Instance::validate(&raw(
            vec![(10, "1/3", 1), (20, "1/2", 1), (30, "1/2", 1)],
            vec![(1, 2)],
        ))
        .unwrap();
        let inst = &v.instance;
        assert_eq!(inst.n(), 3);
        // sorted non-increasing, ties by input order
        assert_eq!(inst.size(ItemId(1)), &rat(1, 2));
        assert_eq!(inst.size(ItemId(2)), &rat(1, 2));
        assert_eq!(inst.size(ItemId(3)), &rat(1, 3));
        assert_eq!(v.original_item_ids, vec![20, 30, 10]);
    }

    #[test]
    fn rejects_size_out_of_range() {
        let err = Instance::validate(&raw(vec![(1, "3/2", 1)], vec![(1, 1)])).unwrap_err();
        assert!(matches!(err[0], InstanceError::SizeOutOfRange { id: 1 }));
        let err = Instance::validate(&raw(vec![(1, "0", 1)], vec![(1, 1)])).unwrap_err();
        assert!(matches!(err[0], InstanceError::SizeOutOfRange { id: 1 }));
    }

    #[test]
    fn rejects_double_membership() {
        let err = Instance::validate(&raw(
            vec![(1, "1/2", 1), (1, "1/2", 2)],
            vec![(1, 1), (2, 1)],
        ))
        .unwrap_err();
        assert!(matches!(err[0], InstanceError::NotAPartition { id: 1 }));
    }

    #[test]
    fn collects_all_violations() {
        let err = Instance::validate(&raw(
            vec![(1, "2", 1), (2, "1/2", 9)],
            vec![(1, 0)],
        ))
        .unwrap_err();
        assert_eq!(err.len(), 3);
    }

    #[test]
    fn cardinality_bound_examples() {
        let v = Instance::validate(&raw(
            vec![
                (1, "1/10", 1),
                (2, "1/10", 1),
                (3, "1/10", 1),
                (4, "1/10", 1),
                (5, "1/10", 1),
            ],
            vec![(1, 2)],
        ))
        .unwrap();
        assert_eq!(v.instance.cardinality_bound(), 3);

        let v = Instance::validate(&raw(
            vec![
                (1, "1/10", 1),
                (2, "1/10", 1),
                (3, "1/10", 1),
                (4, "1/10", 1),
                (5, "1/10", 2),
                (6, "1/10", 2),
                (7, "1/10", 2),
                (8, "1/10", 2),
                (9, "1/10", 2),
                (10, "1/10", 2),
                (11, "1/10", 2),
            ],
            vec![(1, 4), (2, 3)],
        ))
        .unwrap();
        assert_eq!(v.instance.cardinality_bound(), 3);

        let v = Instance::validate(&raw(vec![(1, "1", 1)], vec![(1, 1)])).unwrap();
        assert_eq!(v.instance.cardinality_bound(), 1);

        let v = Instance::validate(&raw(vec![], vec![])).unwrap();
        assert_eq!(v.instance.cardinality_bound(), 0);
    }

    #[test]
    fn fit_slot_follows_group_and_size() {
        let v = Instance::validate(&raw(
            vec![(1, "1/2", 1), (2, "1/3", 1), (3, "1/4", 1), (4, "1/3", 2)],
            vec![(1, 3), (2, 1)],
        ))
        .unwrap();
        let inst = &v.instance;
        // id 2 is the 1/3 item of group 1
        assert_eq!(inst.fit_slot(ItemId(2)), vec![ItemId(2), ItemId(4)]);
        assert_eq!(
            inst.fit_slot(ItemId(1)),
            vec![ItemId(1), ItemId(2), ItemId(4)]
        );
        // largest item of its group fits the whole group
        let all_group1: Vec<_> = inst.group(inst.group_of(ItemId(1))).members.clone();
        assert_eq!(inst.fit_slot(ItemId(1)), all_group1);
    }
}
