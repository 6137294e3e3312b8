//! Partitioning a good prototype into an organized partial packing: the
//! prototype is integralized, a near-integral vertex of its assignment
//! polytope is extracted, items matched onto slot copies, and the result is
//! grouped into categories with templates, bin families and completions.
//!
//! Copy multiplicities can be astronomically large at admissible eps (the
//! shift padding terms), so empty bins are never materialized; every category
//! tracks them as a count that enters all budget checks.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::config::Configuration;
use crate::constants::ConstantSet;
use crate::instance::{Instance, ItemId};
use crate::matching::maximum_bipartite_matching;
use crate::polytope::{build_polytope, fractional_budget, fractional_items, PolytopeError, TypeKey};
use crate::prototype::Prototype;
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct Category {
    /// Template configuration every bin of the category is allowed in.
    pub template: Configuration,
    /// Materialized (nonempty) bins.
    pub bins: Vec<Configuration>,
    /// Additional empty bins carried only as a count.
    pub empty_bins: BigUint,
    /// Unpacked items completing the category.
    pub completion: Vec<ItemId>,
}

impl Category {
    /// |B_C| including empty bins.
    pub fn bin_count(&self) -> BigUint {
        BigUint::from(self.bins.len()) + &self.empty_bins
    }
}

#[derive(Debug, Clone)]
pub struct NicePartition {
    pub categories: Vec<Category>,
}

impl NicePartition {
    /// Total number of bins, empty ones included.
    pub fn size(&self) -> BigUint {
        self.categories
            .iter()
            .fold(BigUint::zero(), |a, c| a + c.bin_count())
    }

    pub fn materialized_bins(&self) -> usize {
        self.categories.iter().map(|c| c.bins.len()).sum()
    }

    pub fn packed_items(&self) -> Vec<ItemId> {
        let mut v: Vec<ItemId> = self
            .categories
            .iter()
            .flat_map(|c| c.bins.iter().flat_map(|b| b.iter()))
            .collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("input is not a good prototype: {0}")]
    NotGood(String),
    #[error("assignment polytope failed: {0}")]
    Polytope(#[from] PolytopeError),
    #[error("vertex has {count} fractional items, above the budget {budget}")]
    TooFractional { count: usize, budget: BigUint },
    #[error("matching covered {matched} of {want} slot-assigned items")]
    MatchingDeficient { matched: usize, want: usize },
    #[error("partition violates its contract: {0}")]
    Contract(String),
}

/// Entrywise ceiling; the support is unchanged and the norm grows by at most
/// the support size.
pub fn integralize(proto: &Prototype) -> Prototype {
    let result = Prototype::from_entries(
        proto
            .iter()
            .map(|(c, v)| (c.clone(), v.ceil())),
    );
    debug_assert_eq!(result.support_size(), proto.support_size());
    debug_assert!(
        result.norm() <= proto.norm() + Rational::from_integer(proto.support_size().into())
    );
    result
}

#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub partition: NicePartition,
    pub fractional_count: usize,
    pub matched_items: usize,
}

pub fn partition(
    inst: &Instance,
    z: &Prototype,
    consts: &ConstantSet,
) -> Result<PartitionOutcome, PartitionError> {
    if inst.is_empty() {
        return Ok(PartitionOutcome {
            partition: NicePartition {
                categories: Vec::new(),
            },
            fractional_count: 0,
            matched_items: 0,
        });
    }
    if !consts.support_cap().admits(z.support_size()) {
        return Err(PartitionError::NotGood(format!(
            "support size {} exceeds {}",
            z.support_size(),
            consts.support_cap()
        )));
    }
    for config in z.support() {
        if !consts.config_size_cap.admits(config.len()) {
            return Err(PartitionError::NotGood(format!(
                "configuration {config} exceeds the size budget"
            )));
        }
    }

    let zstar = integralize(z);
    let eps = consts.eps();
    let spec = build_polytope(inst, &zstar, eps);
    let vertex = spec.vertex_with_tight_cover()?;

    let fractional = fractional_items(&vertex);
    let budget = fractional_budget(zstar.support_size(), zstar.max_config_len());
    if BigUint::from(fractional.len()) > budget {
        return Err(PartitionError::TooFractional {
            count: fractional.len(),
            budget,
        });
    }

    // split items into slot-assigned, configuration-assigned, and fractional
    let support: Vec<(&Configuration, BigUint)> = zstar
        .iter()
        .map(|(c, v)| {
            debug_assert!(v.is_integer());
            (c, v.to_integer().to_biguint().expect("positive multiplicity"))
        })
        .collect();
    let mut slot_of: BTreeMap<ItemId, ItemId> = BTreeMap::new();
    let mut completion_of: BTreeMap<ItemId, Configuration> = BTreeMap::new();
    for ((item, key), value) in vertex.iter() {
        if !value.is_one() {
            continue;
        }
        match key {
            TypeKey::Slot(slot) => {
                slot_of.insert(*item, *slot);
            }
            TypeKey::Conf(c) => {
                completion_of.insert(*item, c.clone());
            }
        }
    }
    let assigned = slot_of.len() + completion_of.len() + fractional.len();
    if assigned != inst.n() {
        return Err(PartitionError::Contract(format!(
            "{assigned} of {} items classified by the vertex",
            inst.n()
        )));
    }

    // the assignment graph: one right vertex per (configuration, slot, copy);
    // copies are capped at the slot's demand since no matching uses more
    let left: Vec<ItemId> = slot_of.keys().copied().collect();
    let mut demand: BTreeMap<ItemId, usize> = BTreeMap::new();
    for slot in slot_of.values() {
        *demand.entry(*slot).or_insert(0) += 1;
    }
    let mut rights: Vec<(usize, ItemId, usize)> = Vec::new(); // (support idx, slot, copy)
    let mut right_index: BTreeMap<(usize, ItemId), Vec<usize>> = BTreeMap::new();
    for (cidx, (config, mult)) in support.iter().enumerate() {
        for slot in config.iter() {
            let Some(&wanted) = demand.get(&slot) else {
                continue;
            };
            let copies = mult.to_usize().map_or(wanted, |m| m.min(wanted));
            for k in 0..copies {
                right_index
                    .entry((cidx, slot))
                    .or_default()
                    .push(rights.len());
                rights.push((cidx, slot, k));
            }
        }
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|item| {
            let slot = slot_of[item];
            support
                .iter()
                .enumerate()
                .filter(|(_, (c, _))| c.contains(slot))
                .flat_map(|(cidx, _)| right_index[&(cidx, slot)].iter().copied())
                .collect()
        })
        .collect();
    let matching = maximum_bipartite_matching(rights.len(), &adj);
    let matched = matching.iter().filter(|m| m.is_some()).count();
    if matched != left.len() {
        return Err(PartitionError::MatchingDeficient {
            matched,
            want: left.len(),
        });
    }

    // bins per support configuration and copy
    let mut bins_by_copy: BTreeMap<(usize, usize), Vec<ItemId>> = BTreeMap::new();
    for (l, item) in left.iter().enumerate() {
        let r = matching[l].expect("full matching");
        let (cidx, _, copy) = rights[r];
        bins_by_copy.entry((cidx, copy)).or_default().push(*item);
    }

    let mut categories: Vec<Category> = Vec::new();
    let mut category_of: BTreeMap<Configuration, usize> = BTreeMap::new();
    for (cidx, (config, mult)) in support.iter().enumerate() {
        let mut bins: Vec<Configuration> = bins_by_copy
            .range((cidx, 0)..(cidx + 1, 0))
            .map(|(_, items)| Configuration::new(items.clone()))
            .collect();
        bins.retain(|b| !b.is_empty());
        let empty_bins = mult - BigUint::from(bins.len());
        let completion: Vec<ItemId> = completion_of
            .iter()
            .filter(|(_, c)| *c == *config)
            .map(|(item, _)| *item)
            .collect();
        category_of.insert((*config).clone(), categories.len());
        categories.push(Category {
            template: (*config).clone(),
            bins,
            empty_bins,
            completion,
        });
    }
    for item in &fractional {
        let single = Configuration::singleton(*item);
        match category_of.get(&single) {
            Some(&idx) => categories[idx].bins.push(single),
            None => {
                category_of.insert(single.clone(), categories.len());
                categories.push(Category {
                    template: single.clone(),
                    bins: vec![single],
                    empty_bins: BigUint::zero(),
                    completion: Vec::new(),
                });
            }
        }
    }

    let np = NicePartition { categories };
    // size bound: |z*| + |F| stays within |z| plus the category budget
    let size = np.size();
    let z_norm = z.norm();
    let size_rat = Rational::from_integer(BigInt::from(size));
    if size_rat > z_norm {
        let excess = size_rat - z_norm;
        let ok = match consts.category_cap() {
            crate::constants::Bound::Cap(c) => match c {
                crate::constants::Cap::Finite(v) => excess <= Rational::from_integer(v.into()),
                crate::constants::Cap::Unbounded => true,
            },
            crate::constants::Bound::Log(l) => l.admits_rational(&excess),
        };
        if !ok {
            return Err(PartitionError::Contract(format!(
                "partition size exceeds the prototype norm by {excess}"
            )));
        }
    }
    verify_nice_partition(inst, &np, consts).map_err(PartitionError::Contract)?;
    Ok(PartitionOutcome {
        partition: np,
        fractional_count: fractional.len(),
        matched_items: matched,
    })
}

/// Standalone checker for the organized-partition invariants; independent of
/// how the partition was produced.
pub fn verify_nice_partition(
    inst: &Instance,
    np: &NicePartition,
    consts: &ConstantSet,
) -> Result<(), String> {
    let eps = consts.eps();
    if !consts.category_cap().admits(np.categories.len()) {
        return Err(format!(
            "{} categories exceed the budget {}",
            np.categories.len(),
            consts.category_cap()
        ));
    }
    let mut templates: Vec<&Configuration> = np.categories.iter().map(|c| &c.template).collect();
    templates.sort();
    if templates.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate category templates".into());
    }

    let mut seen = vec![false; inst.n()];
    for cat in &np.categories {
        for bin in &cat.bins {
            if bin.is_empty() {
                return Err("materialized empty bin".into());
            }
            if !inst.is_configuration(bin) {
                return Err(format!("bin {bin} is not a configuration"));
            }
            for item in bin.iter() {
                if seen[item.idx()] {
                    return Err(format!("item {item} packed twice"));
                }
                seen[item.idx()] = true;
            }
            if !allowed_in(inst, bin, &cat.template) {
                return Err(format!(
                    "bin {bin} is not allowed in template {}",
                    cat.template
                ));
            }
        }
    }
    for cat in &np.categories {
        let template_size = cat.template.size(inst);
        let residual = Rational::one() - &template_size;
        let threshold = (eps * eps).min(eps * &residual);
        let bin_count = Rational::from_integer(BigInt::from(cat.bin_count()));
        let mut completion_size = Rational::zero();
        for &item in &cat.completion {
            if seen[item.idx()] {
                return Err(format!("item {item} both packed and completing"));
            }
            seen[item.idx()] = true;
            if *inst.size(item) > threshold {
                return Err(format!(
                    "completion item {item} does not fit template {}",
                    cat.template
                ));
            }
            completion_size += inst.size(item);
        }
        if completion_size > &residual * &bin_count {
            return Err(format!(
                "completion of {} oversized: {completion_size}",
                cat.template
            ));
        }
        for (g, group) in inst.groups().iter().enumerate() {
            let in_completion = cat
                .completion
                .iter()
                .filter(|&&i| inst.group_of(i) == g)
                .count();
            if in_completion == 0 {
                continue;
            }
            let headroom = group.cap - cat.template.group_count(inst, g) as u64;
            let allowed = BigUint::from(headroom) * cat.bin_count();
            if BigUint::from(in_completion) > allowed {
                return Err(format!(
                    "completion of {} breaks group {} budget",
                    cat.template, group.external_id
                ));
            }
        }
    }
    if let Some(idx) = seen.iter().position(|s| !s) {
        return Err(format!(
            "item {} neither packed nor completing",
            ItemId::from_idx(idx)
        ));
    }
    Ok(())
}

/// A bin is allowed in a template when its items map injectively onto
/// template slots they fit (same group, no larger size).
pub fn allowed_in(inst: &Instance, bin: &Configuration, template: &Configuration) -> bool {
    if bin.len() > template.len() {
        return false;
    }
    let slots: Vec<ItemId> = template.iter().collect();
    let adj: Vec<Vec<usize>> = bin
        .iter()
        .map(|item| {
            slots
                .iter()
                .enumerate()
                .filter(|(_, &slot)| {
                    inst.group_of(item) == inst.group_of(slot)
                        && inst.size(item) <= inst.size(slot)
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let matching = maximum_bipartite_matching(slots.len(), &adj);
    matching.iter().all(|m| m.is_some())
}
