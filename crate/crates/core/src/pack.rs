//! Completing an organized partition into a full packing: each category's
//! completion is packed by the greedy small-item packer on a residual
//! instance, and the resulting bins are merged into the category's bins.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::config::{validate_packing, Configuration, Packing};
use crate::constants::ConstantSet;
use crate::greedy::{greedy, GreedyError};
use crate::instance::{Instance, ItemId};
use crate::partition::NicePartition;
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum PackError {
    #[error("completion of a full template cannot be repacked")]
    FullTemplate,
    #[error("greedy failed on a residual instance: {0}")]
    Greedy(#[from] GreedyError),
    #[error("category {template} used {used} bins, above (1+2 eps) |B| + 2 with |B| = {bins}")]
    CategoryBound {
        template: Configuration,
        used: String,
        bins: String,
    },
    #[error("pack produced an invalid packing: {0}")]
    Invalid(String),
}

/// Residual instance of a template and its completion: sizes are rescaled by
/// the template's free capacity and caps reduced by the template's usage.
/// Returns the instance plus the original id of each residual item.
pub fn residual_instance(
    inst: &Instance,
    template: &Configuration,
    completion: &[ItemId],
) -> Result<(Instance, Vec<ItemId>), PackError> {
    let free = Rational::one() - template.size(inst);
    if !free.is_positive() {
        if completion.is_empty() {
            let (res, _) = Instance::from_items(Vec::new(), &Default::default());
            return Ok((res, Vec::new()));
        }
        return Err(PackError::FullTemplate);
    }
    let mut caps = std::collections::BTreeMap::new();
    let mut items = Vec::with_capacity(completion.len());
    for &item in completion {
        let g = inst.group_of(item);
        let headroom = inst.group(g).cap - template.group_count(inst, g) as u64;
        debug_assert!(headroom >= 1, "completion item in a saturated group");
        caps.insert(inst.group(g).external_id, headroom);
        items.push((inst.size(item) / &free, inst.group(g).external_id));
    }
    let (res, positions) = Instance::from_items(items, &caps);
    let originals = positions.into_iter().map(|p| completion[p]).collect();
    Ok((res, originals))
}

pub struct PackOutcome {
    pub packing: Packing,
    /// Empty bins implied by the category counts but not materialized.
    pub empty_bins_dropped: BigUint,
    /// Logical bin total including the empty ones.
    pub logical_bins: BigUint,
}

pub fn pack(
    inst: &Instance,
    np: &NicePartition,
    consts: &ConstantSet,
) -> Result<PackOutcome, PackError> {
    let eps = consts.eps();
    let two = Rational::from_integer(2.into());
    let mut bins: Vec<Configuration> = Vec::new();
    let mut logical = BigUint::zero();
    for cat in &np.categories {
        let riders: Vec<Configuration> = if cat.completion.is_empty() {
            Vec::new()
        } else {
            let (residual, originals) = residual_instance(inst, &cat.template, &cat.completion)?;
            let packed = greedy(&residual, eps)?;
            packed
                .bins
                .iter()
                .map(|bin| {
                    Configuration::new(bin.iter().map(|i| originals[i.idx()]).collect())
                })
                .collect()
        };

        let base = cat.bin_count();
        let used = BigUint::from(riders.len()).max(base.clone());
        let bound = (Rational::one() + &two * eps)
            * Rational::from_integer(BigInt::from(base.clone()))
            + &two;
        if Rational::from_integer(BigInt::from(used.clone())) > bound {
            return Err(PackError::CategoryBound {
                template: cat.template.clone(),
                used: used.to_string(),
                bins: base.to_string(),
            });
        }
        logical += used;

        // element-wise union: riders merge into the category's bins in order,
        // spilling into (implicit) empty bins and then fresh ones
        let mut merged: Vec<Configuration> = cat.bins.clone();
        for (i, rider) in riders.into_iter().enumerate() {
            if i < merged.len() {
                merged[i] = merged[i].union(&rider);
            } else {
                merged.push(rider);
            }
        }
        bins.extend(merged.into_iter().filter(|b| !b.is_empty()));
    }

    let packing = Packing { bins };
    let materialized = BigUint::from(packing.bins.len());
    debug_assert!(materialized <= logical);
    let empty_bins_dropped = &logical - &materialized;
    validate_packing(inst, &packing, true).map_err(|e| PackError::Invalid(e.to_string()))?;
    Ok(PackOutcome {
        packing,
        empty_bins_dropped,
        logical_bins: logical,
    })
}
