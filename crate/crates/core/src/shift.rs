//! Shifting: fractional grouping. Important groups are cut into classes of
//! roughly equal prototype frequency, support configurations are projected
//! onto class representatives, and the result is padded so the assignment
//! polytope stays nonempty. This is what shrinks the support to a size
//! depending only on eps.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::config::Configuration;
use crate::constants::ConstantSet;
use crate::instance::{GroupIdx, Instance, ItemId};
use crate::polytope::build_polytope;
use crate::prototype::Prototype;
use crate::rational::Rational;

/// Classes of the important groups. Within a group, classes are ordered by
/// ascending item id: class i+1 holds smaller (or equal) sizes than class i,
/// so its items fit every slot of class i.
#[derive(Debug, Clone)]
pub struct ClassFamily {
    pub classes: BTreeMap<GroupIdx, Vec<Vec<ItemId>>>,
    pub significant: Vec<GroupIdx>,
    pub massive: Vec<GroupIdx>,
    pub threshold: Rational,
}

impl ClassFamily {
    pub fn important_groups(&self) -> Vec<GroupIdx> {
        let mut v: Vec<GroupIdx> = self
            .significant
            .iter()
            .chain(self.massive.iter())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// (group, class index, first id, last id, frequency) rows for diagnostics.
    pub fn table(&self, inst: &Instance, proto: &Prototype) -> Vec<(i64, usize, ItemId, ItemId, Rational)> {
        let mut rows = Vec::new();
        for (&g, classes) in &self.classes {
            for (i, class) in classes.iter().enumerate() {
                if class.is_empty() {
                    continue;
                }
                rows.push((
                    inst.group(g).external_id,
                    i + 1,
                    class[0],
                    *class.last().expect("nonempty class"),
                    proto.frequency_of_set(class),
                ));
            }
        }
        rows
    }
}

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("input prototype violates the shift preconditions: {0}")]
    InputContract(String),
    #[error("class construction violated its invariants: {0}")]
    ClassContract(String),
    #[error("projection of {config} violated its contract: {what}")]
    ProjectionContract { config: Configuration, what: String },
    #[error("shifted prototype violates its contract: {0}")]
    OutputContract(String),
}

/// Frequency of an item set under a prototype.
pub fn frequency(proto: &Prototype, items: &[ItemId]) -> Rational {
    proto.frequency_of_set(items)
}

/// Significant groups (top eta by frequency of small items, ties by group
/// order) and massive groups (those holding a large item).
pub fn important_groups(
    inst: &Instance,
    proto: &Prototype,
    consts: &ConstantSet,
) -> (Vec<GroupIdx>, Vec<GroupIdx>) {
    let eps = consts.eps();
    // memberless groups have nothing to shift and no representative slot
    let mut small_freq: Vec<(GroupIdx, Rational)> = inst
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, group)| !group.members.is_empty())
        .map(|(g, group)| {
            let smalls: Vec<ItemId> = group
                .members
                .iter()
                .copied()
                .filter(|&i| !inst.is_large(i, eps))
                .collect();
            (g, proto.frequency_of_set(&smalls))
        })
        .collect();
    small_freq.sort_by(|(ga, fa), (gb, fb)| fb.cmp(fa).then(ga.cmp(gb)));
    let eta = consts.eta(inst.groups().len());
    let significant: Vec<GroupIdx> = small_freq.iter().take(eta).map(|(g, _)| *g).collect();
    let massive: Vec<GroupIdx> = inst
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, group)| group.members.iter().any(|&i| inst.is_large(i, eps)))
        .map(|(g, _)| g)
        .collect();
    (significant, massive)
}

/// Builds the classes of every important group: scanning items by ascending
/// id (non-increasing size), a class closes as soon as its accumulated
/// frequency reaches the threshold; the remainder forms the final class.
pub fn build_classes(
    inst: &Instance,
    proto: &Prototype,
    consts: &ConstantSet,
) -> Result<ClassFamily, ShiftError> {
    let (significant, massive) = important_groups(inst, proto, consts);
    let threshold = consts.class_threshold(&proto.norm());
    if threshold.is_negative() {
        return Err(ShiftError::ClassContract(
            "class threshold must be nonnegative".into(),
        ));
    }
    let mut family = ClassFamily {
        classes: BTreeMap::new(),
        significant,
        massive,
        threshold: threshold.clone(),
    };
    let two = Rational::from_integer(2.into());
    for g in family.important_groups() {
        let mut classes: Vec<Vec<ItemId>> = Vec::new();
        let mut current: Vec<ItemId> = Vec::new();
        let mut acc = Rational::zero();
        for &item in &inst.group(g).members {
            current.push(item);
            acc += proto.frequency(item);
            if acc >= threshold {
                classes.push(std::mem::take(&mut current));
                acc = Rational::zero();
            }
        }
        if !current.is_empty() {
            classes.push(current);
        }
        // invariants: all but the last class reach the threshold, none
        // overshoots it by more than 2 (the per-item frequency bound)
        for (i, class) in classes.iter().enumerate() {
            let f = proto.frequency_of_set(class);
            if i + 1 < classes.len() && f < threshold {
                return Err(ShiftError::ClassContract(format!(
                    "class {} of group {} underweight",
                    i + 1,
                    inst.group(g).external_id
                )));
            }
            if f > &threshold + &two {
                return Err(ShiftError::ClassContract(format!(
                    "class {} of group {} overweight",
                    i + 1,
                    inst.group(g).external_id
                )));
            }
        }
        for pair in classes.windows(2) {
            let last_prev = *pair[0].last().expect("nonempty class");
            let first_next = pair[1][0];
            if inst.size(first_next) > inst.size(last_prev) {
                return Err(ShiftError::ClassContract(
                    "consecutive classes out of size order".into(),
                ));
            }
        }
        let count_cap = consts
            .eps_pow_neg(consts.upsilon.saturating_add(10).min(1_000_000))
            .admits(classes.len());
        if !count_cap {
            return Err(ShiftError::ClassContract(format!(
                "group {} has too many classes",
                inst.group(g).external_id
            )));
        }
        family.classes.insert(g, classes);
    }
    Ok(family)
}

/// Projects a configuration onto class representatives: within each class,
/// as many items as the configuration holds there map to the class's largest
/// ids (smallest sizes); items of non-important groups are dropped.
pub fn project_configuration(
    config: &Configuration,
    classes: &ClassFamily,
) -> Configuration {
    let mut projected: Vec<ItemId> = Vec::new();
    for class_list in classes.classes.values() {
        for class in class_list {
            let count = class.iter().filter(|i| config.contains(**i)).count();
            projected.extend_from_slice(&class[class.len() - count..]);
        }
    }
    Configuration::new(projected)
}

#[derive(Debug, Clone)]
pub struct ShiftOutcome {
    pub prototype: Prototype,
    pub classes: ClassFamily,
}

pub fn shift(
    inst: &Instance,
    proto: &Prototype,
    consts: &ConstantSet,
) -> Result<ShiftOutcome, ShiftError> {
    let eps = consts.eps();
    check_input(inst, proto, consts)?;
    let norm = proto.norm();
    if norm.is_zero() {
        return Err(ShiftError::InputContract(
            "shift needs a prototype of positive norm".into(),
        ));
    }

    let classes = build_classes(inst, proto, consts)?;
    let threshold = classes.threshold.clone();
    if !threshold.is_positive() {
        return Err(ShiftError::ClassContract(
            "class threshold must be positive to size the padding".into(),
        ));
    }

    // weight multiplier 1 + 2/threshold lets each class absorb the next
    // one's frequency (threshold + 2) within its own (at least threshold)
    let multiplier = Rational::one() + Rational::from_integer(2.into()) / &threshold;
    let mut z = Prototype::new();
    for (config, weight) in proto.iter() {
        let projected = project_configuration(config, &classes);
        check_projection(inst, consts, config, &projected)?;
        z.add(projected, weight * &multiplier);
    }
    let empty_boost =
        Rational::from_integer(4.into()) * eps * &norm + consts.eps_pow(3).recip();
    z.add(Configuration::empty(), empty_boost);
    let slot_boost = &threshold + Rational::from_integer(2.into());
    for g in classes.important_groups() {
        let top = inst.group(g).members[0];
        z.add(Configuration::singleton(top), slot_boost.clone());
    }

    check_output(inst, proto, &z, consts)?;
    Ok(ShiftOutcome {
        prototype: z,
        classes,
    })
}

fn check_input(
    inst: &Instance,
    proto: &Prototype,
    consts: &ConstantSet,
) -> Result<(), ShiftError> {
    let eps = consts.eps();
    let two = Rational::from_integer(2.into());
    for config in proto.support() {
        if !consts.config_size_cap.admits(config.len()) {
            return Err(ShiftError::InputContract(format!(
                "support configuration {config} exceeds the size budget"
            )));
        }
        let small_part: Rational = config
            .iter()
            .filter(|&i| !inst.is_large(i, eps))
            .fold(Rational::zero(), |a, i| a + inst.size(i));
        if small_part > *eps {
            return Err(ShiftError::InputContract(format!(
                "small part of {config} exceeds eps"
            )));
        }
    }
    let mut small_mass = Rational::zero();
    for item in inst.item_ids() {
        let f = proto.frequency(item);
        if f > two {
            return Err(ShiftError::InputContract(format!(
                "frequency of item {item} exceeds 2"
            )));
        }
        if !inst.is_large(item, eps) {
            small_mass += f * inst.size(item);
        }
    }
    if small_mass > eps * proto.norm() {
        return Err(ShiftError::InputContract(
            "total weighted size of small items exceeds eps * norm".into(),
        ));
    }
    Ok(())
}

fn check_projection(
    inst: &Instance,
    consts: &ConstantSet,
    config: &Configuration,
    projected: &Configuration,
) -> Result<(), ShiftError> {
    let fail = |what: &str| ShiftError::ProjectionContract {
        config: config.clone(),
        what: what.into(),
    };
    if projected.size(inst) > config.size(inst) {
        return Err(fail("projected size grew"));
    }
    if projected.len() > config.len() {
        return Err(fail("projected item count grew"));
    }
    for g in 0..inst.groups().len() {
        if projected.group_count(inst, g) > config.group_count(inst, g) {
            return Err(fail("projected group count grew"));
        }
    }
    // fit(C) is antitone in s(C), so fit(C) is a subset of fit(P(C)); verify
    // directly on the computed sets
    let eps = consts.eps();
    let before = inst.fit_config(config, eps);
    let after = inst.fit_config(projected, eps);
    let after_set: std::collections::BTreeSet<ItemId> = after.into_iter().collect();
    if !before.iter().all(|i| after_set.contains(i)) {
        return Err(fail("fit set shrank under projection"));
    }
    Ok(())
}

fn check_output(
    inst: &Instance,
    y: &Prototype,
    z: &Prototype,
    consts: &ConstantSet,
) -> Result<(), ShiftError> {
    for config in z.support() {
        if !consts.config_size_cap.admits(config.len()) {
            return Err(ShiftError::OutputContract(format!(
                "support configuration {config} exceeds the size budget"
            )));
        }
    }
    if !consts.support_cap().admits(z.support_size()) {
        return Err(ShiftError::OutputContract(format!(
            "support size {} exceeds the budget {}",
            z.support_size(),
            consts.support_cap()
        )));
    }
    if !consts.shift_norm_bound_holds(&y.norm(), &z.norm()) {
        return Err(ShiftError::OutputContract(format!(
            "norm {} exceeds (1+5 eps) * {} plus the padding budget",
            z.norm(),
            y.norm()
        )));
    }
    if !inst.is_empty() {
        let spec = build_polytope(inst, z, consts.eps());
        if !spec.is_feasible() {
            return Err(ShiftError::OutputContract(
                "assignment polytope of the shifted prototype is empty".into(),
            ));
        }
    }
    Ok(())
}
