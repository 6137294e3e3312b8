//! The assignment polytope of a prototype: items are fractionally assigned to
//! slot-types (items of support configurations) and configuration-types
//! (residual capacity of support configurations) under fit, capacity,
//! cardinality, multiplicity and coverage constraints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::config::Configuration;
use crate::instance::{Instance, ItemId};
use crate::prototype::Prototype;
use crate::rational::Rational;
use crate::simplex::{feasible_vertex, solve_lp, LinearProgram, LpStatus, Relation};

/// A type an item can be assigned to: a slot (another item) or the residual
/// capacity of a configuration (index into the spec's support).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PolyType {
    Slot(ItemId),
    Conf(usize),
}

/// Assignment-point key carrying the configuration itself, so points remain
/// meaningful without the spec at hand.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TypeKey {
    Slot(ItemId),
    Conf(Configuration),
}

/// Sparse point of the polytope; stored values lie in (0, 1].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentPoint {
    entries: BTreeMap<(ItemId, TypeKey), Rational>,
}

impl AssignmentPoint {
    pub fn new() -> AssignmentPoint {
        AssignmentPoint {
            entries: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, item: ItemId, key: TypeKey, value: Rational) {
        assert!(value.is_positive() && value <= Rational::one());
        self.entries.insert((item, key), value);
    }

    pub fn get(&self, item: ItemId, key: &TypeKey) -> Rational {
        self.entries
            .get(&(item, key.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ItemId, TypeKey), &Rational)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Items with at least one strictly fractional entry.
pub fn fractional_items(point: &AssignmentPoint) -> Vec<ItemId> {
    let mut out: Vec<ItemId> = point
        .entries
        .iter()
        .filter(|(_, v)| v.is_positive() && **v < Rational::one())
        .map(|((item, _), _)| *item)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Near-integrality budget for vertices of integral prototypes:
/// 8 k^2 |supp|^2 with k the largest support configuration size (at least 1).
pub fn fractional_budget(support_size: usize, max_config_len: usize) -> BigUint {
    let k = BigUint::from(max_config_len.max(1));
    let s = BigUint::from(support_size);
    BigUint::from(8u32) * &k * &k * &s * &s
}

#[derive(Debug, Clone)]
pub struct PolytopeSpec<'a> {
    pub inst: &'a Instance,
    pub eps: Rational,
    /// Support configurations with their prototype weights, canonical order.
    pub support: Vec<(Configuration, Rational)>,
    /// Items acting as slots: everything occurring in a support configuration.
    pub slot_types: Vec<ItemId>,
    /// Active (item, type) pairs: exactly the assignments the fit relations allow.
    pub vars: Vec<(ItemId, PolyType)>,
    /// Ride-along items per support configuration.
    fit_conf: Vec<Vec<ItemId>>,
}

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("polytope is empty: {0}")]
    Empty(String),
    #[error("LP solver returned {0:?} on the polytope LP")]
    Solver(LpStatus),
}

/// One constraint family of the polytope, for diagnostics and re-checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Capacity(usize),
    Cardinality(usize, usize),
    Multiplicity(usize),
    Cover(usize),
}

pub fn build_polytope<'a>(
    inst: &'a Instance,
    proto: &Prototype,
    eps: &Rational,
) -> PolytopeSpec<'a> {
    let support: Vec<(Configuration, Rational)> = proto
        .iter()
        .map(|(c, v)| (c.clone(), v.clone()))
        .collect();
    let mut slot_types: Vec<ItemId> = support
        .iter()
        .flat_map(|(c, _)| c.iter())
        .collect();
    slot_types.sort_unstable();
    slot_types.dedup();

    let mut vars: Vec<(ItemId, PolyType)> = Vec::new();
    for &slot in &slot_types {
        for item in inst.fit_slot(slot) {
            vars.push((item, PolyType::Slot(slot)));
        }
    }
    let mut fit_conf = Vec::with_capacity(support.len());
    for (idx, (config, _)) in support.iter().enumerate() {
        let fits = inst.fit_config(config, eps);
        for &item in &fits {
            vars.push((item, PolyType::Conf(idx)));
        }
        fit_conf.push(fits);
    }
    PolytopeSpec {
        inst,
        eps: eps.clone(),
        support,
        slot_types,
        vars,
        fit_conf,
    }
}

impl PolytopeSpec<'_> {
    fn row_bodies(&self) -> Vec<(RowKind, Vec<(usize, Rational)>, Rational)> {
        let inst = self.inst;
        let mut var_of: BTreeMap<(ItemId, PolyType), usize> = BTreeMap::new();
        for (j, pair) in self.vars.iter().enumerate() {
            var_of.insert(pair.clone(), j);
        }
        let mut rows = Vec::new();

        for (idx, (config, weight)) in self.support.iter().enumerate() {
            // capacity: sum of assigned sizes within the residual space
            let coeffs: Vec<(usize, Rational)> = self.fit_conf[idx]
                .iter()
                .map(|&item| {
                    (
                        var_of[&(item, PolyType::Conf(idx))],
                        inst.size(item).clone(),
                    )
                })
                .collect();
            let rhs = (Rational::one() - config.size(inst)) * weight;
            rows.push((RowKind::Capacity(idx), coeffs, rhs));

            // cardinality per group
            let mut by_group: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &item in &self.fit_conf[idx] {
                by_group
                    .entry(inst.group_of(item))
                    .or_default()
                    .push(var_of[&(item, PolyType::Conf(idx))]);
            }
            for (g, cols) in by_group {
                let in_config = config.group_count(inst, g) as i64;
                let slots_left = inst.group(g).cap as i64 - in_config;
                debug_assert!(slots_left >= 0);
                let rhs = weight * Rational::from_integer(slots_left.into());
                let coeffs = cols.into_iter().map(|c| (c, Rational::one())).collect();
                rows.push((RowKind::Cardinality(idx, g), coeffs, rhs));
            }
        }

        for (sidx, &slot) in self.slot_types.iter().enumerate() {
            let rhs = self
                .support
                .iter()
                .filter(|(c, _)| c.contains(slot))
                .fold(Rational::zero(), |a, (_, v)| a + v);
            let coeffs: Vec<(usize, Rational)> = inst
                .fit_slot(slot)
                .into_iter()
                .map(|item| (var_of[&(item, PolyType::Slot(slot))], Rational::one()))
                .collect();
            rows.push((RowKind::Multiplicity(sidx), coeffs, rhs));
        }

        for item in inst.item_ids() {
            let coeffs: Vec<(usize, Rational)> = self
                .vars
                .iter()
                .enumerate()
                .filter(|(_, (l, _))| *l == item)
                .map(|(j, _)| (j, Rational::one()))
                .collect();
            rows.push((RowKind::Cover(item.idx()), coeffs, Rational::one()));
        }
        rows
    }

    /// Lowers to an LP, dropping inequality rows that cannot bind over
    /// [0,1]-valued assignments (their coefficient sum is within the bound).
    /// The feasible set is unchanged; see `verify_point` for the full re-check.
    fn lower(&self, tight_cover: bool, with_objective: bool) -> LinearProgram {
        let nvars = self.vars.len();
        let mut objective = vec![Rational::zero(); nvars];
        if with_objective {
            for (j, (item, ty)) in self.vars.iter().enumerate() {
                if matches!(ty, PolyType::Conf(_)) {
                    objective[j] = self.inst.size(*item).clone();
                }
            }
        }
        let mut lp = LinearProgram::minimize(nvars, objective);
        for (kind, coeffs, rhs) in self.row_bodies() {
            match kind {
                RowKind::Cover(_) => {
                    let rel = if tight_cover { Relation::Eq } else { Relation::Ge };
                    lp.push(coeffs, rel, rhs);
                }
                _ => {
                    let max_lhs = coeffs
                        .iter()
                        .fold(Rational::zero(), |a, (_, c)| a + c);
                    if max_lhs <= rhs {
                        continue; // redundant over the [0,1] box
                    }
                    lp.push(coeffs, Relation::Le, rhs);
                }
            }
        }
        lp
    }

    fn point_from_values(&self, values: &[Rational]) -> AssignmentPoint {
        let mut point = AssignmentPoint::new();
        for (j, (item, ty)) in self.vars.iter().enumerate() {
            if values[j].is_positive() {
                let key = match ty {
                    PolyType::Slot(s) => TypeKey::Slot(*s),
                    PolyType::Conf(c) => TypeKey::Conf(self.support[*c].0.clone()),
                };
                point.set(*item, key, values[j].clone());
            }
        }
        point
    }

    /// Some item has no admissible type at all, so the coverage row is
    /// unsatisfiable and the polytope is trivially empty.
    fn uncoverable_item(&self) -> Option<ItemId> {
        let mut covered = vec![false; self.inst.n()];
        for (item, _) in &self.vars {
            covered[item.idx()] = true;
        }
        self.inst
            .item_ids()
            .find(|item| !covered[item.idx()])
    }

    pub fn is_feasible(&self) -> bool {
        if self.inst.is_empty() {
            return true;
        }
        if self.uncoverable_item().is_some() {
            return false;
        }
        let lp = self.lower(false, false);
        feasible_vertex(&lp).status == LpStatus::Optimal
    }

    /// A basic feasible solution with every coverage constraint tight.
    pub fn vertex_with_tight_cover(&self) -> Result<AssignmentPoint, PolytopeError> {
        if self.inst.is_empty() {
            return Ok(AssignmentPoint::new());
        }
        if let Some(item) = self.uncoverable_item() {
            return Err(PolytopeError::Empty(format!(
                "item {item} fits no slot or configuration type"
            )));
        }
        let lp = self.lower(true, true);
        let sol = solve_lp(&lp);
        match sol.status {
            LpStatus::Optimal => {
                let point = self.point_from_values(&sol.values);
                self.verify_point(&point, true)
                    .expect("vertex violates the polytope it was drawn from");
                Ok(point)
            }
            LpStatus::Infeasible => Err(PolytopeError::Empty(
                "coverage rows are unsatisfiable".into(),
            )),
            s => Err(PolytopeError::Solver(s)),
        }
    }

    /// Exact re-check of every constraint family against the full definition
    /// (not the pruned LP): fit admissibility, capacity, cardinality,
    /// multiplicity, and coverage (tight when requested).
    pub fn verify_point(
        &self,
        point: &AssignmentPoint,
        tight_cover: bool,
    ) -> Result<(), String> {
        let inst = self.inst;
        for ((item, key), value) in point.iter() {
            if !value.is_positive() || *value > Rational::one() {
                return Err(format!("entry ({item},?) out of (0,1]"));
            }
            match key {
                TypeKey::Slot(slot) => {
                    let ok = inst.group_of(*item) == inst.group_of(*slot)
                        && inst.size(*item) <= inst.size(*slot);
                    if !ok {
                        return Err(format!("item {item} does not fit slot {slot}"));
                    }
                    if self.slot_types.binary_search(slot).is_err() {
                        return Err(format!("slot {slot} occurs in no support configuration"));
                    }
                }
                TypeKey::Conf(c) => {
                    let residual = Rational::one() - c.size(inst);
                    let threshold = (&self.eps * &self.eps).min(&self.eps * residual);
                    if *inst.size(*item) > threshold {
                        return Err(format!("item {item} does not fit configuration {c}"));
                    }
                }
            }
        }
        for (idx, (config, weight)) in self.support.iter().enumerate() {
            let key = TypeKey::Conf(config.clone());
            let mut used = Rational::zero();
            let mut per_group: BTreeMap<usize, Rational> = BTreeMap::new();
            for item in inst.item_ids() {
                let v = point.get(item, &key);
                if v.is_zero() {
                    continue;
                }
                used += &v * inst.size(item);
                *per_group
                    .entry(inst.group_of(item))
                    .or_insert_with(Rational::zero) += v;
            }
            let cap = (Rational::one() - config.size(inst)) * weight;
            if used > cap {
                return Err(format!("capacity exceeded on configuration {config}"));
            }
            for (g, total) in per_group {
                let slots_left = inst.group(g).cap as i64 - config.group_count(inst, g) as i64;
                if total > weight * Rational::from_integer(slots_left.into()) {
                    return Err(format!(
                        "cardinality exceeded for group {} on configuration {config}",
                        inst.group(g).external_id
                    ));
                }
            }
            let _ = idx;
        }
        for &slot in &self.slot_types {
            let key = TypeKey::Slot(slot);
            let mut assigned = Rational::zero();
            for item in inst.item_ids() {
                assigned += point.get(item, &key);
            }
            let available = self
                .support
                .iter()
                .filter(|(c, _)| c.contains(slot))
                .fold(Rational::zero(), |a, (_, v)| a + v);
            if assigned > available {
                return Err(format!("multiplicity exceeded on slot {slot}"));
            }
        }
        for item in inst.item_ids() {
            let total: Rational = point
                .iter()
                .filter(|((l, _), _)| *l == item)
                .fold(Rational::zero(), |a, (_, v)| a + v);
            if tight_cover {
                if total != Rational::one() {
                    return Err(format!("coverage of item {item} is {total}, want 1"));
                }
            } else if total < Rational::one() {
                return Err(format!("item {item} under-covered: {total}"));
            }
        }
        Ok(())
    }

    /// Plain-text inequality listing of the (unpruned) polytope LP.
    pub fn dump_lp(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| {
            let (item, ty) = &self.vars[j];
            match ty {
                PolyType::Slot(s) => format!("g[{item},slot {s}]"),
                PolyType::Conf(c) => format!("g[{item},conf {}]", self.support[*c].0),
            }
        };
        for (kind, coeffs, rhs) in self.row_bodies() {
            let label = match kind {
                RowKind::Capacity(c) => format!("capacity {}", self.support[c].0),
                RowKind::Cardinality(c, g) => format!(
                    "cardinality {} group {}",
                    self.support[c].0,
                    self.inst.group(g).external_id
                ),
                RowKind::Multiplicity(s) => format!("multiplicity slot {}", self.slot_types[s]),
                RowKind::Cover(i) => format!("cover item {}", ItemId::from_idx(i)),
            };
            let rel = if matches!(kind, RowKind::Cover(_)) {
                ">="
            } else {
                "<="
            };
            let body = coeffs
                .iter()
                .map(|(j, c)| format!("{}*{}", crate::rational::format_rational(c), name(*j)))
                .collect::<Vec<_>>()
                .join(" + ");
            let _ = writeln!(
                out,
                "{label}: {body} {rel} {}",
                crate::rational::format_rational(&rhs)
            );
        }
        out
    }
}
