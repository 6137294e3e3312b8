//! End-to-end orchestration: the structured-instance scheme (configuration LP
//! -> evict -> shift -> partition -> pack) and the general solver that wraps
//! it in reduce/reconstruct. Each stage's contract is enforced as a hard
//! error; violations indicate bugs, not bad inputs.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::config::{validate_packing, Packing};
use crate::config_lp::{solve_configuration_lp, ConfigLpError};
use crate::constants::ConstantSet;
use crate::evict::{evict, EvictError};
use crate::instance::Instance;
use crate::pack::{pack, PackError};
use crate::partition::{partition, PartitionError};
use crate::pricing::PricingMode;
use crate::rational::{ceil_int, Rational};
use crate::reduce::{reduce, reconstruct, ReduceError};
use crate::shift::{shift, ShiftError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("instance is not structured for this eps")]
    NotStructured,
    #[error("configuration LP: {0}")]
    ConfigLp(#[from] ConfigLpError),
    #[error("evict: {0}")]
    Evict(#[from] EvictError),
    #[error("shift: {0}")]
    Shift(#[from] ShiftError),
    #[error("partition: {0}")]
    Partition(#[from] PartitionError),
    #[error("pack: {0}")]
    Pack(#[from] PackError),
    #[error("reduce/reconstruct: {0}")]
    Reduce(#[from] ReduceError),
    #[error("final packing failed validation: {0}")]
    Invalid(String),
    #[error("packing of {bins} bins undercuts the lower bound {bound}")]
    BelowLowerBound { bins: usize, bound: u64 },
}

#[derive(Debug, Clone, Default)]
pub struct StageStats {
    pub lp_objective: Rational,
    pub lp_iterations: usize,
    pub x_support: usize,
    pub y_norm: Rational,
    pub y_support: usize,
    pub z_norm: Rational,
    pub z_support: usize,
    pub fractional_items: usize,
    pub matched_items: usize,
    pub categories: usize,
    pub partition_size: BigUint,
    pub logical_bins: BigUint,
    pub empty_bins_dropped: BigUint,
    pub structured_bins: usize,
    pub pivot: u32,
    pub union_items: usize,
    pub omega_items: usize,
    pub discarded_items: usize,
    pub unplaced_items: usize,
    pub lp_time: Duration,
    pub rounding_time: Duration,
    pub total_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub packing: Packing,
    pub bins: usize,
    /// Master LP objective; divided by (1 + eps) it lower-bounds the optimum.
    pub lp_lower_bound: Rational,
    pub epsilon_used: Rational,
    pub stats: StageStats,
}

/// True iff at most the structured budget of groups holds items of size
/// at least eps^2.
pub fn is_structured(inst: &Instance, consts: &ConstantSet) -> bool {
    let eps2 = consts.eps() * consts.eps();
    let holders = inst
        .groups()
        .iter()
        .filter(|g| g.members.iter().any(|&i| *inst.size(i) >= eps2))
        .count();
    consts.structured_cap().admits(holders)
}

/// The scheme for structured instances; every stage contract is verified.
pub fn afptas_structured(
    inst: &Instance,
    consts: &ConstantSet,
    pricing: &PricingMode,
) -> Result<(Packing, StageStats), PipelineError> {
    let mut stats = StageStats::default();
    if inst.is_empty() {
        return Ok((Packing::empty(), stats));
    }
    if !is_structured(inst, consts) {
        return Err(PipelineError::NotStructured);
    }
    let t0 = Instant::now();
    let lp = solve_configuration_lp(inst, consts.eps(), pricing)?;
    stats.lp_time = t0.elapsed();
    stats.lp_objective = lp.objective.clone();
    stats.lp_iterations = lp.iterations;
    stats.x_support = lp.prototype.support_size();

    let t1 = Instant::now();
    let y = evict(inst, &lp.prototype, consts)?;
    stats.y_norm = y.norm();
    stats.y_support = y.support_size();

    let shifted = shift(inst, &y, consts)?;
    let z = shifted.prototype;
    stats.z_norm = z.norm();
    stats.z_support = z.support_size();

    let outcome = partition(inst, &z, consts)?;
    stats.fractional_items = outcome.fractional_count;
    stats.matched_items = outcome.matched_items;
    stats.categories = outcome.partition.categories.len();
    stats.partition_size = outcome.partition.size();

    let packed = pack(inst, &outcome.partition, consts)?;
    stats.logical_bins = packed.logical_bins.clone();
    stats.empty_bins_dropped = packed.empty_bins_dropped.clone();
    stats.structured_bins = packed.packing.bins.len();
    stats.rounding_time = t1.elapsed();
    Ok((packed.packing, stats))
}

/// Reduce -> structured scheme -> reconstruct; the result is a packing of the
/// original instance.
pub fn gen_afptas(
    inst: &Instance,
    consts: &ConstantSet,
    pricing: &PricingMode,
) -> Result<SolveResult, PipelineError> {
    let t0 = Instant::now();
    if inst.is_empty() {
        return Ok(SolveResult {
            packing: Packing::empty(),
            bins: 0,
            lp_lower_bound: Rational::zero(),
            epsilon_used: consts.eps().clone(),
            stats: StageStats::default(),
        });
    }
    let (reduced, meta) = reduce(inst, consts)?;
    let (structured_packing, mut stats) = afptas_structured(&reduced, consts, pricing)?;
    stats.pivot = meta.pivot;
    stats.union_items = meta.union_items.len();
    stats.omega_items = meta.omega.len();

    let out = reconstruct(inst, consts, &meta, &structured_packing)?;
    stats.discarded_items = out.discarded.len();
    stats.unplaced_items = out.unplaced.len();
    let packing = out.packing;
    validate_packing(inst, &packing, true).map_err(|e| PipelineError::Invalid(e.to_string()))?;

    let bins = packing.bins.len();
    let bound = analytic_lower_bound(inst);
    if (bins as u64) < bound {
        return Err(PipelineError::BelowLowerBound { bins, bound });
    }
    stats.total_time = t0.elapsed();
    Ok(SolveResult {
        packing,
        bins,
        lp_lower_bound: stats.lp_objective.clone(),
        epsilon_used: consts.eps().clone(),
        stats,
    })
}

/// max(ceil(s(I)), V(I)): both are valid packing lower bounds.
pub fn analytic_lower_bound(inst: &Instance) -> u64 {
    let size_bound: BigInt = ceil_int(&inst.total_size());
    let size_bound: u64 = size_bound.try_into().unwrap_or(u64::MAX);
    size_bound.max(inst.cardinality_bound())
}

#[derive(Debug, Clone)]
pub struct EpsilonChoice {
    pub epsilon: Rational,
    /// The formula is dominated by its built-in constant for any instance
    /// that fits in memory, so the choice is effectively fixed.
    pub theory_mode: bool,
    pub practical_recommendation: Rational,
}

/// eps from the instance magnitude: 1 / floor((ln ln W)^(1/17)) with
/// W = s(I) + V(I) + c and ln ln c = 100^17. At any realizable scale
/// ln ln W lies in [100^17, 100^17 + 1), so the floor is exactly 100.
pub fn auto_epsilon(inst: &Instance) -> EpsilonChoice {
    let desk = crate::rational::ln_f64(&(inst.total_size() + Rational::from_integer(1.into())))
        + inst.cardinality_bound() as f64;
    // ln ln W = 100^17 + delta with 0 < delta < (s + V) / ln(c) < 1; any
    // finite instance magnitude is infinitesimal against ln c = e^(100^17)
    assert!(desk.is_finite());
    EpsilonChoice {
        epsilon: crate::rational::rat(1, 100),
        theory_mode: true,
        practical_recommendation: crate::rational::rat(1, 11),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawGroup, RawInstance, RawItem};
    use crate::rational::rat;

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
    fn empty_instance_solves_to_nothing() {
        let i = inst(vec![], vec![]);
        let consts = ConstantSet::new(rat(1, 11)).unwrap();
        let r = gen_afptas(&i, &consts, &PricingMode::Exact).unwrap();
        assert_eq!(r.bins, 0);
        let (p, _) = afptas_structured(&i, &consts, &PricingMode::Exact).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn single_item_gets_one_bin() {
        let i = inst(vec![("1/2", 1)], vec![(1, 1)]);
        let consts = ConstantSet::new(rat(1, 11)).unwrap();
        let (p, _) = afptas_structured(&i, &consts, &PricingMode::Exact).unwrap();
        assert_eq!(p.bins.len(), 1);
        let r = gen_afptas(&i, &consts, &PricingMode::Exact).unwrap();
        assert_eq!(r.bins, 1);
    }

    #[test]
    fn matroid_forces_five_bins() {
        let items = (0..5).map(|_| ("1/10", 1)).collect();
        let i = inst(items, vec![(1, 1)]);
        let consts = ConstantSet::new(rat(1, 11)).unwrap();
        let r = gen_afptas(&i, &consts, &PricingMode::Exact).unwrap();
        assert!(r.bins >= 5);
        validate_packing(&i, &r.packing, true).unwrap();
    }

    #[test]
    fn small_mixed_instance_is_valid() {
        let i = inst(
            vec![
                ("1/2", 1),
                ("1/3", 1),
                ("1/3", 2),
                ("1/4", 2),
                ("2/5", 3),
                ("1/5", 3),
                ("1/6", 1),
                ("1/7", 2),
                ("1/8", 3),
                ("1/9", 1),
            ],
            vec![(1, 2), (2, 1), (3, 2)],
        );
        let consts = ConstantSet::new(rat(1, 11)).unwrap();
        let r = gen_afptas(&i, &consts, &PricingMode::Exact).unwrap();
        validate_packing(&i, &r.packing, true).unwrap();
        assert!(r.bins as u64 >= analytic_lower_bound(&i));
        // norm chain recorded
        assert!(r.stats.y_norm >= Rational::zero());
        assert!(r.stats.z_norm >= r.stats.y_norm);
    }

    #[test]
    fn auto_epsilon_is_constant_at_desk_scale() {
        let i = inst(vec![("1/2", 1)], vec![(1, 1)]);
        let choice = auto_epsilon(&i);
        assert_eq!(choice.epsilon, rat(1, 100));
        assert!(choice.theory_mode);
        assert_eq!(choice.practical_recommendation, rat(1, 11));
        let empty = inst(vec![], vec![]);
        assert_eq!(auto_epsilon(&empty).epsilon, rat(1, 100));
    }
}
