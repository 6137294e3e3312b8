//! Eviction: shrink every support configuration to a bounded slot set via
//! relaxation vectors, preserving feasibility of the assignment polytope.
//!
//! For a configuration C, the small items are scanned in non-increasing size
//! order until the remaining ones all fit the residual capacity; the scanned
//! prefix is kept as slots and everything after it is evicted. When the
//! prefix hits the cap `alpha`, the weight is spread over copies of the slot
//! set that each drop one relatively large prefix item.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::config::Configuration;
use crate::constants::{Cap, ConstantSet};
use crate::instance::{Instance, ItemId};
use crate::polytope::build_polytope;
use crate::prototype::Prototype;
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub source: Configuration,
    /// R(C): the items kept as slots.
    pub slots: Configuration,
    /// U_C: the kept prefix of small items.
    pub prefix: Vec<ItemId>,
    /// Prefix items of relatively large size (at least (1 - s(R)) / eps).
    pub large_prefix: Vec<ItemId>,
    pub vector: Vec<(Configuration, Rational)>,
}

impl Relaxation {
    pub fn norm(&self) -> Rational {
        self.vector
            .iter()
            .fold(Rational::zero(), |a, (_, v)| a + v)
    }
}

#[derive(Debug, Error)]
pub enum EvictError {
    #[error("input prototype covers item {item} with {coverage}, want exactly 1")]
    BadCoverage { item: ItemId, coverage: String },
    #[error("prefix hit alpha but only {large} relatively large items (need {need}); configuration {config}")]
    LargePrefixTooSmall {
        config: Configuration,
        large: usize,
        need: String,
    },
    #[error("relaxation of {config} violates its contract: {what}")]
    RelaxationContract { config: Configuration, what: String },
    #[error("evicted prototype violates its contract: {0}")]
    OutputContract(String),
}

pub fn compute_relaxation(
    inst: &Instance,
    config: &Configuration,
    consts: &ConstantSet,
) -> Result<Relaxation, EvictError> {
    let eps = consts.eps();
    let large_threshold = eps * eps;
    let kept_large: Vec<ItemId> = config
        .iter()
        .filter(|&i| *inst.size(i) >= large_threshold)
        .collect();
    // ascending ids = non-increasing sizes
    let small: Vec<ItemId> = config
        .iter()
        .filter(|&i| *inst.size(i) < large_threshold)
        .collect();
    let r = small.len();

    let mut prefix_size = inst.size_of(&kept_large);
    let mut h = r; // scanning everything always satisfies the fit condition
    for taken in 0..r {
        let next = small[taken];
        let threshold = (eps * eps).min(eps * (Rational::one() - &prefix_size));
        if *inst.size(next) <= threshold {
            h = taken;
            break;
        }
        prefix_size += inst.size(next);
    }
    let capped = match consts.alpha {
        Cap::Finite(a) => h as u64 >= a,
        Cap::Unbounded => false,
    };
    if capped {
        h = consts.alpha.finite().expect("finite alpha") as usize;
    }

    let prefix: Vec<ItemId> = small[..h].to_vec();
    let mut slot_items = kept_large;
    slot_items.extend_from_slice(&prefix);
    let slots = Configuration::new(slot_items);
    let slots_size = slots.size(inst);

    let large_cut = (Rational::one() - &slots_size) / eps;
    let large_prefix: Vec<ItemId> = prefix
        .iter()
        .copied()
        .filter(|&i| *inst.size(i) >= large_cut)
        .collect();

    let at_alpha = consts.alpha == Cap::Finite(h as u64) && h > 0;
    let vector: Vec<(Configuration, Rational)> = if at_alpha {
        if consts.overrides.alpha.is_none() {
            // admissible-mode guarantee on the large prefix
            let need = consts.eps_pow_neg(4);
            let ok = match need {
                Cap::Finite(n) => large_prefix.len() as u64 >= n,
                Cap::Unbounded => false,
            };
            if !ok {
                return Err(EvictError::LargePrefixTooSmall {
                    config: config.clone(),
                    large: large_prefix.len(),
                    need: format!("{need}"),
                });
            }
        } else if large_prefix.len() < 2 {
            // the overridden branch still needs two items to split weight over
            return Err(EvictError::LargePrefixTooSmall {
                config: config.clone(),
                large: large_prefix.len(),
                need: "2".into(),
            });
        }
        let share = Rational::one()
            / Rational::from_integer((large_prefix.len() as i64 - 1).into());
        large_prefix
            .iter()
            .map(|&drop| (slots.without(drop), share.clone()))
            .collect()
    } else {
        vec![(slots.clone(), Rational::one())]
    };

    let relaxation = Relaxation {
        source: config.clone(),
        slots,
        prefix,
        large_prefix,
        vector,
    };
    check_relaxation(inst, consts, &relaxation)?;
    Ok(relaxation)
}

/// Per-relaxation contract: bounded norm, evicted items fit every target
/// configuration, and cardinality headroom is preserved.
fn check_relaxation(
    inst: &Instance,
    consts: &ConstantSet,
    rx: &Relaxation,
) -> Result<(), EvictError> {
    let eps = consts.eps();
    let fail = |what: String| EvictError::RelaxationContract {
        config: rx.source.clone(),
        what,
    };
    // the 1 + 2 eps^4 bound needs the full large-prefix guarantee, which an
    // overridden alpha deliberately withholds; the structural norm
    // |L_C| / (|L_C| - 1) still holds by construction
    if consts.overrides.alpha.is_none() {
        let eps4 = consts.eps_pow(4);
        if rx.norm() > Rational::one() + Rational::from_integer(2.into()) * eps4 {
            return Err(fail(format!("norm {} exceeds 1 + 2 eps^4", rx.norm())));
        }
    }
    let evicted: Vec<ItemId> = rx
        .source
        .iter()
        .filter(|i| !rx.slots.contains(*i))
        .collect();
    let evicted_size = inst.size_of(&evicted);
    for (target, _) in &rx.vector {
        let target_size = target.size(inst);
        if evicted_size > Rational::one() - &target_size {
            return Err(fail("evicted size exceeds residual capacity".into()));
        }
        let threshold = (eps * eps).min(eps * (Rational::one() - &target_size));
        for &item in &evicted {
            if *inst.size(item) > threshold {
                return Err(fail(format!("evicted item {item} does not fit {target}")));
            }
        }
        let small_part: Rational = target
            .iter()
            .filter(|&i| !inst.is_large(i, eps))
            .fold(Rational::zero(), |a, i| a + inst.size(i));
        if small_part > *eps {
            return Err(fail(format!("small part of {target} exceeds eps")));
        }
        for (g, group) in inst.groups().iter().enumerate() {
            let evicted_in_g = evicted.iter().filter(|&&i| inst.group_of(i) == g).count();
            let target_in_g = target.group_count(inst, g);
            if evicted_in_g as u64 + target_in_g as u64 > group.cap {
                return Err(fail(format!(
                    "group {} headroom violated on {target}",
                    group.external_id
                )));
            }
        }
    }
    Ok(())
}

/// Applies eviction to a coverage-1 prototype and verifies the stage contract:
/// norm growth at most (1 + eps), item frequency at most 2, bounded
/// configurations, and a nonempty assignment polytope.
pub fn evict(
    inst: &Instance,
    proto: &Prototype,
    consts: &ConstantSet,
) -> Result<Prototype, EvictError> {
    for (item, cov) in proto.coverage(inst.n()).into_iter().enumerate() {
        if cov != Rational::one() {
            return Err(EvictError::BadCoverage {
                item: ItemId::from_idx(item),
                coverage: crate::rational::format_rational(&cov),
            });
        }
    }

    let mut result = Prototype::new();
    for (config, weight) in proto.iter() {
        let rx = compute_relaxation(inst, config, consts)?;
        for (target, share) in rx.vector {
            result.add(target, weight * &share);
        }
    }

    let eps = consts.eps();
    if consts.overrides.alpha.is_none() {
        let bound = (Rational::one() + eps) * proto.norm();
        if result.norm() > bound {
            return Err(EvictError::OutputContract(format!(
                "norm {} exceeds (1+eps) * input norm {bound}",
                result.norm()
            )));
        }
    }
    let two = Rational::from_integer(2.into());
    for (item, freq) in frequencies(inst.n(), &result).into_iter().enumerate() {
        if freq > two {
            return Err(EvictError::OutputContract(format!(
                "frequency of item {} is {freq} > 2",
                ItemId::from_idx(item)
            )));
        }
    }
    for config in result.support() {
        if !consts.config_size_cap.admits(config.len()) {
            return Err(EvictError::OutputContract(format!(
                "configuration {config} exceeds the size budget"
            )));
        }
    }
    if !inst.is_empty() {
        let spec = build_polytope(inst, &result, eps);
        if !spec.is_feasible() {
            return Err(EvictError::OutputContract(
                "assignment polytope of the evicted prototype is empty".into(),
            ));
        }
    }
    Ok(result)
}

fn frequencies(n: usize, proto: &Prototype) -> Vec<Rational> {
    let mut f = vec![Rational::zero(); n];
    for (c, v) in proto.iter() {
        for item in c.iter() {
            f[item.idx()] += v;
        }
    }
    f
}
