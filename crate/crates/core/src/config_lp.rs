//! Configuration-LP solver: column generation on a covering master with the
//! configuration-maximization pricing oracle, then normalization to exact
//! per-item coverage.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::config::Configuration;
use crate::instance::{Instance, ItemId};
use crate::pricing::{price_with_pool, PricedConfig, PricingMode};
use crate::prototype::Prototype;
use crate::rational::Rational;
use crate::simplex::{AdaptiveSimplex, LinearProgram, LpStatus, Relation};

#[derive(Debug, Error)]
pub enum ConfigLpError {
    #[error("master LP did not solve to optimality: {0:?}")]
    MasterFailed(LpStatus),
    #[error("column generation did not converge within {0} iterations")]
    IterationCap(usize),
    #[error("prototype under-covers item {0}")]
    UnderCovered(ItemId),
    #[error("pricing returned a column already in the master")]
    DuplicateColumn,
}

#[derive(Debug, Clone)]
pub struct ConfigLpSolution {
    /// Coverage-normalized prototype: every item is covered exactly once.
    pub prototype: Prototype,
    /// Master objective; equals the prototype norm.
    pub objective: Rational,
    pub iterations: usize,
    pub columns: usize,
}

/// Solves the configuration LP to factor (1 + eps). Exact pricing closes the
/// gap entirely; FPTAS pricing with error eps/2 still lands within (1 + eps).
pub fn solve_configuration_lp(
    inst: &Instance,
    eps: &Rational,
    mode: &PricingMode,
) -> Result<ConfigLpSolution, ConfigLpError> {
    if inst.is_empty() {
        return Ok(ConfigLpSolution {
            prototype: Prototype::new(),
            objective: Rational::zero(),
            iterations: 0,
            columns: 0,
        });
    }

    let pricing_mode = match mode {
        PricingMode::Exact => PricingMode::Exact,
        PricingMode::Fptas { .. } => PricingMode::Fptas {
            eps: eps / Rational::from_integer(2.into()),
        },
    };

    let n = inst.n();
    // seed: singletons keep the master feasible, first-fit-decreasing bins
    // start it near a good integral solution
    let mut columns: Vec<Configuration> = inst
        .item_ids()
        .map(Configuration::singleton)
        .collect();
    for bin in crate::oracle::first_fit_decreasing(inst).bins {
        if bin.len() > 1 && !columns.contains(&bin) {
            columns.push(bin);
        }
    }

    let mut lp = LinearProgram::minimize(columns.len(), vec![Rational::one(); columns.len()]);
    for item in inst.item_ids() {
        let coeffs: Vec<(usize, Rational)> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(item))
            .map(|(j, _)| (j, Rational::one()))
            .collect();
        lp.push(coeffs, Relation::Ge, Rational::one());
    }
    let mut master = AdaptiveSimplex::new(&lp);
    let status = master.solve();
    if status != LpStatus::Optimal {
        return Err(ConfigLpError::MasterFailed(status));
    }

    let iteration_cap = 50 * n + 1000;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > iteration_cap {
            return Err(ConfigLpError::IterationCap(iteration_cap));
        }
        let duals = master.duals();
        debug_assert!(duals.iter().all(|d| !d.is_negative()));
        let outcome = price_with_pool(inst, &duals, &pricing_mode);
        if outcome.best.value <= Rational::one() {
            break;
        }
        let mut batch = vec![outcome.best];
        batch.extend(outcome.pool);
        let mut added = false;
        for PricedConfig { config, value } in batch {
            if value <= Rational::one() {
                continue;
            }
            if columns.contains(&config) {
                if added {
                    continue;
                }
                return Err(ConfigLpError::DuplicateColumn);
            }
            let coeffs: Vec<(usize, Rational)> = config
                .iter()
                .map(|item| (item.idx(), Rational::one()))
                .collect();
            master
                .add_column(&coeffs, Rational::one())
                .expect("master rows never dropped");
            columns.push(config);
            added = true;
        }
        let status = master.reoptimize();
        if status != LpStatus::Optimal {
            return Err(ConfigLpError::MasterFailed(status));
        }
    }

    let objective = master.objective_value();
    let values = master.values();
    let mut prototype = Prototype::new();
    for (config, value) in columns.into_iter().zip(values.into_iter()) {
        if value.is_positive() {
            debug_assert!(inst.is_configuration(&config));
            prototype.add(config, value);
        }
    }
    debug_assert_eq!(prototype.norm(), objective);

    let prototype = normalize_to_equality(inst, prototype)?;
    debug_assert_eq!(prototype.norm(), objective);
    Ok(ConfigLpSolution {
        columns: prototype.support_size(),
        prototype,
        objective,
        iterations,
    })
}

/// Rewrites a covering solution (coverage >= 1 for every item) into one with
/// exact coverage 1, preserving the norm: over-coverage of an item moves from
/// configurations containing it to the same configurations with the item
/// removed (configurations are downward closed).
pub fn normalize_to_equality(
    inst: &Instance,
    mut proto: Prototype,
) -> Result<Prototype, ConfigLpError> {
    for item in inst.item_ids() {
        let cov = proto.frequency(item);
        if cov < Rational::one() {
            return Err(ConfigLpError::UnderCovered(item));
        }
        let mut excess = cov - Rational::one();
        if excess.is_zero() {
            continue;
        }
        // drain smaller configurations first, keeping larger columns intact
        let mut holders: Vec<(Configuration, Rational)> = proto
            .iter()
            .filter(|(c, _)| c.contains(item))
            .map(|(c, v)| (c.clone(), v.clone()))
            .collect();
        holders.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then(a.cmp(b)));
        for (config, value) in holders {
            if excess.is_zero() {
                break;
            }
            let delta = value.min(excess.clone());
            proto.add(config.clone(), -delta.clone());
            proto.add(config.without(item), delta.clone());
            excess -= delta;
        }
        debug_assert!(excess.is_zero());
    }
    Ok(proto)
}
