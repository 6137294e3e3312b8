//! Solve reports and stage diagnostics.

use anyhow::Result;
use serde::Serialize;

use bpp_core::config_lp::solve_configuration_lp;
use bpp_core::constants::ConstantSet;
use bpp_core::evict::evict;
use bpp_core::instance::Instance;
use bpp_core::partition::integralize;
use bpp_core::pipeline::SolveResult;
use bpp_core::polytope::build_polytope;
use bpp_core::pricing::PricingMode;
use bpp_core::rational::format_rational;
use bpp_core::reduce::reduce;
use bpp_core::shift::shift;

#[derive(Serialize)]
pub struct SolveReport {
    pub bins: usize,
    pub lp_lower_bound: String,
    pub epsilon: String,
    pub theory_mode_epsilon: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_opt: Option<usize>,
    pub stages: StageReport,
}

#[derive(Serialize)]
pub struct StageReport {
    pub lp_objective: String,
    pub lp_iterations: usize,
    pub x_support: usize,
    pub y_norm: String,
    pub y_support: usize,
    pub z_support: usize,
    pub fractional_items: usize,
    pub matched_items: usize,
    pub categories: usize,
    pub structured_bins: usize,
    pub empty_bins_dropped: String,
    pub pivot: u32,
    pub union_items: usize,
    pub omega_items: usize,
    pub discarded_items: usize,
    pub unplaced_items: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Timings>,
}

#[derive(Serialize)]
pub struct Timings {
    pub lp: u128,
    pub rounding: u128,
    pub total: u128,
}

pub fn solve_report(
    result: &SolveResult,
    oracle: Option<usize>,
    theory_mode: bool,
    with_timings: bool,
) -> SolveReport {
    let s = &result.stats;
    SolveReport {
        bins: result.bins,
        lp_lower_bound: format_rational(&result.lp_lower_bound),
        epsilon: format_rational(&result.epsilon_used),
        theory_mode_epsilon: theory_mode,
        oracle_opt: oracle,
        stages: StageReport {
            lp_objective: format_rational(&s.lp_objective),
            lp_iterations: s.lp_iterations,
            x_support: s.x_support,
            y_norm: format_rational(&s.y_norm),
            y_support: s.y_support,
            z_support: s.z_support,
            fractional_items: s.fractional_items,
            matched_items: s.matched_items,
            categories: s.categories,
            structured_bins: s.structured_bins,
            empty_bins_dropped: s.empty_bins_dropped.to_string(),
            pivot: s.pivot,
            union_items: s.union_items,
            omega_items: s.omega_items,
            discarded_items: s.discarded_items,
            unplaced_items: s.unplaced_items,
            timings_ms: with_timings.then(|| Timings {
                lp: s.lp_time.as_millis(),
                rounding: s.rounding_time.as_millis(),
                total: s.total_time.as_millis(),
            }),
        },
    }
}

/// Re-runs the rounding chain stage by stage to print the shifting class
/// tables and the assignment-polytope LP of the integralized prototype.
pub fn dump_stage_diagnostics(
    inst: &Instance,
    consts: &ConstantSet,
    pricing: &PricingMode,
    dump_lp: bool,
    dump_classes: bool,
) -> Result<()> {
    let (reduced, _meta) = reduce(inst, consts)?;
    if reduced.is_empty() {
        eprintln!("empty instance: nothing to dump");
        return Ok(());
    }
    let lp = solve_configuration_lp(&reduced, consts.eps(), pricing)?;
    let y = evict(&reduced, &lp.prototype, consts)?;
    let shifted = shift(&reduced, &y, consts)?;
    if dump_classes {
        eprintln!("classes (group, index, first id, last id, frequency):");
        for (gid, idx, first, last, freq) in shifted.classes.table(&reduced, &y) {
            eprintln!(
                "  group {gid} class {idx}: items {first}..{last}, frequency {}",
                format_rational(&freq)
            );
        }
    }
    if dump_lp {
        let zstar = integralize(&shifted.prototype);
        let spec = build_polytope(&reduced, &zstar, consts.eps());
        eprint!("{}", spec.dump_lp());
    }
    Ok(())
}
