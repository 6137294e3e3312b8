//! Command-line front end: solve, exact oracle, baselines, instance
//! generation, benchmarking and packing validation.

mod bench;
mod report;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bpp_core::config::validate_packing;
use bpp_core::constants::{ConstantSet, Overrides};
use bpp_core::gen::{generate_instance, GenSpec, SizeDistribution};
use bpp_core::greedy::greedy;
use bpp_core::instance::ValidatedInstance;
use bpp_core::json;
use bpp_core::oracle::{exact_opt, first_fit_decreasing, BnbLimits};
use bpp_core::pipeline::{auto_epsilon, gen_afptas};
use bpp_core::pricing::PricingMode;
use bpp_core::rational::{parse_rational, Rational};

#[derive(Parser)]
#[command(name = "bpp", about = "Bin packing with a partition matroid constraint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full approximation pipeline on an instance.
    Solve(SolveArgs),
    /// Exact optimum by branch and bound (small instances).
    Exact(ExactArgs),
    /// First-fit-decreasing baseline.
    Ffd(InputArgs),
    /// Greedy packer for all-small instances.
    Greedy(GreedyArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run a benchmark suite and write CSV/JSON reports.
    Bench(BenchArgs),
    /// Validate a packing file against an instance.
    Check(CheckArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance JSON file.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Accuracy parameter as a fraction, e.g. 1/11.
    #[arg(long, default_value = "1/11")]
    eps: String,
    /// Derive eps from the instance magnitude instead of --eps.
    #[arg(long)]
    auto_eps: bool,
    /// Pricing mode for the configuration LP.
    #[arg(long, default_value = "exact", value_parser = ["exact", "fptas"])]
    pricing: String,
    /// Admit eps outside the usual range and enable overrides.
    #[arg(long)]
    test_mode: bool,
    /// Constant override, repeatable: key=value with keys alpha, upsilon,
    /// eta, class-threshold, config-size-cap, support-cap, category-cap,
    /// structured-cap, kappa, beta.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also compute the exact optimum and report the gap.
    #[arg(long)]
    oracle: bool,
    /// Print per-stage diagnostics.
    #[arg(long)]
    dump_stages: bool,
    /// Print the assignment-polytope LP as an inequality listing.
    #[arg(long)]
    dump_lp: bool,
    /// Print the class tables built by the shifting stage.
    #[arg(long)]
    dump_classes: bool,
    /// Write the packing JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 20_000_000)]
    max_nodes: u64,
    #[arg(long, default_value_t = 60)]
    time_limit_s: u64,
}

#[derive(Args)]
struct GreedyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Size bound of the items, a fraction in (0, 1/2).
    #[arg(long, default_value = "1/10")]
    delta: String,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    groups: usize,
    #[arg(long, default_value_t = 1)]
    k_min: u64,
    #[arg(long, default_value_t = 3)]
    k_max: u64,
    /// uniform:DENOM | clustered:T | heavydust:DUST_DENOM,HEAVY_DENOM,PERCENT
    #[arg(long, default_value = "uniform:64")]
    dist: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite description JSON.
    #[arg(long)]
    suite: PathBuf,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    out_prefix: PathBuf,
    /// Add exact-optimum columns (slow; small instances only).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    packing: PathBuf,
    /// Also require every item to be covered.
    #[arg(long)]
    complete: bool,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => solve(args),
        Command::Exact(args) => exact(args),
        Command::Ffd(args) => ffd(args),
        Command::Greedy(args) => run_greedy(args),
        Command::Gen(args) => gen(args),
        Command::Bench(args) => bench::run(args.suite, args.out_prefix, args.oracle),
        Command::Check(args) => check(args),
    }
}

fn load_instance(path: &PathBuf) -> Result<ValidatedInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    json::instance_from_json(&text).map_err(|e| anyhow!("{e}"))
}

pub(crate) fn parse_overrides(pairs: &[String]) -> Result<Overrides> {
    let mut ov = Overrides::default();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{pair}` is not KEY=VALUE"))?;
        let int = || -> Result<u64> {
            value
                .parse()
                .map_err(|_| anyhow!("override `{key}` needs an integer, got `{value}`"))
        };
        match key {
            "alpha" => ov.alpha = Some(int()?),
            "upsilon" => ov.upsilon = Some(int()? as u32),
            "eta" => ov.eta = Some(int()?),
            "class-threshold" => {
                ov.class_threshold = Some(parse_rational(value).map_err(|e| anyhow!("{e}"))?)
            }
            "config-size-cap" => ov.config_size_cap = Some(int()?),
            "support-cap" => ov.support_cap = Some(int()?),
            "category-cap" => ov.category_cap = Some(int()?),
            "structured-cap" => ov.structured_cap = Some(int()?),
            "kappa" => ov.kappa = Some(int()?),
            "beta" => ov.beta = Some(int()?),
            _ => bail!("unknown override key `{key}`"),
        }
    }
    Ok(ov)
}

pub(crate) fn parse_dist(text: &str) -> Result<SizeDistribution> {
    let (kind, params) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "uniform" => Ok(SizeDistribution::UniformGrid {
            denom: params.parse().context("uniform:DENOM")?,
        }),
        "clustered" => Ok(SizeDistribution::Clustered {
            t: params.parse().context("clustered:T")?,
        }),
        "heavydust" => {
            let parts: Vec<&str> = params.split(',').collect();
            if parts.len() != 3 {
                bail!("heavydust:DUST_DENOM,HEAVY_DENOM,PERCENT");
            }
            Ok(SizeDistribution::HeavyDust {
                dust_denom: parts[0].parse()?,
                heavy_denom: parts[1].parse()?,
                dust_percent: parts[2].parse()?,
            })
        }
        other => bail!("unknown distribution `{other}`"),
    }
}

fn build_constants(
    eps_text: &str,
    auto: bool,
    test_mode: bool,
    overrides: &[String],
    v: &ValidatedInstance,
) -> Result<(ConstantSet, bool)> {
    let ov = parse_overrides(overrides)?;
    let (eps, theory) = if auto {
        let choice = auto_epsilon(&v.instance);
        eprintln!(
            "auto eps: theory formula gives {} (practical recommendation: {})",
            bpp_core::rational::format_rational(&choice.epsilon),
            bpp_core::rational::format_rational(&choice.practical_recommendation),
        );
        (choice.epsilon, choice.theory_mode)
    } else {
        (parse_rational(eps_text).map_err(|e| anyhow!("{e}"))?, false)
    };
    let consts = if test_mode {
        ConstantSet::new_test(eps, ov)?
    } else {
        if ov.any_set() {
            bail!("--override requires --test-mode");
        }
        ConstantSet::new(eps)?
    };
    Ok((consts, theory))
}

fn solve(args: SolveArgs) -> Result<()> {
    let v = load_instance(&args.input.input)?;
    let (consts, theory_mode) = build_constants(
        &args.eps,
        args.auto_eps,
        args.test_mode,
        &args.overrides,
        &v,
    )?;
    let pricing = match args.pricing.as_str() {
        "exact" => PricingMode::Exact,
        _ => PricingMode::Fptas {
            eps: consts.eps().clone(),
        },
    };

    if args.dump_lp || args.dump_classes {
        report::dump_stage_diagnostics(&v.instance, &consts, &pricing, args.dump_lp, args.dump_classes)?;
    }

    let result = gen_afptas(&v.instance, &consts, &pricing)?;
    let oracle = if args.oracle {
        exact_opt(&v.instance, BnbLimits::default(), Some(&result.lp_lower_bound)).optimal()
    } else {
        None
    };
    let doc = report::solve_report(&result, oracle, theory_mode, args.dump_stages);
    println!("{}", serde_json::to_string_pretty(&doc)?);

    if let Some(out) = args.out {
        std::fs::write(&out, json::packing_to_json(&v, &result.packing))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn exact(args: ExactArgs) -> Result<()> {
    let v = load_instance(&args.input.input)?;
    let limits = BnbLimits {
        max_nodes: args.max_nodes,
        time_limit: Some(std::time::Duration::from_secs(args.time_limit_s)),
    };
    match exact_opt(&v.instance, limits, None) {
        bpp_core::oracle::ExactResult::Solved { opt, packing } => {
            println!("{}", json::packing_to_json(&v, &packing));
            eprintln!("optimal: {opt} bins");
        }
        bpp_core::oracle::ExactResult::CapExceeded { best_known, packing } => {
            println!("{}", json::packing_to_json(&v, &packing));
            eprintln!("cap exceeded; best known: {best_known} bins (not proven optimal)");
        }
    }
    Ok(())
}

fn ffd(args: InputArgs) -> Result<()> {
    let v = load_instance(&args.input)?;
    let packing = first_fit_decreasing(&v.instance);
    println!("{}", json::packing_to_json(&v, &packing));
    eprintln!("first-fit decreasing: {} bins", packing.bins.len());
    Ok(())
}

fn run_greedy(args: GreedyArgs) -> Result<()> {
    let v = load_instance(&args.input.input)?;
    let delta: Rational = parse_rational(&args.delta).map_err(|e| anyhow!("{e}"))?;
    let packing = greedy(&v.instance, &delta)?;
    println!("{}", json::packing_to_json(&v, &packing));
    eprintln!("greedy: {} bins", packing.bins.len());
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = GenSpec {
        n: args.n,
        group_count: args.groups,
        k_range: (args.k_min, args.k_max),
        dist: parse_dist(&args.dist)?,
        seed: args.seed,
    };
    let inst = generate_instance(&spec)?;
    let v = ValidatedInstance {
        original_item_ids: (1..=inst.n() as i64).collect(),
        instance: inst,
    };
    let text = json::instance_to_json(&v);
    match args.out {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn check(args: CheckArgs) -> Result<()> {
    let v = load_instance(&args.instance)?;
    let text = std::fs::read_to_string(&args.packing)
        .with_context(|| format!("reading {}", args.packing.display()))?;
    let packing = json::packing_from_json(&v, &text).map_err(|e| anyhow!("{e}"))?;
    match validate_packing(&v.instance, &packing, args.complete) {
        Ok(()) => {
            println!("ok: {} bins", packing.bins.len());
            Ok(())
        }
        Err(e) => bail!("invalid packing: {e}"),
    }
}
