//! Benchmark suites: a list of generator specs crossed with solvers. Results
//! go to a deterministic CSV (stable across runs for the same suite, seed and
//! version) and a JSON report that additionally carries wall-clock times.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use bpp_core::constants::ConstantSet;
use bpp_core::gen::{generate_instance, GenSpec};
use bpp_core::greedy::greedy;
use bpp_core::oracle::{exact_opt, first_fit_decreasing, BnbLimits};
use bpp_core::pipeline::{analytic_lower_bound, gen_afptas};
use bpp_core::pricing::PricingMode;
use bpp_core::rational::{format_rational, parse_rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
pub struct Suite {
    pub specs: Vec<SuiteSpec>,
    /// "pipeline" | "ffd" | "greedy:DELTA" | "exact"
    pub solvers: Vec<String>,
    #[serde(default = "default_eps")]
    pub eps: String,
}

fn default_eps() -> String {
    "1/11".into()
}

#[derive(Debug, Deserialize)]
pub struct SuiteSpec {
    pub n: usize,
    pub groups: usize,
    #[serde(default = "one")]
    pub k_min: u64,
    #[serde(default = "three")]
    pub k_max: u64,
    pub dist: String,
    pub seed: u64,
}

fn one() -> u64 {
    1
}
fn three() -> u64 {
    3
}

#[derive(Debug, Serialize)]
struct Cell {
    spec: usize,
    seed: u64,
    n: usize,
    groups: usize,
    dist: String,
    solver: String,
    status: String,
    bins: Option<usize>,
    lower_bound: Option<String>,
    oracle_opt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u128>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    eps: &'a str,
    cells: &'a [Cell],
}

pub fn run(suite_path: PathBuf, out_prefix: PathBuf, with_oracle: bool) -> Result<()> {
    let text = std::fs::read_to_string(&suite_path)
        .with_context(|| format!("reading {}", suite_path.display()))?;
    let suite: Suite = serde_json::from_str(&text)?;
    let eps = parse_rational(&suite.eps).map_err(|e| anyhow!("{e}"))?;
    let consts = ConstantSet::new(eps)?;

    let mut cells: Vec<Cell> = Vec::new();
    for (si, spec) in suite.specs.iter().enumerate() {
        let gen_spec = GenSpec {
            n: spec.n,
            group_count: spec.groups,
            k_range: (spec.k_min, spec.k_max),
            dist: crate::parse_dist(&spec.dist)?,
            seed: spec.seed,
        };
        let inst = match generate_instance(&gen_spec) {
            Ok(i) => i,
            Err(e) => {
                for solver in &suite.solvers {
                    cells.push(Cell {
                        spec: si,
                        seed: spec.seed,
                        n: spec.n,
                        groups: spec.groups,
                        dist: spec.dist.clone(),
                        solver: solver.clone(),
                        status: format!("genfail: {e}"),
                        bins: None,
                        lower_bound: None,
                        oracle_opt: None,
                        wall_ms: None,
                    });
                }
                continue;
            }
        };
        let oracle_opt = if with_oracle {
            exact_opt(&inst, BnbLimits::default(), None).optimal()
        } else {
            None
        };
        for solver in &suite.solvers {
            let t0 = Instant::now();
            // each cell runs independently; failures are recorded, not fatal
            let outcome: Result<(usize, Option<String>)> = (|| {
                if solver == "pipeline" {
                    let r = gen_afptas(&inst, &consts, &PricingMode::Exact)?;
                    Ok((r.bins, Some(format_rational(&r.lp_lower_bound))))
                } else if solver == "ffd" {
                    Ok((first_fit_decreasing(&inst).bins.len(), None))
                } else if let Some(delta) = solver.strip_prefix("greedy:") {
                    let d = parse_rational(delta).map_err(|e| anyhow!("{e}"))?;
                    Ok((greedy(&inst, &d)?.bins.len(), None))
                } else if solver == "exact" {
                    match exact_opt(&inst, BnbLimits::default(), None).optimal() {
                        Some(opt) => Ok((opt, None)),
                        None => bail!("cap exceeded"),
                    }
                } else {
                    bail!("unknown solver `{solver}`")
                }
            })();
            let wall = t0.elapsed().as_millis();
            let cell = match outcome {
                Ok((bins, lb)) => Cell {
                    spec: si,
                    seed: spec.seed,
                    n: spec.n,
                    groups: spec.groups,
                    dist: spec.dist.clone(),
                    solver: solver.clone(),
                    status: "ok".into(),
                    bins: Some(bins),
                    lower_bound: lb.or_else(|| {
                        Some(analytic_lower_bound(&inst).to_string())
                    }),
                    oracle_opt,
                    wall_ms: Some(wall),
                },
                Err(e) => Cell {
                    spec: si,
                    seed: spec.seed,
                    n: spec.n,
                    groups: spec.groups,
                    dist: spec.dist.clone(),
                    solver: solver.clone(),
                    status: format!("fail: {e}"),
                    bins: None,
                    lower_bound: None,
                    oracle_opt,
                    wall_ms: Some(wall),
                },
            };
            cells.push(cell);
        }
    }

    // CSV is the deterministic artifact: fixed columns, no timings
    let csv_path = out_prefix.with_extension("csv");
    let mut w = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record([
        "schema", "spec", "seed", "n", "groups", "dist", "solver", "status", "bins",
        "lower_bound", "oracle_opt",
    ])?;
    for c in &cells {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            c.spec.to_string(),
            c.seed.to_string(),
            c.n.to_string(),
            c.groups.to_string(),
            c.dist.clone(),
            c.solver.clone(),
            c.status.clone(),
            c.bins.map(|b| b.to_string()).unwrap_or_default(),
            c.lower_bound.clone().unwrap_or_default(),
            c.oracle_opt.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let json_path = out_prefix.with_extension("json");
    let report = JsonReport {
        schema_version: SCHEMA_VERSION,
        eps: &suite.eps,
        cells: &cells,
    };
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", json_path.display()))?;
    eprintln!(
        "wrote {} and {} ({} cells)",
        csv_path.display(),
        json_path.display(),
        cells.len()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_report_is_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let suite_path = dir.path().join("suite.json");
        std::fs::write(
            &suite_path,
            r#"{
                "specs": [
                    {"n": 8, "groups": 2, "dist": "uniform:32", "seed": 1},
                    {"n": 10, "groups": 3, "k_min": 1, "k_max": 2, "dist": "clustered:3", "seed": 2}
                ],
                "solvers": ["pipeline", "ffd", "greedy:1/10", "exact"],
                "eps": "1/11"
            }"#,
        )
        .unwrap();
        let out1 = dir.path().join("run1");
        let out2 = dir.path().join("run2");
        run(suite_path.clone(), out1.clone(), true).unwrap();
        run(suite_path, out2.clone(), true).unwrap();
        let csv1 = std::fs::read(out1.with_extension("csv")).unwrap();
        let csv2 = std::fs::read(out2.with_extension("csv")).unwrap();
        assert!(!csv1.is_empty());
        assert_eq!(csv1, csv2);
        // greedy fails on instances with large items; failures are recorded
        let text = String::from_utf8(csv1).unwrap();
        assert!(text.lines().count() >= 9);
        assert!(text.contains("pipeline"));
    }

    #[test]
    fn empty_suite_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let suite_path = dir.path().join("suite.json");
        std::fs::write(
            &suite_path,
            r#"{"specs": [], "solvers": ["ffd"], "eps": "1/11"}"#,
        )
        .unwrap();
        let out = dir.path().join("empty");
        run(suite_path, out.clone(), false).unwrap();
        let text = std::fs::read_to_string(out.with_extension("csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("schema,"));
    }
}
