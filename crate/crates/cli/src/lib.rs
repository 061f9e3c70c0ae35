//! Declarative verification runner: a TOML config names a geometry and a
//! list of checks; the run produces a deterministic JSON report.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sgeo_core::geometries::Corruption;
use sgeo_core::{CheckReport, SgeoError};

pub use checks::{CheckDef, CATALOG, TOLERANCES};
pub use config::{parse_geometry, CheckRequest, RunConfig};
pub use error::CliError;
pub use report::{RunReport, SCHEMA};

/// Runs one check, turning errors and panics into verdicts.
pub fn execute(def: &CheckDef, ctx: &checks::Ctx, params: &toml::Table) -> CheckReport {
    let outcome = catch_unwind(AssertUnwindSafe(|| (def.run)(ctx, &checks::Params(params))));
    let mut r = match outcome {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => {
            let mut r = CheckReport::new(def.name);
            match e {
                SgeoError::Unsupported(_) | SgeoError::BandExhausted { .. } => r.inconclusive(e.to_string()),
                _ => r.fail(e.to_string()),
            }
            r
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            let mut r = CheckReport::new(def.name);
            r.fail(format!("panicked: {msg}"));
            r
        }
    };
    r.name = def.name.to_string();
    r
}

/// Validates `config`, builds the geometry and runs every requested check
/// on at most `jobs` threads (0 = all cores).
pub fn run(config: &RunConfig, jobs: usize) -> Result<RunReport, CliError> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let jobs_used = pool.current_num_threads();
    let mut timing = std::collections::BTreeMap::new();
    let (geometry, pieces, checks) = match config.geometry.build(config.seed) {
        Err(e) => {
            // a corruption the constructor refuses is a failed check, not a
            // bad config; one that does not apply to this geometry is neither
            let mut r = CheckReport::new("construction");
            match e {
                SgeoError::Unsupported(_) => r.inconclusive(e.to_string()),
                _ => r.fail(e.to_string()),
            }
            let mut reports = vec![r];
            for req in &config.checks {
                let mut skipped = CheckReport::new(req.name.clone());
                skipped.inconclusive("not run: the geometry failed to build");
                reports.push(skipped);
            }
            (None, None, reports)
        }
        Ok(g) => {
            let ctx = checks::Ctx { spec: &config.geometry, geometry: &g, config, seed: config.seed };
            let results: Vec<(CheckReport, f64)> = pool.install(|| {
                config
                    .checks
                    .par_iter()
                    .map(|req| {
                        let def = checks::find(&req.name).expect("validated");
                        let t0 = Instant::now();
                        let r = execute(def, &ctx, &req.params);
                        (r, t0.elapsed().as_secs_f64())
                    })
                    .collect()
            });
            let mut reports = Vec::new();
            for (r, secs) in results {
                timing.insert(r.name.clone(), secs);
                reports.push(r);
            }
            (Some(report::geometry_info(&g.triple)), Some(report::two_pieces(&g.triple)), reports)
        }
    };
    let env = report::Environment {
        version: env!("CARGO_PKG_VERSION").to_string(),
        jobs: jobs_used,
        timing,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunReport::assemble(config.clone(), geometry, pieces, checks, env))
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, report.to_json()).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

/// Geometries, checks (with parameters), default tolerances and
/// corruption modes, one item per line.
pub fn list_targets() -> String {
    let mut out = String::new();
    out.push_str("geometries:\n");
    for (name, about) in [
        ("circle", "p = 1, period 2π, D = -i d/dθ; generators u, u*, cos, sin"),
        ("torus", "p = 2 or 3, period 1, Pauli spinors (variant = \"signature\" uses forms, p = 2); generators u1, u1*, cos1, sin1, ..."),
        ("interval", "[0, 1] with a boundary condition; generator x (expected to fail regularity and the maximum principle)"),
        ("product", "p = 2 torus times a finite ladder D' (key `ladder`)"),
    ] {
        let _ = writeln!(out, "  {name:<20} {about}");
    }
    out.push_str("checks:\n");
    for c in CATALOG {
        let _ = writeln!(out, "  {:<20} {}", c.name, c.about);
        for p in c.params {
            let _ = writeln!(out, "  {:<20}   {} : {}", "", p.name, p.about);
        }
    }
    out.push_str("tolerances:\n");
    for (name, v, about) in TOLERANCES {
        let _ = writeln!(out, "  {name:<20} {v:<8e} {about}");
    }
    out.push_str("corruptions:\n");
    for c in Corruption::ALL {
        let _ = writeln!(out, "  {:<20} fails: {}", c.name(), c.expected_failures().join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgeo_core::{GeometrySpec, Verdict};

    fn boom(_: &checks::Ctx, _: &checks::Params) -> sgeo_core::Result<CheckReport> {
        panic!("deliberate")
    }

    #[test]
    fn panics_become_failures() {
        let def = CheckDef { name: "boom", about: "", params: &[], run: boom };
        let cfg = RunConfig::new(GeometrySpec::circle(8));
        let g = cfg.geometry.build(0).unwrap();
        let ctx = checks::Ctx { spec: &cfg.geometry, geometry: &g, config: &cfg, seed: 0 };
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let r = execute(&def, &ctx, &toml::Table::new());
        std::panic::set_hook(prev);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes[0].contains("deliberate"));
    }

    #[test]
    fn list_mentions_targets() {
        let text = list_targets();
        for needle in ["circle", "torus", "heat_vs_dixmier", "dense_D", "dimension_slope"] {
            assert!(text.contains(needle), "{needle}");
        }
    }

    #[test]
    fn empty_plan_passes() {
        let r = run(&RunConfig::new(GeometrySpec::circle(16)), 1).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert!(r.two_pieces.is_some());
    }
}
