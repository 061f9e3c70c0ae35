use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use sgeo_cli::checks::dixmier_oracle;
use sgeo_cli::{list_targets, parse_geometry, run, write_report, CliError, RunConfig};
use sgeo_core::dixmier::dixmier_estimate;
use sgeo_core::metric::connes_distance;
use sgeo_core::MatrixOperator;

#[derive(Parser)]
#[command(name = "sgeo", version, about = "Numerical checks for truncated spectral triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here ("-" for stdout).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Seed for randomized fixtures and corruptions (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent checks (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a TOML config.
    Check { config: PathBuf },
    /// Lower bound on the Connes distance between two points.
    Distance {
        /// e.g. `circle:128` or `torus,p=2,lambda=16`
        #[arg(long)]
        geometry: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 40)]
        budget: usize,
    },
    /// Dixmier trace of the identity against |D|^-p.
    Dixmier {
        #[arg(long)]
        geometry: String,
        /// Dimension p; sets p for the torus and must match otherwise.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Geometries, checks, tolerances and corruption modes.
    List,
}

fn point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad coordinate `{s}` in `{text}`"))))
        .collect()
}

fn emit(value: &str, report: Option<&PathBuf>) -> Result<(), CliError> {
    match report {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::write(p, value).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })
        }
        _ => {
            // a closed pipe (`sgeo ... | head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{value}");
            Ok(())
        }
    }
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::List => {
            let _ = write!(std::io::stdout().lock(), "{}", list_targets());
            Ok(0)
        }
        Command::Check { config } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let out = cli.report.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
            let report = run(&cfg, cli.jobs)?;
            for c in &report.checks {
                let note = c.notes.first().map(|n| format!("  ({n})")).unwrap_or_default();
                eprintln!("{:<20} {}{}", c.name, c.verdict, note);
            }
            let s = &report.summary;
            eprintln!("{} checks: {} pass, {} fail, {} inconclusive", s.total, s.pass, s.fail, s.inconclusive);
            match out {
                Some(p) if p.as_os_str() == "-" => {
                    let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
                }
                Some(p) => write_report(&report, &p)?,
                None => {}
            }
            Ok(report.exit_code())
        }
        Command::Distance { geometry, from, to, budget } => {
            let spec = parse_geometry(&geometry)?;
            let (x, y) = (point(&from)?, point(&to)?);
            if x.len() != spec.p || y.len() != spec.p {
                return Err(CliError::Config(format!("points need {} coordinates", spec.p)));
            }
            let g = spec.build(cli.seed.unwrap_or(0))?;
            let res = connes_distance(&x, &y, &g.triple, budget)?;
            let geodesic = g.triple.grid_distance(&x, &y);
            let value = json!({
                "schema": sgeo_cli::SCHEMA,
                "geometry": spec,
                "from": x,
                "to": y,
                "geodesic": geodesic,
                "result": res,
            });
            emit(&serde_json::to_string_pretty(&value).unwrap(), cli.report.as_ref())?;
            Ok(0)
        }
        Command::Dixmier { geometry, p } => {
            let mut spec = parse_geometry(&geometry)?;
            if let Some(p) = p {
                if spec.kind == sgeo_core::geometries::GeometryKind::Torus {
                    spec.p = p;
                    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
                } else if p != spec.p {
                    return Err(CliError::Config(format!("{:?} has dimension {}, not {p}", spec.kind, spec.p)));
                }
            }
            let g = spec.build(cli.seed.unwrap_or(0))?;
            let t = &g.triple;
            let est = dixmier_estimate(&MatrixOperator::identity(t.hilbert_dim()), t)?;
            let (oracle, source) = dixmier_oracle(&spec, t);
            let value = json!({
                "schema": sgeo_cli::SCHEMA,
                "geometry": spec,
                "p": spec.p,
                "estimate": est,
                "oracle": oracle,
                "oracle_source": source,
            });
            emit(&serde_json::to_string_pretty(&value).unwrap(), cli.report.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sgeo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
