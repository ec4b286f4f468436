//! Command-line driver: argument parsing, suite dispatch, and report
//! persistence for the fusion, solver, mode, and geometry layers.
//!
//! Exit codes follow the usual triage: 0 when every check passed, 1 when at
//! least one check failed, 2 on configuration, parse, or I/O problems.  All
//! sampling is seeded, so identical invocations write identical report
//! bytes; wall-clock timings go to stderr only.

pub mod bundle;
pub mod instance;
pub mod sample;
pub mod suites;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use bundle::{ReportBundle, ReportFormat};
use instance::InstanceSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fusion(#[from] osva_core::fusion::FusionError),
    #[error(transparent)]
    Solver(#[from] osva_core::solver::SolverError),
    #[error(transparent)]
    Modes(#[from] osva_core::modes::ModesError),
    #[error(transparent)]
    Geom(#[from] osva_core::geom::GeomError),
}

pub(crate) fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })
}

pub(crate) fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinData {
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeomCheckKind {
    Vacuum,
    Conformal,
    Sewing,
    PrConsistency,
}

#[derive(Debug, Parser)]
#[command(
    name = "osva",
    version,
    about = "Exact and truncated checks for open-string vertex algebra data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report destination; defaults to stdout, or a file under $OSVA_OUT_DIR
    /// when that is set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Report format: human-readable text or structured JSON.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate fusion data: ring axioms, fusing-block shapes, and the
    /// diagonal-double orthogonality criterion.
    Validate {
        /// Bundled data set.
        #[arg(long, value_enum, conflicts_with = "input")]
        builtin: Option<BuiltinData>,
        /// Fusion-data file.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve the structure-constant equations at fixed multiplicity
    /// dimensions and certify every solution exactly.
    Solve {
        #[arg(long, value_enum, conflicts_with = "input")]
        builtin: Option<BuiltinData>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated multiplicity dimension per sector, e.g. 1,1,0.
        #[arg(long)]
        dims: String,
        /// Where to write the solutions file.
        #[arg(long)]
        solutions: Option<PathBuf>,
    },
    /// Re-certify a solutions file against fusion data.
    Verify {
        #[arg(long, value_enum, conflicts_with = "input")]
        builtin: Option<BuiltinData>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Solutions file produced by `solve`.
        #[arg(long)]
        solutions: PathBuf,
    },
    /// Run the axiom suite on a graded instance.
    Axioms {
        /// Instance spec: heisenberg, assoc:<table-file>, or
        /// tensor:<table-file>.
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 6)]
        cutoff: usize,
        /// Pass bound for recorded residuals.  The exact identities report
        /// residual 0, so the bound only gates the truncated associativity
        /// check; the default sits well above the truncation scale of the
        /// seeded samples at practical cutoffs.
        #[arg(long, default_value_t = 1e5)]
        tol: f64,
        /// Number of sampled argument tuples for the truncated checks.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run one geometric-layer check on a graded instance.
    Geometry {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 6)]
        cutoff: usize,
        #[arg(long, value_enum)]
        check: GeomCheckKind,
        /// Finite-difference step for the conformal check.
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_fusion(
    builtin: Option<BuiltinData>,
    input: &Option<PathBuf>,
) -> Result<osva_core::fusion::FusionData, CliError> {
    match (builtin, input) {
        (Some(BuiltinData::Ising), None) => Ok(osva_core::fusion::ising_builtin()),
        (None, Some(path)) => Ok(osva_core::fusion::load_fusion_data(&read_file(path)?)?),
        (None, None) => Err(CliError::Config(
            "pass either --builtin or --input".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn parse_dims(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad dimension entry {part:?}")))
        })
        .collect()
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("tolerance {tol} must be positive")))
    }
}

/// Run one parsed invocation and build its report bundle.
pub fn run(cli: &Cli) -> Result<ReportBundle, CliError> {
    let mut config = BTreeMap::new();
    config.insert("format".to_string(), format!("{:?}", cli.format).to_lowercase());
    match &cli.command {
        Command::Validate { builtin, input } => {
            let data = load_fusion(*builtin, input)?;
            describe_source(&mut config, "validate", *builtin, input);
            let checks = suites::validate_suite(&data);
            Ok(ReportBundle::collect("validate", config, checks))
        }
        Command::Solve { builtin, input, dims, solutions } => {
            let data = load_fusion(*builtin, input)?;
            describe_source(&mut config, "solve", *builtin, input);
            let dims = parse_dims(dims)?;
            config.insert(
                "dims".to_string(),
                dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
            );
            let (checks, solution_text) = suites::solve_suite(&data, &dims)?;
            if let Some(path) = solutions {
                write_file(path, &solution_text)?;
                config.insert("solutions".to_string(), path.display().to_string());
            }
            Ok(ReportBundle::collect("solve", config, checks))
        }
        Command::Verify { builtin, input, solutions } => {
            let data = load_fusion(*builtin, input)?;
            describe_source(&mut config, "verify", *builtin, input);
            config.insert("solutions".to_string(), solutions.display().to_string());
            let algebras = osva_core::solver::solutions_from_json(&read_file(solutions)?)?;
            let checks = suites::verify_suite(&data, &algebras)?;
            Ok(ReportBundle::collect("verify", config, checks))
        }
        Command::Axioms { instance, cutoff, tol, samples, seed } => {
            check_tol(*tol)?;
            let spec = InstanceSpec::parse(instance)?;
            let inst = instance::build_instance(&spec, *cutoff)?;
            config.insert("command".to_string(), "axioms".to_string());
            config.insert("instance".to_string(), instance.clone());
            config.insert("cutoff".to_string(), cutoff.to_string());
            config.insert("tol".to_string(), tol.to_string());
            config.insert("samples".to_string(), samples.to_string());
            config.insert("seed".to_string(), seed.to_string());
            let checks = suites::axioms_suite(&inst, *tol, *samples, *seed)?;
            Ok(ReportBundle::collect("axioms", config, checks))
        }
        Command::Geometry { instance, cutoff, check, eps, tol, seed } => {
            check_tol(*tol)?;
            let spec = InstanceSpec::parse(instance)?;
            let inst = instance::build_instance(&spec, *cutoff)?;
            config.insert("command".to_string(), "geometry".to_string());
            config.insert("instance".to_string(), instance.clone());
            config.insert("cutoff".to_string(), cutoff.to_string());
            let check_name = match check {
                GeomCheckKind::Vacuum => "vacuum",
                GeomCheckKind::Conformal => "conformal",
                GeomCheckKind::Sewing => "sewing",
                GeomCheckKind::PrConsistency => "pr-consistency",
            };
            config.insert("check".to_string(), check_name.to_string());
            config.insert("eps".to_string(), eps.to_string());
            config.insert("tol".to_string(), tol.to_string());
            config.insert("seed".to_string(), seed.to_string());
            let checks = suites::geometry_suite(&inst, *check, *eps, *tol, *seed)?;
            Ok(ReportBundle::collect("geometry", config, checks))
        }
    }
}

fn describe_source(
    config: &mut BTreeMap<String, String>,
    command: &str,
    builtin: Option<BuiltinData>,
    input: &Option<PathBuf>,
) {
    config.insert("command".to_string(), command.to_string());
    match (builtin, input) {
        (Some(b), _) => {
            config.insert("builtin".to_string(), format!("{b:?}").to_lowercase());
        }
        (_, Some(path)) => {
            config.insert("input".to_string(), path.display().to_string());
        }
        _ => {}
    }
}

/// Full dispatch: run, emit the report, translate into an exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    match run(cli) {
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
        Ok(bundle) => {
            for (report, elapsed) in bundle.reports.iter().zip(&bundle.wall_times) {
                eprintln!(
                    "timing: {} {:.1}ms",
                    report.name,
                    elapsed.as_secs_f64() * 1e3
                );
            }
            match bundle.emit(cli.format, &cli.output) {
                Err(err) => {
                    eprintln!("error: {err}");
                    2
                }
                Ok(()) => {
                    if bundle.overall_pass {
                        0
                    } else {
                        1
                    }
                }
            }
        }
    }
}
