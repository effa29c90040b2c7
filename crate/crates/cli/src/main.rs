//! Batch driver: problem-file ingestion, verification pipelines, and
//! machine-readable JSON reports.
//!
//! Exit codes: 0 pass, 2 identity failure, 3 resource cap, 4 spec error.

mod problem;

use clap::{Parser, Subcommand};
use partial_toric::error::Error;
use problem::{Overrides, Report};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "partial-toric", about = "partial toric exponential sums and their p-adic L-function machinery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// problem file (JSON)
    #[arg(global = true, long, short = 'f')]
    problem: Option<PathBuf>,
    /// write the JSON report here instead of stdout
    #[arg(global = true, long)]
    json: Option<PathBuf>,
    /// absolute p-adic precision M
    #[arg(global = true, long)]
    precision: Option<u32>,
    /// weight cut of the operator basis
    #[arg(global = true, long)]
    wcut: Option<i64>,
    /// largest k for sums and traces
    #[arg(global = true, long)]
    kmax: Option<u32>,
    /// Lambda-degree cut for the hypergeometric series
    #[arg(global = true, long)]
    deg: Option<u32>,
    /// twist exponents b (default: all units mod lcm(d))
    #[arg(global = true, long)]
    b: Vec<i64>,
    /// enumeration cap
    #[arg(global = true, long)]
    cap: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// print G, the permutation P, char polys, and fixed-point tables
    Unfold,
    /// Newton polytope, weight denominator, volume, monoid counts
    PolytopeInfo,
    /// brute-force partial sums S_k with trace-fiber histograms
    Sums,
    /// L-series, rational reconstruction, slopes, unit root
    Lfunc,
    /// twisted Dwork trace formula and commutation diagnostics
    TraceCheck,
    /// twisted Fredholm determinant and the delta_d factorization
    Fredholm {
        /// re-run with doubled wcut and compare digits
        #[arg(long)]
        stabilize: bool,
    },
    /// the unique p-adic unit root
    UnitRoot {
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long)]
        cross_check: bool,
    },
    /// search for a d-degeneracy certificate
    Degeneracy {
        #[arg(long, default_value_t = 2)]
        m_max: usize,
    },
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let path = cli
        .problem
        .as_ref()
        .ok_or_else(|| Error::Spec("no problem file given (use --problem)".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    let spec = problem::parse_problem(&text)?;
    let ov = Overrides {
        precision: cli.precision,
        wcut: cli.wcut,
        kmax: cli.kmax,
        deg: cli.deg,
        b: cli.b.clone(),
        cap: cli.cap,
    };
    let r = problem::resolve(spec, &ov)?;
    match &cli.cmd {
        Cmd::Unfold => problem::run_unfold(&r),
        Cmd::PolytopeInfo => problem::run_polytope_info(&r),
        Cmd::Sums => problem::run_sums(&r),
        Cmd::Lfunc => problem::run_lfunc(&r),
        Cmd::TraceCheck => problem::run_trace_check(&r),
        Cmd::Fredholm { stabilize } => problem::run_fredholm(&r, *stabilize),
        Cmd::UnitRoot {
            method,
            cross_check,
        } => problem::run_unit_root(&r, method, *cross_check),
        Cmd::Degeneracy { m_max } => problem::run_degeneracy(&r, *m_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let mut value = report.value;
            if let Some(obj) = value.as_object_mut() {
                obj.insert("pass".into(), serde_json::json!(report.pass));
            }
            let text = serde_json::to_string_pretty(&value).expect("report serializes");
            match &cli.json {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("cannot write report: {e}");
                        return ExitCode::from(4);
                    }
                }
                None => println!("{text}"),
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::CapExceeded { .. }
                | Error::DimensionCap { .. }
                | Error::PrecisionExhausted { .. }
                | Error::NonConvergence(_) => 3,
                Error::Spec(_)
                | Error::NonPrime(_)
                | Error::ReducibleModulus { .. }
                | Error::DegreeMismatch { .. }
                | Error::ZeroPolynomial => 4,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
