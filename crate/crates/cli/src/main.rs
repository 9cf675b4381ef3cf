//! `isolp` command-line front end.
//!
//! Exit codes for `solve`: 0 isomorphic, 1 not isomorphic, 2 unknown,
//! 3 runtime failure, 64 usage or input errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use isolp::admm::{write_trace_csv, AdmmParams};
use isolp::harness::{bench_row, time_admm, write_bench_csv, write_timing_csv, Family};
use isolp::io::{load_graph, save_graph};
use isolp::pipeline::{solve_gip, RestartRecord, SolveConfig, SolveReport, Verdict};
use isolp::{graph, Error};

const EXIT_ISOMORPHIC: u8 = 0;
const EXIT_NOT_ISOMORPHIC: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_FAILURE: u8 = 3;
const EXIT_USAGE: u8 = 64;

const JSON_SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "isolp", version, about = "Randomized LP heuristic for weighted graph isomorphism")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two graph files are isomorphic; prints a JSON report.
    Solve(SolveArgs),
    /// Success rates with and without the sparsity mask, as CSV.
    Bench(BenchArgs),
    /// ADMM wall time per iteration on random graphs, as CSV.
    Timing(TimingArgs),
    /// Write a benchmark graph (optionally randomly relabeled) to a file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Random seed; drawn from the OS and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// ADMM stopping tolerance (primal and dual), per unit of n.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
}

impl SolverFlags {
    fn admm(&self) -> AdmmParams {
        AdmmParams { max_iter: self.max_iter, eps_primal: self.tol, eps_dual: self.tol, ..AdmmParams::default() }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long)]
    no_mask: bool,
    #[arg(long)]
    no_pruning: bool,
    /// Dump each restart's residual trace (`iter,primal,dual`) to stderr.
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// r1n, g2n, frucht, petersen or file:<path>
    #[arg(long)]
    family: String,
    /// Comma-separated vertex counts (ignored by fixed-size families).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Apply neighborhood pruning on top of the invariant mask.
    #[arg(long)]
    pruning: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relabel vertices with a random permutation drawn from this seed.
    #[arg(long)]
    permute: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    schema: u32,
    verdict: &'static str,
    /// 1-based: vertex `j + 1` of the first graph maps to `permutation[j]`.
    permutation: Option<Vec<usize>>,
    reason: Option<&'static str>,
    restarts_used: usize,
    wall_time_s: f64,
    seed: u64,
    mask_allowed: Option<usize>,
    sparsity_ratio: Option<f64>,
    success_fraction: f64,
    per_restart: &'a [RestartRecord],
}

impl<'a> SolveOutput<'a> {
    fn new(report: &'a SolveReport, seed: u64) -> Self {
        let (permutation, reason) = match &report.verdict {
            Verdict::Isomorphic(p) => (Some(p.to_one_based()), None),
            Verdict::NotIsomorphic(r) => (None, Some(r.as_str())),
            Verdict::Unknown => (None, None),
        };
        Self {
            schema: JSON_SCHEMA,
            verdict: report.verdict.as_str(),
            permutation,
            reason,
            restarts_used: report.restarts_used(),
            wall_time_s: report.wall_time_s,
            seed,
            mask_allowed: report.mask_allowed,
            sparsity_ratio: report.sparsity_ratio,
            success_fraction: report.success_fraction(),
            per_restart: &report.restarts,
        }
    }
}

/// Input problems map to exit 64, everything else to 3.
fn failure(e: &Error) -> u8 {
    eprintln!("error: {e}");
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::InvalidArgument(_) | Error::NotSymmetric(..) | Error::NonFinite(..) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(args: SolveArgs) -> Result<u8, Error> {
    let a = load_graph(&args.first)?;
    let b = load_graph(&args.second)?;
    let seed = args.solver.seed();
    let mut admm = args.solver.admm();
    admm.record_trace = args.verbose;
    let cfg = SolveConfig {
        restarts: args.restarts,
        seed,
        use_mask: !args.no_mask,
        use_pruning: !args.no_pruning,
        admm,
        ..SolveConfig::default()
    };
    let report = solve_gip(&a, &b, &cfg)?;
    if args.verbose {
        let mut err = io::stderr().lock();
        for r in &report.restarts {
            writeln!(err, "# restart {} seed {}", r.restart, r.seed)?;
            write_trace_csv(&mut err, &r.trace)?;
        }
    }
    let json = serde_json::to_string_pretty(&SolveOutput::new(&report, seed)).expect("report serializes");
    if let Err(e) = writeln!(io::stdout().lock(), "{json}") {
        if e.kind() != io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(match report.verdict {
        Verdict::Isomorphic(_) => EXIT_ISOMORPHIC,
        Verdict::NotIsomorphic(_) => EXIT_NOT_ISOMORPHIC,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

fn bench(args: BenchArgs) -> Result<u8, Error> {
    let family: Family = args.family.parse()?;
    let seed = args.solver.seed();
    let cfg = SolveConfig { seed, use_pruning: args.pruning, admm: args.solver.admm(), ..SolveConfig::default() };
    let rows = args
        .sizes
        .iter()
        .map(|&n| bench_row(&family, n, args.trials, seed, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = output(&args.out)?;
    write_bench_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(0)
}

fn timing(args: TimingArgs) -> Result<u8, Error> {
    let seed = args.solver.seed();
    let params = args.solver.admm();
    let rows = args
        .sizes
        .iter()
        .map(|&n| time_admm(n, args.repeats, seed, &params))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = output(&args.out)?;
    write_timing_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(0)
}

fn generate(args: GenerateArgs) -> Result<u8, Error> {
    let family: Family = args.family.parse()?;
    let mut g = family.graph(args.n, args.seed)?;
    if let Some(s) = args.permute {
        g = graph::random_permute(&g, s).0;
    }
    save_graph(&args.out, &g)?;
    Ok(0)
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("ISO_LP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| Error::InvalidArgument(format!("ISO_LP_THREADS=`{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), Error> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        return ExitCode::from(failure(&e));
    }
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Timing(a) => timing(a),
        Command::Generate(a) => generate(a),
    };
    ExitCode::from(result.unwrap_or_else(|e| failure(&e)))
}
