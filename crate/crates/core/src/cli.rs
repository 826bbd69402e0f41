//! Command-line front end: `solve`, `bench`, `prune` and `verify`.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error,
//! 3 verification failure. Summaries are one JSON object per line on stdout;
//! diagnostics go to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::baselines::two_approximation;
use crate::bench::{
    run_bench, run_solver, run_sweep, sweep_csv, BenchSpec, Solver, SolverSettings, SweepSpec, WeightDistribution,
};
use crate::block::{assemble_mask, check_groups, mask_objective, partition_blocks, SparsityPattern};
use crate::dykstra::{DykstraConfig, TauMode};
use crate::error::{Error, Result};
use crate::io::{load_matrix, write_mask, write_matrix, BenchRecord, TnmDtype};
use crate::layerwise::{
    admm_prune, magnitude_prune, reconstruction_error, wanda_prune, AdmmConfig, AdmmTrace, LayerProblem,
    MaskSettings,
};
use crate::rounding::{solve_batch, RoundingConfig, RoundingStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tsenor", version, about = "Transposable N:M sparse mask solver")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "TNM_THREADS", default_value_t = 0)]
    threads: usize,

    /// Print human-readable details to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a transposable mask for a weight matrix.
    Solve(SolveArgs),
    /// Compare solvers against the exact optimum on random blocks.
    Bench(BenchArgs),
    /// Prune a layer with calibration statistics.
    Prune(PruneArgs),
    /// Check a mask file against an N:M pattern.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
struct SolverFlags {
    /// Entropy scale: tau = tau_scale / max|W| per block.
    #[arg(long, default_value_t = DykstraConfig::default().tau_scale)]
    tau_scale: f64,
    /// Use tau = 0.005 * max|W| over the whole matrix instead.
    #[arg(long)]
    tau_absolute: bool,
    /// Dykstra sweeps.
    #[arg(long, default_value_t = DykstraConfig::default().max_iters)]
    iters: usize,
    /// Local-search swaps per block.
    #[arg(long, default_value_t = RoundingConfig::default().local_search_steps)]
    ls_steps: usize,
    /// Samples for the random baseline.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverFlags {
    fn settings(&self) -> SolverSettings {
        let dykstra = DykstraConfig {
            tau_scale: self.tau_scale,
            max_iters: self.iters,
            tau_mode: if self.tau_absolute { TauMode::Absolute } else { TauMode::ScaleInvariant },
            ..DykstraConfig::default()
        };
        SolverSettings {
            dykstra,
            rounding: RoundingConfig { local_search_steps: self.ls_steps },
            k: self.k,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Weights as TNM1 or `.csv`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    pattern: SparsityPattern,
    #[arg(long, default_value = "tsenor", value_parser = clap::value_parser!(Solver))]
    solver: Solver,
    /// Mask output (TNM1, dtype u8).
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    blocks: usize,
    /// Pattern as N:M; alternative to --n/--m.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pattern: Option<SparsityPattern>,
    #[arg(long, requires = "m")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, default_value = "gaussian", value_parser = clap::value_parser!(WeightDistribution))]
    dist: WeightDistribution,
    #[arg(long, value_delimiter = ',', default_value = "tsenor,greedy2,binm", value_parser = clap::value_parser!(Solver))]
    solvers: Vec<Solver>,
    /// JSON report path; stdout when absent.
    #[arg(long, alias = "output")]
    report: Option<PathBuf>,
    /// CSV summary path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Add solver wall times to the report (breaks byte-identical output).
    #[arg(long)]
    timings: bool,
    /// Run the rounding ablation over the eight standard patterns instead.
    #[arg(long)]
    sweep: bool,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Admm,
    Wanda,
    Magnitude,
}

#[derive(Debug, Args)]
struct PruneArgs {
    /// Weights `d_in x d_out` as TNM1 or `.csv`.
    #[arg(long)]
    weights: PathBuf,
    /// Gram matrix `X^T X + lambda I`.
    #[arg(long, conflicts_with = "activations", required_unless_present = "activations")]
    gram: Option<PathBuf>,
    /// Calibration activations `n x d_in`.
    #[arg(long)]
    activations: Option<PathBuf>,
    /// Ridge term. Defaults to 0.01 * mean diag(X^T X) with --activations
    /// and to 0 with --gram.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    pattern: SparsityPattern,
    #[arg(long, value_enum, default_value_t = Method::Admm)]
    method: Method,
    /// Initial penalty; defaults to 0.1 * mean diag(H).
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long, default_value_t = AdmmConfig::default().growth)]
    growth: f64,
    #[arg(long, default_value_t = AdmmConfig::default().max_iters)]
    iters: usize,
    #[arg(long, default_value_t = AdmmConfig::default().primal_tol)]
    tol: f64,
    /// Pruned weights (TNM1 f64).
    #[arg(long)]
    output: PathBuf,
    /// Mask output (TNM1 u8).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Trace JSON output.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    pattern: SparsityPattern,
    /// Also check column groups of every m x m block.
    #[arg(long)]
    transposable: bool,
    /// Require exactly n ones per group instead of at most n.
    #[arg(long)]
    exact: bool,
}

/// Runs the CLI on the process arguments.
pub fn run() -> i32 {
    run_with_args(std::env::args_os())
}

/// Runs the CLI on explicit arguments (the first is the program name).
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let verbose = cli.verbose;
    let outcome = pool.install(|| match &cli.command {
        Command::Solve(a) => cmd_solve(a, verbose),
        Command::Bench(a) => cmd_bench(a, verbose),
        Command::Prune(a) => cmd_prune(a, verbose),
        Command::Verify(a) => cmd_verify(a),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn print_line(value: &impl Serialize) {
    println!("{}", serde_json::to_string(value).expect("summary serializes"));
}

fn cmd_solve(a: &SolveArgs, verbose: bool) -> Result<i32> {
    let settings = a.flags.settings();
    settings.dykstra.validate()?;
    let weights = load_matrix(&a.input)?;
    let start = Instant::now();
    let batch = partition_blocks(&weights, a.pattern)?;
    let (mask, stats) = match a.solver {
        Solver::Tsenor => {
            let sol = solve_batch(&batch, a.pattern, &settings.dykstra, &settings.rounding)?;
            (sol.mask, Some(sol.stats))
        }
        Solver::Greedy2 => {
            let (mask, stats) = two_approximation(&batch, a.pattern)?;
            (mask, Some(stats))
        }
        other => (run_solver(other, &batch, a.pattern, &settings)?, None),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let objective = mask_objective(&batch, &mask)?.objective;
    let full = assemble_mask(&mask, batch.origin(), weights.rows(), weights.cols())?;
    if let Some(path) = &a.output {
        write_mask(path, &full)?;
    }
    let stats: RoundingStats = stats.unwrap_or_default();
    if verbose {
        eprintln!(
            "{} on {}x{} ({} blocks of {}): objective {objective:.6}, {} completion moves",
            a.solver,
            weights.rows(),
            weights.cols(),
            batch.len(),
            a.pattern,
            stats.completion_moves
        );
    }
    print_line(&json!({
        "solver": a.solver.name(),
        "pattern": a.pattern.to_string(),
        "rows": weights.rows(),
        "cols": weights.cols(),
        "blocks": batch.len(),
        "objective": objective,
        "swaps": stats.swaps,
        "completion_moves": stats.completion_moves,
        "completed_blocks": stats.completed_blocks,
        "wall_time_ms": wall_time_ms,
    }));
    Ok(EXIT_OK)
}

fn records_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn cmd_bench(a: &BenchArgs, verbose: bool) -> Result<i32> {
    let settings = a.flags.settings();
    settings.dykstra.validate()?;
    if a.sweep {
        let spec = SweepSpec { block_count: a.blocks, distribution: a.dist, ..SweepSpec::standard(a.blocks) };
        let rows = run_sweep(&spec, &settings)?;
        let table = sweep_csv(&rows);
        match &a.csv {
            Some(path) => write_text(path, &table)?,
            None => print!("{table}"),
        }
        return Ok(EXIT_OK);
    }
    let pattern = match (a.pattern, a.n, a.m) {
        (Some(p), _, _) => p,
        (None, Some(n), Some(m)) => SparsityPattern::new(n, m)?,
        _ => return Err(Error::InvalidConfig("bench needs --pattern N:M or --n and --m".into())),
    };
    let spec = BenchSpec {
        blocks: a.blocks,
        pattern,
        distribution: a.dist,
        solvers: a.solvers.clone(),
        settings,
        timings: a.timings,
    };
    let report = run_bench(&spec)?;
    if verbose {
        for r in &report.records {
            eprintln!(
                "{:>8} {:>6}  mean relerr {:.6}  max {:.6}",
                r.solver, r.pattern, r.mean_relative_error, r.max_relative_error
            );
        }
    }
    match &a.report {
        Some(path) => report.write(path)?,
        None => print!("{}", report.to_json()),
    }
    if let Some(path) = &a.csv {
        write_text(path, &records_csv(&report.records))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PruneTrace<'a> {
    method: &'static str,
    pattern: String,
    lambda: f64,
    reconstruction_error: f64,
    admm: Option<&'a AdmmTrace>,
}

fn cmd_prune(a: &PruneArgs, verbose: bool) -> Result<i32> {
    let weights = load_matrix(&a.weights)?;
    let layer = match (&a.gram, &a.activations) {
        (Some(g), _) => LayerProblem::new(weights.clone(), load_matrix(g)?, a.lambda.unwrap_or(0.0), 0)?,
        (None, Some(x)) => {
            let x = load_matrix(x)?;
            let lambda = match a.lambda {
                Some(l) => l,
                None => 0.01 * LayerProblem::from_activations(weights.clone(), &x, 0.0)?.mean_gram_diag(),
            };
            LayerProblem::from_activations(weights.clone(), &x, lambda)?
        }
        (None, None) => unreachable!("clap requires --gram or --activations"),
    };
    let settings = MaskSettings::default();
    let (pruned, mask, trace) = match a.method {
        Method::Magnitude => {
            let (w, m) = magnitude_prune(&weights, a.pattern, &settings)?;
            (w, m, None)
        }
        Method::Wanda => {
            let (w, m) = wanda_prune(&weights, &layer.input_norms(), a.pattern, &settings)?;
            (w, m, None)
        }
        Method::Admm => {
            let cfg = AdmmConfig {
                rho0: a.rho0,
                growth: a.growth,
                max_iters: a.iters,
                primal_tol: a.tol,
                mask: settings,
            };
            let out = admm_prune(&layer, a.pattern, &cfg)?;
            (out.weights, out.mask, Some(out.trace))
        }
    };
    let err = reconstruction_error(&layer, &pruned)?;
    write_matrix(&a.output, &pruned, TnmDtype::F64)?;
    if let Some(path) = &a.mask {
        write_mask(path, &mask)?;
    }
    let method = match a.method {
        Method::Admm => "admm",
        Method::Wanda => "wanda",
        Method::Magnitude => "magnitude",
    };
    if let Some(path) = &a.trace {
        let doc = PruneTrace {
            method,
            pattern: a.pattern.to_string(),
            lambda: layer.lambda(),
            reconstruction_error: err,
            admm: trace.as_ref(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("trace serializes");
        text.push('\n');
        write_text(path, &text)?;
    }
    if verbose {
        eprintln!("{method} {}: reconstruction error {err:.6}", a.pattern);
    }
    print_line(&json!({
        "method": method,
        "pattern": a.pattern.to_string(),
        "reconstruction_error": err,
        "iterations": trace.as_ref().map(|t| t.iterations.len()),
        "final_residual": trace.as_ref().and_then(|t| t.final_residual()),
        "safeguard_triggers": trace.as_ref().map(|t| t.safeguard_triggers),
        "converged": trace.as_ref().map(|t| t.converged),
    }));
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let mask = crate::io::read_mask(&a.mask)?;
    let violations = check_groups(&mask, a.pattern, a.transposable, a.exact)?;
    let feasible = violations.is_empty();
    print_line(&json!({
        "feasible": feasible,
        "pattern": a.pattern.to_string(),
        "transposable": a.transposable,
        "exact": a.exact,
        "violations": violations,
    }));
    Ok(if feasible { EXIT_OK } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_with_args(["tsenor", "verify", "--mask", "x", "--pattern", "5:4"]), EXIT_USAGE);
        assert_eq!(run_with_args(["tsenor", "solve", "--input", "x", "--pattern", "a:b"]), EXIT_USAGE);
        assert_eq!(run_with_args(["tsenor", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run_with_args(["tsenor", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_file_exits_one() {
        let code = run_with_args(["tsenor", "verify", "--mask", "/nonexistent/mask.tnm", "--pattern", "2:4"]);
        assert_eq!(code, EXIT_RUNTIME);
    }

    #[test]
    fn flags_build_settings() {
        let cli = Cli::try_parse_from(["tsenor", "solve", "--input", "w.csv", "--pattern", "2:4", "--tau-absolute", "--iters", "7"])
            .unwrap();
        let Command::Solve(a) = cli.command else { panic!("expected solve") };
        let s = a.flags.settings();
        assert_eq!(s.dykstra.tau_mode, TauMode::Absolute);
        assert_eq!(s.dykstra.max_iters, 7);
        assert_eq!(a.solver, Solver::Tsenor);
    }
}
