//! The `vouw` command line: `gen`, `mine`, `eval` and `bench`.
//!
//! Every command exits with 0 on success and 2 on a usage or input error;
//! diagnostics go to the error stream.

pub mod format;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::eval::{bench, coverage_mask, format_table, precision_recall, summarize, write_csv, BenchConfig, Variant};
use crate::miner::{mine, Heuristic, MinerConfig};
use crate::ril::{generate, Planting, RilConfig, DEFAULT_ALPHABET, DEFAULT_PATTERN_SIZE, DEFAULT_PREVALENCE};
use format::{parse_mask, parse_matrix, write_mask, write_matrix, PatternSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vouw", version, about = "Geometric pattern mining in discrete 2-D matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic matrix with planted patterns and its ground truth mask.
    Gen(GenArgs),
    /// Mine a pattern set from a matrix.
    Mine(MineArgs),
    /// Score a mined pattern set against a ground truth mask.
    Eval(EvalArgs),
    /// Run the synthetic benchmark grid.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Fraction of cells covered by planted patterns.
    #[arg(long, conflicts_with = "num_patterns")]
    snr: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PATTERN_SIZE)]
    pattern_size: usize,
    #[arg(long, requires = "prevalence")]
    num_patterns: Option<usize>,
    /// Occurrences per planted pattern.
    #[arg(long)]
    prevalence: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHABET)]
    alphabet: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth_out: PathBuf,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    best_star: bool,
    #[arg(long)]
    local_search: bool,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration log as CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "256")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.3")]
    snrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "none,local,beststar,both")]
    heuristics: Vec<Variant>,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = DEFAULT_PATTERN_SIZE)]
    pattern_size: usize,
    #[arg(long, default_value_t = DEFAULT_PREVALENCE)]
    prevalence: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHABET)]
    alphabet: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
struct Failure(i32, String);

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, message.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn in_file<T, E: std::fmt::Display>(path: &Path, r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs the command line given in `args` (program name first) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Mine(a) => cmd_mine(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let planting = match (a.snr, a.num_patterns) {
        (Some(snr), None) => Planting::Snr { snr, prevalence: a.prevalence.unwrap_or(DEFAULT_PREVALENCE) },
        (None, Some(num_patterns)) => {
            Planting::Counts { num_patterns, prevalence: a.prevalence.expect("required by clap") }
        }
        _ => return Err(usage("give either --snr or --num-patterns with --prevalence")),
    };
    let config = RilConfig {
        rows: a.rows,
        cols: a.cols,
        alphabet_size: a.alphabet,
        pattern_size: a.pattern_size,
        planting,
        seed: a.seed,
    };
    let (matrix, truth) = generate(&config).map_err(usage)?;
    write(&a.out, &write_matrix(&matrix))?;
    write(&a.truth_out, &write_mask(&truth.mask))?;
    let _ = writeln!(out, "snr={:.4} planted={}", truth.snr(), truth.mask.count());
    Ok(())
}

fn cmd_mine(a: MineArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let matrix = in_file(&a.input, parse_matrix(&read(&a.input)?))?;
    let heuristic = if a.best_star { Heuristic::BestStar } else { Heuristic::Best1 };
    let mut config = MinerConfig::new(heuristic, a.local_search);
    if let Some(max) = a.max_iters {
        config = config.with_max_iterations(max).map_err(usage)?;
    }
    let outcome = mine(&matrix, &config).map_err(|e| Failure(EXIT_FAILED, e.to_string()))?;
    let state = &outcome.state;
    if let Some(path) = &a.out {
        write(path, &PatternSet::from_state(state).write())?;
    }
    if let Some(path) = &a.log {
        let mut text = String::from("iteration,best_gain,merges,local_merges,patterns,instances,total_bits\n");
        for r in &outcome.log {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.iteration, r.best_gain, r.merges, r.local_merges, r.model_size, r.instance_count, r.total_bits
            ));
        }
        write(path, &text)?;
    }
    let lengths = state.lengths();
    let _ = writeln!(
        out,
        "|H|={} |I|={} bits={:.3} ratio={:.4} seconds={:.3}",
        state.model_size(),
        state.instance_count(),
        lengths.total_bits,
        lengths.ratio,
        outcome.seconds
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let matrix = in_file(&a.matrix, parse_matrix(&read(&a.matrix)?))?;
    let set = in_file(&a.patterns, PatternSet::parse(&read(&a.patterns)?))?;
    let truth = in_file(&a.truth, parse_mask(&read(&a.truth)?))?;
    let state = in_file(&a.patterns, set.to_state(&matrix))?;
    let (precision, recall) = precision_recall(&coverage_mask(&state), &truth).map_err(usage)?;
    let _ = writeln!(out, "precision={precision:.4} recall={recall:.4} ratio={:.4}", state.lengths().ratio);
    Ok(())
}

/// Worker threads requested through `VOUW_THREADS`; absent, empty or 0
/// means sequential.
pub fn threads_from_env() -> Result<usize, String> {
    match std::env::var("VOUW_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| format!("VOUW_THREADS={v:?} is not a count")),
        _ => Ok(0),
    }
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let config = BenchConfig {
        sizes: a.sizes,
        snrs: a.snrs,
        variants: a.heuristics,
        seeds: a.seeds,
        alphabet_size: a.alphabet,
        pattern_size: a.pattern_size,
        prevalence: a.prevalence,
        threads: threads_from_env().map_err(usage)?,
    };
    let rows = bench(&config).map_err(usage)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(|e| Failure(EXIT_FAILED, e.to_string()))?;
    let csv = String::from_utf8(csv).expect("csv output is utf-8");
    match &a.out {
        Some(path) => write(path, &csv)?,
        None => {
            let _ = write!(out, "{csv}");
        }
    }
    let _ = write!(out, "{}", format_table(&summarize(&rows)));
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    for row in rows.iter().filter(|r| r.result.is_err()) {
        let _ = writeln!(
            err,
            "warning: size {} snr {} {} seed {}: {}",
            row.size,
            row.snr,
            row.variant,
            row.seed,
            row.result.as_ref().unwrap_err()
        );
    }
    if failed == rows.len() {
        return Err(Failure(EXIT_FAILED, "every benchmark run failed".into()));
    }
    Ok(())
}
