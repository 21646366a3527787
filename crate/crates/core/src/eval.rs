//! Recovery quality and the synthetic benchmark.
//!
//! ```
//! use vouw::eval::{evaluate, Variant};
//! use vouw::ril::{generate, RilConfig};
//!
//! let (matrix, truth) = generate(&RilConfig::with_snr(64, 64, 0.1, 3).unwrap()).unwrap();
//! let report = evaluate(&matrix, &truth, Variant::Local).unwrap();
//! assert!(report.precision > 0.8 && report.recall > 0.8);
//! ```

use std::fmt::{self, Write as _};
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grid::Mask;
use crate::miner::{mine, Heuristic, MinerConfig, MinerError, MiningState};
use crate::ril::{generate, GroundTruth, Planting, RilConfig, RilError};
use crate::Matrix;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("mask dimensions differ: {found:?} vs {truth:?}")]
    DimMismatch { found: (usize, usize), truth: (usize, usize) },
    #[error(transparent)]
    Ril(#[from] RilError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Cells covered by instances of non-singleton patterns.
pub fn coverage_mask(state: &MiningState) -> Mask {
    let (rows, cols) = state.dims();
    let mut mask = Mask::new(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let pivot = state.owner_of((r, c));
            let id = state.instance_at(pivot).expect("every cell has an owner");
            if !state.pattern(id).expect("live pattern").is_singleton() {
                mask.set(r, c, true);
            }
        }
    }
    mask
}

/// `(|found ∧ truth| / |found|, |found ∧ truth| / |truth|)`, each taken
/// as 1 when its denominator is empty.
pub fn precision_recall(found: &Mask, truth: &Mask) -> Result<(f64, f64), EvalError> {
    if found.dims() != truth.dims() {
        return Err(EvalError::DimMismatch { found: found.dims(), truth: truth.dims() });
    }
    let both = found.bits().iter().zip(truth.bits()).filter(|(a, b)| **a && **b).count();
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    Ok((ratio(both, found.count()), ratio(both, truth.count())))
}

/// Total description length relative to the baseline of the same matrix.
pub fn compression_ratio(state: &MiningState) -> f64 {
    state.lengths().ratio
}

/// Spearman rank correlation, with tied values sharing their mean rank.
/// `None` for fewer than two points or a constant series.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "series lengths differ");
    if xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mean;
        }
        i = j + 1;
    }
    out
}

/// Column of the results table: which search improvements are enabled.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    None,
    Local,
    BestStar,
    Both,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::None, Variant::Local, Variant::BestStar, Variant::Both];

    pub fn miner_config(self) -> MinerConfig {
        match self {
            Variant::None => MinerConfig::new(Heuristic::Best1, false),
            Variant::Local => MinerConfig::new(Heuristic::Best1, true),
            Variant::BestStar => MinerConfig::new(Heuristic::BestStar, false),
            Variant::Both => MinerConfig::new(Heuristic::BestStar, true),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::None => "none",
            Variant::Local => "local",
            Variant::BestStar => "beststar",
            Variant::Both => "both",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Variant::None => "None",
            Variant::Local => "Local",
            Variant::BestStar => "Best-*",
            Variant::Both => "Both",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown heuristic {s:?} (expected none, local, beststar or both)"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub compression_ratio: f64,
    pub snr_ground_truth: f64,
    /// Mining wall time, excluding generation and I/O.
    pub seconds: f64,
    pub variant: Variant,
    pub iterations: usize,
}

/// Mines `matrix` with `variant` and scores the result against `truth`.
pub fn evaluate(matrix: &Matrix, truth: &GroundTruth, variant: Variant) -> Result<EvalReport, EvalError> {
    let outcome = mine(matrix, &variant.miner_config())?;
    let (precision, recall) = precision_recall(&coverage_mask(&outcome.state), &truth.mask)?;
    Ok(EvalReport {
        precision,
        recall,
        compression_ratio: compression_ratio(&outcome.state),
        snr_ground_truth: truth.snr(),
        seconds: outcome.seconds,
        variant,
        iterations: outcome.log.len(),
    })
}

/// Grid of benchmark runs: every size × SNR × variant, over seeds
/// `1..=seeds`. Square matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub snrs: Vec<f64>,
    pub variants: Vec<Variant>,
    pub seeds: u64,
    pub alphabet_size: u32,
    pub pattern_size: usize,
    pub prevalence: usize,
    /// Worker threads; 0 runs sequentially.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![256],
            snrs: vec![0.05, 0.3],
            variants: Variant::ALL.to_vec(),
            seeds: 5,
            alphabet_size: crate::ril::DEFAULT_ALPHABET,
            pattern_size: crate::ril::DEFAULT_PATTERN_SIZE,
            prevalence: crate::ril::DEFAULT_PREVALENCE,
            threads: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InvalidConfig(m.into()));
        if self.seeds == 0 {
            return bad("at least one seed is required");
        }
        if self.sizes.is_empty() || self.snrs.is_empty() || self.variants.is_empty() {
            return bad("sizes, snrs and heuristics must be non-empty");
        }
        Ok(())
    }

    fn ril(&self, size: usize, snr: f64, seed: u64) -> RilConfig {
        RilConfig {
            rows: size,
            cols: size,
            alphabet_size: self.alphabet_size,
            pattern_size: self.pattern_size,
            planting: Planting::Snr { snr, prevalence: self.prevalence },
            seed,
        }
    }
}

/// One benchmark run. A failed run keeps its error message.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub snr: f64,
    pub variant: Variant,
    pub seed: u64,
    pub result: Result<EvalReport, String>,
}

/// Runs the whole grid. Rows come back in grid order (size, SNR, variant,
/// seed) regardless of threading; a failing run does not stop the others.
pub fn bench(config: &BenchConfig) -> Result<Vec<BenchRow>, EvalError> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &size in &config.sizes {
        for &snr in &config.snrs {
            for &variant in &config.variants {
                for seed in 1..=config.seeds {
                    jobs.push((size, snr, variant, seed));
                }
            }
        }
    }
    let run = |&(size, snr, variant, seed): &(usize, f64, Variant, u64)| {
        let result = generate(&config.ril(size, snr, seed))
            .map_err(EvalError::from)
            .and_then(|(m, truth)| evaluate(&m, &truth, variant))
            .map_err(|e| e.to_string());
        BenchRow { size, snr, variant, seed, result }
    };
    if config.threads == 0 {
        return Ok(jobs.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| jobs.par_iter().map(run).collect()))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    size: usize,
    snr: f64,
    heuristic: &'a str,
    seed: u64,
    precision: Option<f64>,
    recall: Option<f64>,
    ratio: Option<f64>,
    seconds: Option<f64>,
    iterations: Option<usize>,
    status: &'a str,
}

/// Writes one line per run with header
/// `size,snr,heuristic,seed,precision,recall,ratio,seconds,iterations,status`.
/// Failed runs have empty metric fields and the error in `status`.
pub fn write_csv<W: io::Write>(rows: &[BenchRow], out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        let r = row.result.as_ref().ok();
        w.serialize(CsvRow {
            size: row.size,
            snr: row.snr,
            heuristic: row.variant.name(),
            seed: row.seed,
            precision: r.map(|r| r.precision),
            recall: r.map(|r| r.recall),
            ratio: r.map(|r| r.compression_ratio),
            seconds: r.map(|r| r.seconds),
            iterations: r.map(|r| r.iterations),
            status: row.result.as_ref().err().map_or("ok", String::as_str),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Means over the successful seeds of one (size, SNR, variant) cell.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub size: usize,
    pub snr: f64,
    pub variant: Variant,
    pub runs: usize,
    pub failures: usize,
    pub precision: f64,
    pub recall: f64,
    pub ratio: f64,
    pub seconds: f64,
}

/// Aggregates rows per cell, in order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(CellSummary, usize)> = Vec::new();
    for row in rows {
        let i = match cells.iter().position(|(c, _)| c.size == row.size && c.snr == row.snr && c.variant == row.variant)
        {
            Some(i) => i,
            None => {
                let empty = CellSummary {
                    size: row.size,
                    snr: row.snr,
                    variant: row.variant,
                    runs: 0,
                    failures: 0,
                    precision: 0.0,
                    recall: 0.0,
                    ratio: 0.0,
                    seconds: 0.0,
                };
                cells.push((empty, 0));
                cells.len() - 1
            }
        };
        let (cell, ok) = &mut cells[i];
        cell.runs += 1;
        match &row.result {
            Ok(r) => {
                *ok += 1;
                cell.precision += r.precision;
                cell.recall += r.recall;
                cell.ratio += r.compression_ratio;
                cell.seconds += r.seconds;
            }
            Err(_) => cell.failures += 1,
        }
    }
    cells
        .into_iter()
        .map(|(mut c, ok)| {
            let n = if ok == 0 { f64::NAN } else { ok as f64 };
            c.precision /= n;
            c.recall /= n;
            c.ratio /= n;
            c.seconds /= n;
            c
        })
        .collect()
}

fn short(x: f64) -> String {
    if x.is_nan() {
        return "-".into();
    }
    let s = format!("{x:.2}");
    s.strip_prefix('0').map(str::to_string).unwrap_or(s)
}

fn duration(secs: f64) -> String {
    if secs.is_nan() {
        "-".into()
    } else if secs < 60.0 {
        format!("{secs:.1}s")
    } else {
        format!("{}m {}s", (secs / 60.0) as u64, (secs % 60.0) as u64)
    }
}

/// Aligned text table: one line per (size, SNR), precision/recall and mean
/// time per variant.
pub fn format_table(summaries: &[CellSummary]) -> String {
    let mut variants: Vec<Variant> = summaries.iter().map(|c| c.variant).collect();
    variants.sort();
    variants.dedup();
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for c in summaries {
        if !keys.iter().any(|&(s, r)| s == c.size && r == c.snr) {
            keys.push((c.size, c.snr));
        }
    }
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut head = vec!["Size".to_string(), "SNR".to_string()];
    head.extend(variants.iter().map(|v| format!("P/R {}", v.title())));
    head.extend(variants.iter().map(|v| format!("Time {}", v.title())));
    grid.push(head);
    let mut last_size = None;
    for (size, snr) in keys {
        let mut line = vec![if last_size == Some(size) { String::new() } else { size.to_string() }, short(snr)];
        last_size = Some(size);
        let cell = |v: Variant| summaries.iter().find(|c| c.size == size && c.snr == snr && c.variant == v);
        for &v in &variants {
            line.push(cell(v).map_or("-".into(), |c| format!("{}/{}", short(c.precision), short(c.recall))));
        }
        for &v in &variants {
            line.push(cell(v).map_or("-".into(), |c| duration(c.seconds)));
        }
        grid.push(line);
    }
    let widths: Vec<usize> =
        (0..grid[0].len()).map(|i| grid.iter().map(|l| l[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for line in &grid {
        let cells: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
