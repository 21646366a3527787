//! Greedy bottom-up search for a pattern set with a short description.
//!
//! Mining starts from the baseline state (one singleton pattern per symbol,
//! one instance per cell) and repeatedly merges the pair of patterns that
//! shortens the total description length the most, until no merge helps.
//!
//! ```
//! use vouw::grid::Matrix;
//! use vouw::miner::{mine, MinerConfig};
//!
//! let a = Matrix::from_rows(3, &[[0, 1, 2, 0, 1, 2]; 6]).unwrap();
//! let out = mine(&a, &MinerConfig::default()).unwrap();
//! assert!(out.state.is_lossless());
//! assert!(out.state.lengths().ratio < 1.0);
//! ```

mod candidates;
mod search;
mod state;

use std::time::Instant;

use thiserror::Error;

use crate::encoding::EncodingError;
use crate::grid::{GridError, Matrix, Offset};

pub use candidates::{overlap_coefficient, OverlapLedger};
pub use search::{local_search, select_best_star, LocalSearchOutcome, RankedCandidate};
pub use state::{Candidate, MergeOutcome, MiningState, PatternId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinerError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("pattern id {0} is not part of the model")]
    UnknownPattern(u32),
    #[error("candidate offset {0} is not posterior")]
    NotPosterior(Offset),
    #[error("candidate no longer matches any pair of instances")]
    StaleCandidate,
    #[error("invalid instantiation: {0}")]
    InvalidInstantiation(String),
    #[error("invalid miner configuration: {0}")]
    InvalidConfig(String),
}

/// How many candidates are merged per iteration.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// The single best candidate.
    #[default]
    Best1,
    /// All positive, pairwise disjoint candidates in descending gain order.
    BestStar,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MinerConfig {
    pub heuristic: Heuristic,
    pub local_search: bool,
    max_iterations: Option<usize>,
}

impl MinerConfig {
    pub fn new(heuristic: Heuristic, local_search: bool) -> Self {
        MinerConfig { heuristic, local_search, max_iterations: None }
    }

    pub fn with_max_iterations(mut self, max: usize) -> Result<Self, MinerError> {
        if max == 0 {
            return Err(MinerError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        self.max_iterations = Some(max);
        Ok(self)
    }

    pub fn max_iterations(&self) -> Option<usize> {
        self.max_iterations
    }
}

/// One iteration of the main loop.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Gain of the top-ranked candidate.
    pub best_gain: f64,
    /// Candidates merged by the heuristic itself.
    pub merges: usize,
    /// Additional merges made by local search.
    pub local_merges: usize,
    pub model_size: u64,
    pub instance_count: u64,
    pub total_bits: f64,
}

#[derive(Clone, Debug)]
pub struct MineOutcome {
    pub state: MiningState,
    pub log: Vec<IterationRecord>,
    /// Wall time of the search, excluding state construction.
    pub seconds: f64,
}

/// Mines `matrix` from the baseline state.
pub fn mine(matrix: &Matrix, config: &MinerConfig) -> Result<MineOutcome, MinerError> {
    mine_from(MiningState::new(matrix), config)
}

/// Mines starting from an arbitrary state.
pub fn mine_from(mut state: MiningState, config: &MinerConfig) -> Result<MineOutcome, MinerError> {
    let start = Instant::now();
    let mut log = Vec::new();
    while config.max_iterations.is_none_or(|max| log.len() < max) {
        match step(&mut state, config, log.len() + 1)? {
            Some(record) => log.push(record),
            None => break,
        }
    }
    Ok(MineOutcome { state, log, seconds: start.elapsed().as_secs_f64() })
}

/// Runs a single iteration. Returns `None` once no candidate has positive
/// gain; the state is left untouched in that case.
pub fn step(
    state: &mut MiningState,
    config: &MinerConfig,
    iteration: usize,
) -> Result<Option<IterationRecord>, MinerError> {
    let candidates = state.find_candidates();
    let mut created = Vec::new();
    let best_gain;
    match config.heuristic {
        Heuristic::Best1 => {
            let Some(best) = state.best_candidate(&candidates)? else { return Ok(None) };
            if best.gain <= 0.0 {
                return Ok(None);
            }
            best_gain = best.gain;
            let outcome = state.apply_merge(&best.candidate)?;
            debug_assert_eq!(outcome.replacements, best.candidate.support);
            created.push(outcome.pattern);
        }
        Heuristic::BestStar => {
            let positive: Vec<Candidate> =
                candidates.iter().copied().filter(|c| state.gain(c).is_ok_and(|g| g > 0.0)).collect();
            let ranked = state.rank_candidates(&positive)?;
            let batch = select_best_star(&ranked);
            let Some(first) = batch.first() else { return Ok(None) };
            best_gain = first.gain;
            for r in &batch {
                // Earlier merges in the batch change |H| and |I|, and may
                // create a pattern equal to one of this candidate's, so
                // support and gain are re-evaluated before merging.
                let mut c = r.candidate;
                c.support = state.current_support(&c);
                if c.support == 0 || state.gain(&c)? <= 0.0 {
                    continue;
                }
                created.push(state.apply_merge(&c)?.pattern);
            }
            if created.is_empty() {
                return Ok(None);
            }
        }
    }
    let merges = created.len();
    let mut local_merges = 0;
    if config.local_search {
        for z in created {
            if state.usage(z) > 0 {
                local_merges += local_search(state, z)?.merges;
            }
        }
    }
    Ok(Some(IterationRecord {
        iteration,
        best_gain,
        merges,
        local_merges,
        model_size: state.model_size(),
        instance_count: state.instance_count(),
        total_bits: state.total_bits(),
    }))
}
