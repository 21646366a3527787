//! Synthetic benchmark data: random-walk shaped patterns planted in noise.
//!
//! ```
//! use vouw::ril::{generate, RilConfig};
//!
//! let config = RilConfig::with_snr(64, 64, 0.1, 1).unwrap();
//! let (matrix, truth) = generate(&config).unwrap();
//! assert_eq!(matrix.dims(), (64, 64));
//! assert!((truth.snr() - 0.1).abs() <= 12.0 / 4096.0);
//! ```

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Mask, Matrix, Pattern, Position, Symbol};

pub const DEFAULT_ALPHABET: u32 = 256;
pub const DEFAULT_PATTERN_SIZE: usize = 12;
pub const DEFAULT_PREVALENCE: usize = 20;

const PLACEMENT_RETRIES: usize = 10_000;
const DEAD_ENDS_BEFORE_RESTART: usize = 100;
const DIRECTIONS: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RilError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("could not place occurrence {occurrence} of pattern {pattern} after {retries} attempts")]
    PlacementExhausted { pattern: usize, occurrence: usize, retries: usize },
}

/// How much signal to plant.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Planting {
    /// `num_patterns` shapes, each planted `prevalence` times.
    Counts { num_patterns: usize, prevalence: usize },
    /// As many occurrences as fit below `snr · M·N` planted cells, grouped
    /// into shapes of `prevalence` occurrences each (the last shape takes
    /// the remainder).
    Snr { snr: f64, prevalence: usize },
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RilConfig {
    pub rows: usize,
    pub cols: usize,
    pub alphabet_size: u32,
    pub pattern_size: usize,
    pub planting: Planting,
    pub seed: u64,
}

impl RilConfig {
    /// Planting driven by a target signal-to-noise ratio, with the default
    /// alphabet, pattern size and prevalence.
    pub fn with_snr(rows: usize, cols: usize, snr: f64, seed: u64) -> Result<Self, RilError> {
        let config = RilConfig {
            rows,
            cols,
            alphabet_size: DEFAULT_ALPHABET,
            pattern_size: DEFAULT_PATTERN_SIZE,
            planting: Planting::Snr { snr, prevalence: DEFAULT_PREVALENCE },
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Planting driven by explicit pattern counts.
    pub fn with_counts(
        rows: usize,
        cols: usize,
        pattern_size: usize,
        num_patterns: usize,
        prevalence: usize,
        seed: u64,
    ) -> Result<Self, RilError> {
        let config = RilConfig {
            rows,
            cols,
            alphabet_size: DEFAULT_ALPHABET,
            pattern_size,
            planting: Planting::Counts { num_patterns, prevalence },
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn alphabet(mut self, alphabet_size: u32) -> Result<Self, RilError> {
        self.alphabet_size = alphabet_size;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), RilError> {
        let bad = |msg: String| Err(RilError::InvalidConfig(msg));
        if self.rows == 0 || self.cols == 0 {
            return bad(format!("matrix must be non-empty, got {}x{}", self.rows, self.cols));
        }
        if self.alphabet_size == 0 {
            return bad("alphabet size must be at least 1".into());
        }
        if self.pattern_size == 0 {
            return bad("pattern size must be at least 1".into());
        }
        match self.planting {
            Planting::Counts { prevalence: 0, .. } | Planting::Snr { prevalence: 0, .. } => {
                return bad("prevalence must be at least 1".into());
            }
            Planting::Snr { snr, .. } if !(0.0..=1.0).contains(&snr) => {
                return bad(format!("snr must lie in [0, 1], got {snr}"));
            }
            _ => {}
        }
        let planted = self.occurrence_counts().iter().sum::<usize>().saturating_mul(self.pattern_size);
        if planted > self.rows * self.cols {
            return bad(format!("{planted} planted cells exceed the {} cells of the matrix", self.rows * self.cols));
        }
        Ok(())
    }

    /// Number of occurrences per planted shape.
    pub fn occurrence_counts(&self) -> Vec<usize> {
        match self.planting {
            Planting::Counts { num_patterns, prevalence } => vec![prevalence; num_patterns],
            Planting::Snr { snr, prevalence } => {
                let cells = (snr * (self.rows * self.cols) as f64).floor() as usize;
                let mut total = cells / self.pattern_size;
                let mut counts = Vec::new();
                while total > 0 {
                    let n = total.min(prevalence);
                    counts.push(n);
                    total -= n;
                }
                counts
            }
        }
    }
}

/// Where the signal was planted.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub mask: Mask,
    /// Each planted shape with the pivot positions of its occurrences.
    pub planted: Vec<(Pattern, Vec<Position>)>,
}

impl GroundTruth {
    /// Fraction of cells that belong to a planted occurrence.
    pub fn snr(&self) -> f64 {
        self.mask.count() as f64 / (self.mask.rows() * self.mask.cols()) as f64
    }
}

/// A pattern of exactly `size` cells traced by a self-avoiding
/// 8-directional walk from the origin, with uniform random symbols.
pub fn generate_shape<R: Rng>(size: usize, alphabet_size: u32, rng: &mut R) -> Pattern {
    assert!(size >= 1 && alphabet_size >= 1);
    'walk: loop {
        let mut visited: Vec<(i64, i64)> = vec![(0, 0)];
        let mut here = (0, 0);
        let mut dead_ends = 0;
        while visited.len() < size {
            let mut dirs = DIRECTIONS;
            dirs.shuffle(rng);
            let next = dirs.iter().map(|&(dr, dc)| (here.0 + dr, here.1 + dc)).find(|c| !visited.contains(c));
            match next {
                Some(c) => {
                    visited.push(c);
                    here = c;
                }
                None => {
                    dead_ends += 1;
                    if dead_ends >= DEAD_ENDS_BEFORE_RESTART {
                        continue 'walk;
                    }
                    here = visited[rng.gen_range(0..visited.len())];
                }
            }
        }
        let cells = visited.into_iter().map(|(r, c)| (r, c, rng.gen_range(0..alphabet_size)));
        return Pattern::from_cells(cells).expect("walk cells are distinct and connected");
    }
}

/// Generates a matrix and its ground truth. Deterministic in the config.
pub fn generate(config: &RilConfig) -> Result<(Matrix, GroundTruth), RilError> {
    config.validate()?;
    let (rows, cols) = (config.rows, config.cols);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cells: Vec<Option<Symbol>> = vec![None; rows * cols];
    let mut mask = Mask::new(rows, cols);
    let mut planted = Vec::new();

    for (index, &occurrences) in config.occurrence_counts().iter().enumerate() {
        let mut shape = generate_shape(config.pattern_size, config.alphabet_size, &mut rng);
        let mut reshapes = 0;
        while shape.rows() as usize > rows || shape.cols() as usize > cols {
            reshapes += 1;
            if reshapes > PLACEMENT_RETRIES {
                return Err(RilError::InvalidConfig(format!(
                    "no {}-cell shape fits a {rows}x{cols} matrix",
                    config.pattern_size
                )));
            }
            shape = generate_shape(config.pattern_size, config.alphabet_size, &mut rng);
        }
        let (h, w) = (shape.rows() as usize, shape.cols() as usize);
        let mut positions = Vec::with_capacity(occurrences);
        for occurrence in 0..occurrences {
            let mut placed = false;
            for _ in 0..PLACEMENT_RETRIES {
                let top = rng.gen_range(0..=rows - h);
                let left = rng.gen_range(0..=cols - w);
                let free = shape
                    .cells()
                    .iter()
                    .all(|c| cells[(top + c.row as usize) * cols + left + c.col as usize].is_none());
                if !free {
                    continue;
                }
                for c in shape.cells() {
                    let (r, k) = (top + c.row as usize, left + c.col as usize);
                    cells[r * cols + k] = Some(c.symbol);
                    mask.set(r, k, true);
                }
                let (pr, pc) = shape.pivot();
                positions.push((top + pr as usize, left + pc as usize));
                placed = true;
                break;
            }
            if !placed {
                return Err(RilError::PlacementExhausted { pattern: index, occurrence, retries: PLACEMENT_RETRIES });
            }
        }
        planted.push((shape, positions));
    }

    let values = cells.into_iter().map(|c| c.unwrap_or_else(|| rng.gen_range(0..config.alphabet_size))).collect();
    let matrix = Matrix::new(rows, cols, config.alphabet_size, values).expect("generated symbols are in range");
    Ok((matrix, GroundTruth { mask, planted }))
}
