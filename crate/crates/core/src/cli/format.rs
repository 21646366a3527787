//! Plain-text files for matrices, masks and mined pattern sets.
//!
//! ```text
//! VOUW-MATRIX 2 3 4        VOUW-MASK 2 3        VOUW-PATTERNS 1
//! 0 1 2                    0 1 1                P 1 2 2 3
//! 3 0 1                    0 0 0                0 0 1
//!                                               0 1 2
//!                                               I 3
//!                                               0 0 0
//!                                               ...
//! ```

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use thiserror::Error;

use crate::encoding::EncodingParams;
use crate::grid::{instantiate, Mask, Matrix, Pattern, Position};
use crate::miner::{MinerError, MiningState};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse { line, message: message.into() })
}

/// Non-blank lines with their 1-based numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> =
            Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()));
        Lines { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l.split_whitespace().collect()))
            }
            None => parse_err(self.last + 1, format!("unexpected end of file, expected {what}")),
        }
    }

    fn finish(mut self) -> Result<(), FormatError> {
        match self.inner.next() {
            Some((n, _)) => parse_err(n, "unexpected trailing content"),
            None => Ok(()),
        }
    }
}

fn field<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T, FormatError> {
    token.parse().or_else(|_| parse_err(line, format!("invalid {what} {token:?}")))
}

fn header<'a>(lines: &mut Lines<'a>, tag: &str, arity: usize) -> Result<(usize, Vec<&'a str>), FormatError> {
    let (n, tokens) = lines.next(tag)?;
    if tokens.first() != Some(&tag) || tokens.len() != arity + 1 {
        return parse_err(n, format!("expected header `{tag}` with {arity} fields"));
    }
    Ok((n, tokens[1..].to_vec()))
}

fn row_values<'a>(lines: &mut Lines<'a>, cols: usize) -> Result<(usize, Vec<&'a str>), FormatError> {
    let (n, tokens) = lines.next("a matrix row")?;
    if tokens.len() != cols {
        return parse_err(n, format!("expected {cols} values, found {}", tokens.len()));
    }
    Ok((n, tokens))
}

pub fn write_matrix(matrix: &Matrix) -> String {
    let mut out = format!("VOUW-MATRIX {} {} {}\n", matrix.rows(), matrix.cols(), matrix.alphabet_size());
    for row in matrix.cells().chunks(matrix.cols()) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Matrix, FormatError> {
    let mut lines = Lines::new(text);
    let (n, h) = header(&mut lines, "VOUW-MATRIX", 3)?;
    let rows: usize = field(n, h[0], "row count")?;
    let cols: usize = field(n, h[1], "column count")?;
    let alphabet: u32 = field(n, h[2], "alphabet size")?;
    if rows == 0 || cols == 0 || alphabet == 0 {
        return parse_err(n, "dimensions and alphabet size must be positive");
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, tokens) = row_values(&mut lines, cols)?;
        for t in tokens {
            let v: u32 = field(n, t, "symbol")?;
            if v >= alphabet {
                return parse_err(n, format!("symbol {v} is outside the alphabet of size {alphabet}"));
            }
            cells.push(v);
        }
    }
    lines.finish()?;
    Matrix::new(rows, cols, alphabet, cells).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_mask(mask: &Mask) -> String {
    let mut out = format!("VOUW-MASK {} {}\n", mask.rows(), mask.cols());
    for row in mask.bits().chunks(mask.cols()) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_mask(text: &str) -> Result<Mask, FormatError> {
    let mut lines = Lines::new(text);
    let (n, h) = header(&mut lines, "VOUW-MASK", 2)?;
    let rows: usize = field(n, h[0], "row count")?;
    let cols: usize = field(n, h[1], "column count")?;
    if rows == 0 || cols == 0 {
        return parse_err(n, "dimensions must be positive");
    }
    let mut bits = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, tokens) = row_values(&mut lines, cols)?;
        for t in tokens {
            bits.push(match t {
                "0" => false,
                "1" => true,
                _ => return parse_err(n, format!("mask values are 0 or 1, found {t:?}")),
            });
        }
    }
    lines.finish()?;
    Mask::from_bits(rows, cols, bits).map_err(|e| FormatError::Invalid(e.to_string()))
}

/// A model with usages plus its instances as `(pivot position, pattern
/// index)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    pub patterns: Vec<(Pattern, u64)>,
    pub instances: Vec<(Position, usize)>,
}

impl PatternSet {
    /// Live patterns in id order; instances in row-major pivot order.
    pub fn from_state(state: &MiningState) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut patterns = Vec::new();
        for (id, p, usage) in state.model() {
            index.insert(id, patterns.len());
            patterns.push((p.clone(), usage));
        }
        let instances = state.instances().map(|(at, id)| (at, index[&id])).collect();
        PatternSet { patterns, instances }
    }

    /// Superposes all instances into a matrix of the given shape.
    pub fn reconstruct(&self, rows: usize, cols: usize, alphabet_size: u32) -> Result<Matrix, FormatError> {
        let mut cells: Vec<Option<u32>> = vec![None; rows * cols];
        for &(at, k) in &self.instances {
            let (pattern, _) = self
                .patterns
                .get(k)
                .ok_or_else(|| FormatError::Invalid(format!("instance refers to missing pattern {k}")))?;
            let overlay = instantiate(pattern, at, (rows, cols)).map_err(|e| FormatError::Invalid(e.to_string()))?;
            for ((r, c), s) in overlay.entries() {
                if cells[r * cols + c].replace(s).is_some() {
                    return Err(FormatError::Invalid(format!("instances overlap at ({r}, {c})")));
                }
            }
        }
        let values = cells
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| FormatError::Invalid(format!("cell ({}, {}) is not covered", i / cols, i % cols)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Matrix::new(rows, cols, alphabet_size, values).map_err(|e| FormatError::Invalid(e.to_string()))
    }

    /// Rebuilds a mining state over `matrix`. Listed usages must match the
    /// instance counts.
    pub fn to_state(&self, matrix: &Matrix) -> Result<MiningState, MinerError> {
        let mut counts = vec![0u64; self.patterns.len()];
        for &(_, k) in &self.instances {
            if let Some(c) = counts.get_mut(k) {
                *c += 1;
            }
        }
        for (k, ((_, usage), count)) in self.patterns.iter().zip(&counts).enumerate() {
            if usage != count {
                return Err(MinerError::InvalidInstantiation(format!(
                    "pattern {k} lists usage {usage} but has {count} instances"
                )));
            }
        }
        let patterns: Vec<Pattern> = self.patterns.iter().map(|(p, _)| p.clone()).collect();
        MiningState::from_instantiation(matrix, EncodingParams::for_matrix(matrix), &patterns, &self.instances)
    }

    pub fn write(&self) -> String {
        let mut out = format!("VOUW-PATTERNS {}\n", self.patterns.len());
        for (p, usage) in &self.patterns {
            let _ = writeln!(out, "P {} {} {} {}", p.rows(), p.cols(), p.cardinality(), usage);
            for c in p.cells() {
                let _ = writeln!(out, "{} {} {}", c.row, c.col, c.symbol);
            }
        }
        let _ = writeln!(out, "I {}", self.instances.len());
        for &((i, j), k) in &self.instances {
            let _ = writeln!(out, "{i} {j} {k}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = Lines::new(text);
        let (n, h) = header(&mut lines, "VOUW-PATTERNS", 1)?;
        let count: usize = field(n, h[0], "pattern count")?;
        let mut patterns = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let (n, h) = header(&mut lines, "P", 4)?;
            let rows: u32 = field(n, h[0], "pattern rows")?;
            let cols: u32 = field(n, h[1], "pattern columns")?;
            let card: usize = field(n, h[2], "cardinality")?;
            let usage: u64 = field(n, h[3], "usage")?;
            let mut cells = Vec::with_capacity(card.min(1 << 16));
            for _ in 0..card {
                let (m, t) = lines.next("a pattern element")?;
                if t.len() != 3 {
                    return parse_err(m, "expected `<row> <col> <symbol>`");
                }
                let r: i64 = field(m, t[0], "row")?;
                let c: i64 = field(m, t[1], "column")?;
                let s: u32 = field(m, t[2], "symbol")?;
                if r < 0 || c < 0 || r >= rows as i64 || c >= cols as i64 {
                    return parse_err(m, format!("element ({r}, {c}) lies outside the {rows}x{cols} box"));
                }
                cells.push((r, c, s));
            }
            let pattern = Pattern::from_cells(cells).or_else(|e| parse_err(n, e.to_string()))?;
            if pattern.rows() != rows || pattern.cols() != cols {
                return parse_err(
                    n,
                    format!("elements span {}x{}, header says {rows}x{cols}", pattern.rows(), pattern.cols()),
                );
            }
            patterns.push((pattern, usage));
        }
        let (n, h) = header(&mut lines, "I", 1)?;
        let count: usize = field(n, h[0], "instance count")?;
        let mut instances = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let (m, t) = lines.next("an instance")?;
            if t.len() != 3 {
                return parse_err(m, "expected `<i> <j> <pattern-index>`");
            }
            let i: usize = field(m, t[0], "row")?;
            let j: usize = field(m, t[1], "column")?;
            let k: usize = field(m, t[2], "pattern index")?;
            if k >= patterns.len() {
                return parse_err(m, format!("pattern index {k} out of range (have {})", patterns.len()));
            }
            instances.push(((i, j), k));
        }
        lines.finish()?;
        Ok(PatternSet { patterns, instances })
    }
}
