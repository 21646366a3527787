//! Matrices, patterns, offsets and instances.
//!
//! A [`Pattern`] is a sparse submatrix: a bounding box plus the set of its
//! non-empty elements. Empty elements are never stored. Placing a pattern
//! into an `M×N` frame with its pivot at some position gives an instance,
//! represented here as a [`SparseOverlay`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

/// A symbol of the matrix alphabet, in `[0, alphabet_size)`.
pub type Symbol = u32;

/// A `(row, col)` position inside a matrix.
pub type Position = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("a matrix needs at least one row and one column")]
    EmptyMatrix,
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("symbol {symbol} at ({row}, {col}) is outside the alphabet of size {alphabet_size}")]
    SymbolOutOfRange { row: usize, col: usize, symbol: Symbol, alphabet_size: u32 },
    #[error("a pattern needs at least one element")]
    EmptyPattern,
    #[error("position ({row}, {col}) occurs more than once")]
    DuplicateCell { row: i64, col: i64 },
    #[error("element ({row}, {col}) has no horizontally, vertically or diagonally adjacent element")]
    AdjacencyViolation { row: u32, col: u32 },
    #[error("instance does not fit inside the {rows}x{cols} matrix")]
    OutOfBounds { rows: usize, cols: usize },
    #[error("overlay has no entries")]
    EmptyOverlay,
    #[error("instances overlap at ({row}, {col})")]
    OverlapError { row: usize, col: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimMismatch { left_rows: usize, left_cols: usize, right_rows: usize, right_cols: usize },
}

/// Dense `M×N` matrix of symbols, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    alphabet_size: u32,
    cells: Vec<Symbol>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, alphabet_size: u32, cells: Vec<Symbol>) -> Result<Self, GridError> {
        if rows == 0 || cols == 0 {
            return Err(GridError::EmptyMatrix);
        }
        if alphabet_size == 0 {
            return Err(GridError::EmptyAlphabet);
        }
        if cells.len() != rows * cols {
            return Err(GridError::CellCount { expected: rows * cols, actual: cells.len() });
        }
        if let Some(idx) = cells.iter().position(|&s| s >= alphabet_size) {
            return Err(GridError::SymbolOutOfRange {
                row: idx / cols,
                col: idx % cols,
                symbol: cells[idx],
                alphabet_size,
            });
        }
        Ok(Matrix { rows, cols, alphabet_size, cells })
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[Symbol]>>(alphabet_size: u32, rows: &[R]) -> Result<Self, GridError> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(GridError::CellCount { expected: rows.len() * cols, actual: cells.len() + row.len() });
            }
            cells.extend_from_slice(row);
        }
        Matrix::new(rows.len(), cols, alphabet_size, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Symbol {
        self.cells[row * self.cols + col]
    }

    /// Distinct symbols that occur in the matrix, ascending.
    pub fn distinct_symbols(&self) -> Vec<Symbol> {
        let mut seen = vec![false; self.alphabet_size as usize];
        for &s in &self.cells {
            seen[s as usize] = true;
        }
        seen.iter().enumerate().filter(|(_, &b)| b).map(|(s, _)| s as Symbol).collect()
    }
}

/// Relative displacement between two positions. Ordered lexicographically.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Offset {
    pub di: i32,
    pub dj: i32,
}

impl Offset {
    pub const fn new(di: i32, dj: i32) -> Self {
        Offset { di, dj }
    }

    /// Displacement from `from` to `to`.
    pub fn between(from: Position, to: Position) -> Self {
        Offset { di: to.0 as i32 - from.0 as i32, dj: to.1 as i32 - from.1 as i32 }
    }

    /// True when the offset points lexicographically after the origin.
    pub fn is_posterior(self) -> bool {
        self > Offset::default()
    }

    pub fn apply(self, at: Position, dims: (usize, usize)) -> Option<Position> {
        let r = at.0 as i64 + self.di as i64;
        let c = at.1 as i64 + self.dj as i64;
        if r < 0 || c < 0 || r >= dims.0 as i64 || c >= dims.1 as i64 {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }
}

impl std::ops::Neg for Offset {
    type Output = Offset;

    fn neg(self) -> Offset {
        Offset { di: -self.di, dj: -self.dj }
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.di, self.dj)
    }
}

/// One non-empty element of a pattern, in bounding-box coordinates.
///
/// The derived ordering is row-major, which is the pivot order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
    pub symbol: Symbol,
}

/// A sparse pattern with a minimal bounding box.
///
/// Invariants: at least one element; the bounding box is the minimal
/// rectangle around the elements; unless the pattern is a singleton, every
/// element has an 8-adjacent neighbour. Equality compares shape and symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    rows: u32,
    cols: u32,
    cells: Vec<Cell>,
}

impl Pattern {
    /// Canonical constructor. Coordinates may be arbitrary (even negative);
    /// the result is translated so that its bounding box starts at `(0, 0)`.
    pub fn from_cells<I>(cells: I) -> Result<Self, GridError>
    where
        I: IntoIterator<Item = (i64, i64, Symbol)>,
    {
        let raw: Vec<(i64, i64, Symbol)> = cells.into_iter().collect();
        if raw.is_empty() {
            return Err(GridError::EmptyPattern);
        }
        let min_r = raw.iter().map(|c| c.0).min().unwrap();
        let max_r = raw.iter().map(|c| c.0).max().unwrap();
        let min_c = raw.iter().map(|c| c.1).min().unwrap();
        let max_c = raw.iter().map(|c| c.1).max().unwrap();

        let mut seen = HashSet::with_capacity(raw.len());
        for &(r, c, _) in &raw {
            if !seen.insert((r, c)) {
                return Err(GridError::DuplicateCell { row: r, col: c });
            }
        }

        let mut norm: Vec<Cell> = raw
            .iter()
            .map(|&(r, c, symbol)| Cell { row: (r - min_r) as u32, col: (c - min_c) as u32, symbol })
            .collect();
        norm.sort_unstable();

        if norm.len() > 1 {
            for cell in &norm {
                let (r, c) = (cell.row as i64 + min_r, cell.col as i64 + min_c);
                let has_neighbour = (-1..=1)
                    .flat_map(|a| (-1..=1).map(move |b| (a, b)))
                    .filter(|&d| d != (0, 0))
                    .any(|(a, b)| seen.contains(&(r + a, c + b)));
                if !has_neighbour {
                    return Err(GridError::AdjacencyViolation { row: cell.row, col: cell.col });
                }
            }
        }

        Ok(Pattern { rows: (max_r - min_r + 1) as u32, cols: (max_c - min_c + 1) as u32, cells: norm })
    }

    pub fn singleton(symbol: Symbol) -> Self {
        Pattern { rows: 1, cols: 1, cells: vec![Cell { row: 0, col: 0, symbol }] }
    }

    /// Bounding box height `M_X`.
    pub fn rows(&self) -> u32 {
        self.rows
    }

    /// Bounding box width `N_X`.
    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn area(&self) -> u64 {
        self.rows as u64 * self.cols as u64
    }

    /// Number of non-empty elements `|X|`.
    pub fn cardinality(&self) -> usize {
        self.cells.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.cells.len() == 1
    }

    /// Non-empty elements in row-major order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// First non-empty element in row-major order.
    pub fn pivot(&self) -> (u32, u32) {
        let c = self.cells[0];
        (c.row, c.col)
    }

    /// Elements as `(d_row, d_col, symbol)` displacements from the pivot.
    pub fn relative_cells(&self) -> impl Iterator<Item = (i32, i32, Symbol)> + '_ {
        let (pr, pc) = self.pivot();
        self.cells.iter().map(move |c| (c.row as i32 - pr as i32, c.col as i32 - pc as i32, c.symbol))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut grid = vec![None; (self.rows * self.cols) as usize];
        for c in &self.cells {
            grid[(c.row * self.cols + c.col) as usize] = Some(c.symbol);
        }
        for r in 0..self.rows {
            if r > 0 {
                writeln!(f)?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                match grid[(r * self.cols + c) as usize] {
                    Some(s) => write!(f, "{s}")?,
                    None => write!(f, ".")?,
                }
            }
        }
        Ok(())
    }
}

/// Sparse `M×N` frame holding the elements of one or more instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseOverlay {
    rows: usize,
    cols: usize,
    entries: BTreeMap<Position, Symbol>,
}

impl SparseOverlay {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseOverlay { rows, cols, entries: BTreeMap::new() }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Inserts an entry. Returns `OutOfBounds` outside the frame and
    /// `OverlapError` if the position is already occupied.
    pub fn insert(&mut self, at: Position, symbol: Symbol) -> Result<(), GridError> {
        if at.0 >= self.rows || at.1 >= self.cols {
            return Err(GridError::OutOfBounds { rows: self.rows, cols: self.cols });
        }
        if self.entries.insert(at, symbol).is_some() {
            return Err(GridError::OverlapError { row: at.0, col: at.1 });
        }
        Ok(())
    }

    pub fn get(&self, at: Position) -> Option<Symbol> {
        self.entries.get(&at).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Position, Symbol)> + '_ {
        self.entries.iter().map(|(&p, &s)| (p, s))
    }
}

/// Places `pattern` so that its pivot lands on `at` inside a `dims` frame.
pub fn instantiate(pattern: &Pattern, at: Position, dims: (usize, usize)) -> Result<SparseOverlay, GridError> {
    let mut overlay = SparseOverlay::new(dims.0, dims.1);
    for (dr, dc, symbol) in pattern.relative_cells() {
        let pos = Offset::new(dr, dc).apply(at, dims).ok_or(GridError::OutOfBounds { rows: dims.0, cols: dims.1 })?;
        overlay.entries.insert(pos, symbol);
    }
    Ok(overlay)
}

/// Inverse of [`instantiate`]: trims the overlay to its pattern and reports
/// the absolute position of the pivot.
pub fn deinstantiate(overlay: &SparseOverlay) -> Result<(Pattern, Position), GridError> {
    let pivot = *overlay.entries.keys().next().ok_or(GridError::EmptyOverlay)?;
    let pattern = Pattern::from_cells(overlay.entries().map(|((r, c), s)| (r as i64, c as i64, s)))?;
    Ok((pattern, pivot))
}

/// Element-wise sum of two overlays; fails when any position is occupied in
/// both, i.e. when the instances overlap.
pub fn superpose(a: &SparseOverlay, b: &SparseOverlay) -> Result<SparseOverlay, GridError> {
    if a.dims() != b.dims() {
        return Err(GridError::DimMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let mut out = a.clone();
    for (pos, symbol) in b.entries() {
        out.insert(pos, symbol)?;
    }
    Ok(out)
}

/// Union of `x` (pivot at the origin) and `y` (pivot displaced by `delta`).
///
/// For a posterior `delta` the pivot of the result coincides with the
/// pivot of `x`.
pub fn union_pattern(x: &Pattern, y: &Pattern, delta: Offset) -> Result<Pattern, GridError> {
    let mut seen = HashSet::with_capacity(x.cardinality() + y.cardinality());
    let mut cells = Vec::with_capacity(x.cardinality() + y.cardinality());
    for (dr, dc, s) in x.relative_cells() {
        seen.insert((dr as i64, dc as i64));
        cells.push((dr as i64, dc as i64, s));
    }
    for (dr, dc, s) in y.relative_cells() {
        let pos = (dr as i64 + delta.di as i64, dc as i64 + delta.dj as i64);
        if !seen.insert(pos) {
            // Report the collision in x's bounding-box frame.
            let (pr, pc) = x.pivot();
            return Err(GridError::OverlapError {
                row: (pos.0 + pr as i64).max(0) as usize,
                col: (pos.1 + pc as i64).max(0) as usize,
            });
        }
        cells.push((pos.0, pos.1, s));
    }
    Pattern::from_cells(cells)
}

/// Boolean `M×N` grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Mask { rows, cols, bits: vec![false; rows * cols] }
    }

    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self, GridError> {
        if bits.len() != rows * cols {
            return Err(GridError::CellCount { expected: rows * cols, actual: bits.len() });
        }
        Ok(Mask { rows, cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(cells: &[(i64, i64, Symbol)]) -> Pattern {
        Pattern::from_cells(cells.iter().copied()).unwrap()
    }

    #[test]
    fn singleton_pattern() {
        let x = p(&[(0, 0, 5)]);
        assert_eq!((x.rows(), x.cols(), x.cardinality()), (1, 1, 1));
        assert_eq!(x, Pattern::singleton(5));
        assert_eq!(x.pivot(), (0, 0));
    }

    #[test]
    fn translation_normalized() {
        let x = p(&[(2, 2, 1), (2, 3, 2), (3, 3, 1)]);
        assert_eq!((x.rows(), x.cols(), x.cardinality()), (2, 2, 3));
        assert_eq!(
            x.cells(),
            &[
                Cell { row: 0, col: 0, symbol: 1 },
                Cell { row: 0, col: 1, symbol: 2 },
                Cell { row: 1, col: 1, symbol: 1 }
            ]
        );
    }

    #[test]
    fn gap_breaks_adjacency() {
        let err = Pattern::from_cells([(0, 0, 1), (0, 2, 1)]).unwrap_err();
        assert!(matches!(err, GridError::AdjacencyViolation { .. }));
        assert_eq!(Pattern::from_cells(Vec::new()).unwrap_err(), GridError::EmptyPattern);
        assert!(matches!(Pattern::from_cells([(0, 0, 1), (0, 0, 2)]), Err(GridError::DuplicateCell { .. })));
    }

    #[test]
    fn diagonal_chain_with_interior_gap_is_valid() {
        // Two diagonal dominoes; the interior column 1 is partially empty.
        let x = p(&[(0, 0, 1), (1, 1, 2), (2, 0, 3)]);
        assert_eq!((x.rows(), x.cols()), (3, 2));
    }

    #[test]
    fn pivot_is_row_major_first() {
        let x = p(&[(0, 1, 2), (1, 0, 3)]);
        assert_eq!(x.pivot(), (0, 1));
        let full = p(&(0..9).map(|i| (i / 3, i % 3, 0)).collect::<Vec<_>>());
        assert_eq!(full.pivot(), (0, 0));
    }

    #[test]
    fn instantiate_examples() {
        let o = instantiate(&Pattern::singleton(7), (3, 4), (8, 8)).unwrap();
        assert_eq!(o.entries().collect::<Vec<_>>(), vec![((3, 4), 7)]);

        let dom = p(&[(0, 0, 1), (0, 1, 2)]);
        let o = instantiate(&dom, (1, 1), (4, 4)).unwrap();
        assert_eq!(o.entries().collect::<Vec<_>>(), vec![((1, 1), 1), ((1, 2), 2)]);

        let anti = p(&[(0, 1, 2), (1, 0, 3)]);
        assert_eq!(instantiate(&anti, (0, 0), (4, 4)).unwrap_err(), GridError::OutOfBounds { rows: 4, cols: 4 });
        assert!(instantiate(&anti, (0, 1), (4, 4)).is_ok());
    }

    #[test]
    fn deinstantiate_examples() {
        let mut o = SparseOverlay::new(8, 8);
        o.insert((3, 4), 7).unwrap();
        assert_eq!(deinstantiate(&o).unwrap(), (Pattern::singleton(7), (3, 4)));

        let mut o = SparseOverlay::new(4, 4);
        o.insert((1, 1), 10).unwrap();
        o.insert((2, 0), 11).unwrap();
        let (x, at) = deinstantiate(&o).unwrap();
        assert_eq!(at, (1, 1));
        assert_eq!((x.rows(), x.cols()), (2, 2));
        assert_eq!(x.cells().iter().map(|c| (c.row, c.col)).collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);

        assert_eq!(deinstantiate(&SparseOverlay::new(2, 2)).unwrap_err(), GridError::EmptyOverlay);
    }

    #[test]
    fn superpose_examples() {
        let mut a = SparseOverlay::new(2, 2);
        a.insert((0, 0), 1).unwrap();
        let mut b = SparseOverlay::new(2, 2);
        b.insert((0, 1), 2).unwrap();
        let s = superpose(&a, &b).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get((0, 1)), Some(2));
        assert_eq!(superpose(&a, &a).unwrap_err(), GridError::OverlapError { row: 0, col: 0 });
        assert!(matches!(superpose(&a, &SparseOverlay::new(3, 3)), Err(GridError::DimMismatch { .. })));
    }

    #[test]
    fn union_of_figure_patterns() {
        // X = [1 2; . 2] at (1,0), Y = [2 2] at (1,1): delta (0,1) would
        // collide, so use Y placed one row lower as in the construction
        // figure: the union has 5 cells and keeps X's pivot.
        let x = p(&[(0, 0, 1), (0, 1, 2), (1, 1, 2)]);
        let y = p(&[(0, 0, 2), (0, 1, 2)]);
        assert!(matches!(union_pattern(&x, &y, Offset::new(0, 1)), Err(GridError::OverlapError { .. })));
        let z = union_pattern(&x, &y, Offset::new(2, 0)).unwrap();
        assert_eq!(z.cardinality(), 5);
        assert_eq!(z.pivot(), (0, 0));
        assert_eq!(z.to_string(), "1 2\n. 2\n2 2");
    }

    #[test]
    fn union_of_singletons() {
        let a = Pattern::singleton(1);
        let b = Pattern::singleton(2);
        let z = union_pattern(&a, &b, Offset::new(0, 1)).unwrap();
        assert_eq!(z, p(&[(0, 0, 1), (0, 1, 2)]));
        assert!(matches!(union_pattern(&a, &b, Offset::new(0, 2)), Err(GridError::AdjacencyViolation { .. })));
        // pivot of X is kept when Y sits to the lower left of it
        let z = union_pattern(&a, &b, Offset::new(1, -1)).unwrap();
        assert_eq!(z.pivot(), (0, 1));
        assert_eq!(z.cells()[0].symbol, 1);
    }

    #[test]
    fn offsets_order_lexicographically() {
        assert!(Offset::new(0, 5) < Offset::new(1, -3));
        assert!(Offset::new(1, -3) < Offset::new(1, 0));
        assert!(Offset::new(0, 1).is_posterior());
        assert!(!Offset::new(0, -1).is_posterior());
        assert!(!Offset::default().is_posterior());
        assert_eq!(-Offset::new(1, -2), Offset::new(-1, 2));
    }

    #[test]
    fn matrix_validation() {
        assert_eq!(Matrix::new(0, 3, 2, vec![]).unwrap_err(), GridError::EmptyMatrix);
        assert!(matches!(Matrix::new(1, 2, 2, vec![0, 2]), Err(GridError::SymbolOutOfRange { col: 1, .. })));
        assert!(matches!(Matrix::new(2, 2, 2, vec![0]), Err(GridError::CellCount { .. })));
        let m = Matrix::from_rows(4, &[[0, 3], [3, 3]]).unwrap();
        assert_eq!(m.distinct_symbols(), vec![0, 3]);
        assert_eq!(m.get(1, 0), 3);
    }

    /// Random 8-connected cell sets built by growing from the origin.
    fn arb_cells() -> impl Strategy<Value = Vec<(i64, i64, Symbol)>> {
        (1usize..12, any::<u64>()).prop_map(|(n, seed)| {
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            let mut cells: Vec<(i64, i64)> = vec![(0, 0)];
            while cells.len() < n {
                let base = cells[(next() % cells.len() as u64) as usize];
                let d = next() % 8;
                let (a, b) = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)][d as usize];
                let cand = (base.0 + a, base.1 + b);
                if !cells.contains(&cand) {
                    cells.push(cand);
                }
            }
            cells.into_iter().map(|(r, c)| (r, c, (next() % 5) as Symbol)).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn instantiate_roundtrip(cells in arb_cells(), r in 0usize..6, c in 0usize..6) {
            let x = Pattern::from_cells(cells).unwrap();
            let dims = (20, 20);
            let at = (r, c + x.pivot().1 as usize);
            let o = instantiate(&x, at, dims).unwrap();
            prop_assert_eq!(o.len(), x.cardinality());
            prop_assert_eq!(o.get(at), Some(x.cells()[0].symbol));
            let (back, pivot) = deinstantiate(&o).unwrap();
            prop_assert_eq!(back, x);
            prop_assert_eq!(pivot, at);
        }

        #[test]
        fn translation_invariance(cells in arb_cells(), a in -50i64..50, b in -50i64..50) {
            let x = Pattern::from_cells(cells.clone()).unwrap();
            let shifted = Pattern::from_cells(cells.into_iter().map(|(r, c, s)| (r + a, c + b, s))).unwrap();
            prop_assert_eq!(&x, &shifted);
            let (pr, pc) = x.pivot();
            prop_assert!(x.cells().iter().all(|cell| (cell.row, cell.col) >= (pr, pc)));
        }

        #[test]
        fn superpose_is_additive_iff_disjoint(
            a in proptest::collection::btree_set((0usize..5, 0usize..5), 0..10),
            b in proptest::collection::btree_set((0usize..5, 0usize..5), 0..10),
        ) {
            let mut oa = SparseOverlay::new(5, 5);
            for &pos in &a { oa.insert(pos, 1).unwrap(); }
            let mut ob = SparseOverlay::new(5, 5);
            for &pos in &b { ob.insert(pos, 2).unwrap(); }
            let union: std::collections::BTreeSet<_> = a.union(&b).collect();
            match superpose(&oa, &ob) {
                Ok(s) => {
                    prop_assert!(a.is_disjoint(&b));
                    prop_assert_eq!(s.len(), a.len() + b.len());
                    prop_assert_eq!(s.len(), union.len());
                }
                Err(GridError::OverlapError { .. }) => prop_assert!(!a.is_disjoint(&b)),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn union_cardinality_is_additive(x in arb_cells(), y in arb_cells(), di in 0i32..4, dj in -4i32..4) {
            let x = Pattern::from_cells(x).unwrap();
            let y = Pattern::from_cells(y).unwrap();
            let delta = Offset::new(di, dj);
            if let Ok(z) = union_pattern(&x, &y, delta) {
                prop_assert_eq!(z.cardinality(), x.cardinality() + y.cardinality());
                if delta.is_posterior() {
                    prop_assert_eq!(z.cells()[0].symbol, x.cells()[0].symbol);
                }
            }
        }
    }
}
