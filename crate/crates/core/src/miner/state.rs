use std::cell::RefCell;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use super::MinerError;
use crate::encoding::{
    instantiation_length, log_gamma_eps, merge_gain_with, model_length, shape_length, universal_integer,
    EncodingParams, GainTerms, LengthReport, MergeBits, MergeCounts,
};
use crate::grid::{instantiate, union_pattern, Matrix, Offset, Pattern, Position, SparseOverlay, Symbol};

pub(crate) const EMPTY: u32 = u32::MAX;

/// Handle of a pattern in a [`MiningState`]. Ids are never reused within
/// one state, so a stale id simply stops resolving.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternId(pub(crate) u32);

impl PatternId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A proposed merge: every instance of `x` whose posterior neighbour at
/// pivot offset `delta` is an instance of `y`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub x: PatternId,
    pub y: PatternId,
    pub delta: Offset,
    pub support: u64,
}

/// Result of [`MiningState::apply_merge`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MergeOutcome {
    /// The union pattern `Z`.
    pub pattern: PatternId,
    /// Number of `(x, y)` pairs replaced by an instance of `Z`.
    pub replacements: u64,
}

/// Bounding box of a pattern relative to its pivot. The pivot is on the
/// first row, so rows span `0..=row_max`.
#[derive(Copy, Clone, Debug)]
pub(crate) struct Extent {
    pub row_max: i32,
    pub col_min: i32,
    pub col_max: i32,
}

#[derive(Clone, Debug)]
pub(crate) struct PatternSlot {
    pub pattern: Pattern,
    pub usage: u64,
    pub bits: f64,
    pub fingerprint: u64,
    /// Elements relative to the pivot, row-major.
    pub rel: Vec<(i32, i32, Symbol)>,
    /// Empty positions 8-adjacent to the pattern, relative to the pivot.
    pub halo: Vec<(i32, i32)>,
    pub extent: Extent,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of one element relative to the pivot. Pattern fingerprints are the
/// wrapping sum over elements, so the fingerprint of a union is the sum of
/// the fingerprints of its (shifted) parts.
pub(crate) fn cell_hash(dr: i32, dc: i32, symbol: Symbol) -> u64 {
    let key = ((dr as u32 as u64) << 32 | dc as u32 as u64) ^ (symbol as u64).wrapping_mul(0xd6e8_feb8_6659_fd93);
    mix64(key ^ mix64(symbol as u64))
}

impl PatternSlot {
    fn new(pattern: Pattern, params: &EncodingParams) -> Self {
        let rel: Vec<_> = pattern.relative_cells().collect();
        let fingerprint = rel.iter().fold(0u64, |acc, &(r, c, s)| acc.wrapping_add(cell_hash(r, c, s)));
        let occupied: FxHashSet<(i32, i32)> = rel.iter().map(|&(r, c, _)| (r, c)).collect();
        let mut halo: Vec<(i32, i32)> = rel
            .iter()
            .flat_map(|&(r, c, _)| (-1..=1).flat_map(move |a| (-1..=1).map(move |b| (r + a, c + b))))
            .filter(|p| !occupied.contains(p))
            .collect();
        halo.sort_unstable();
        halo.dedup();
        let extent = Extent {
            row_max: rel.iter().map(|c| c.0).max().unwrap(),
            col_min: rel.iter().map(|c| c.1).min().unwrap(),
            col_max: rel.iter().map(|c| c.1).max().unwrap(),
        };
        let bits = crate::encoding::pattern_length(&pattern, params);
        PatternSlot { pattern, usage: 0, bits, fingerprint, rel, halo, extent }
    }
}

/// Memoized code-length terms. Every entry is a pure function of its key.
#[derive(Clone, Debug)]
pub(crate) struct Tables {
    epsilon: f64,
    log_g1: Arc<Vec<f64>>,
    universal: Arc<Vec<f64>>,
    log_g: RefCell<FxHashMap<(u64, u64), f64>>,
    shapes: RefCell<FxHashMap<(u64, u64), f64>>,
}

impl Tables {
    fn new(cells: usize, epsilon: f64) -> Self {
        let log_g1 = (0..=cells as u64).map(|u| log_gamma_eps(u, 1, epsilon)).collect();
        let universal = (0..=cells as u64 + 1).map(|n| universal_integer(n.max(1)).expect("n >= 1")).collect();
        Tables {
            epsilon,
            log_g1: Arc::new(log_g1),
            universal: Arc::new(universal),
            log_g: RefCell::default(),
            shapes: RefCell::default(),
        }
    }

    fn shape_length(&self, area: u64, card: u64, params: &EncodingParams) -> f64 {
        *self.shapes.borrow_mut().entry((area, card)).or_insert_with(|| shape_length(area, card, params))
    }
}

impl GainTerms for Tables {
    fn log_g(&self, a: u64, b: u64) -> f64 {
        if b == 1 {
            return self.log_g1[a as usize];
        }
        *self.log_g.borrow_mut().entry((a, b)).or_insert_with(|| log_gamma_eps(a, b, self.epsilon))
    }

    fn universal(&self, n: u64) -> f64 {
        self.universal[n as usize]
    }
}

/// Model `H`, instantiation `I` and the bookkeeping needed to evaluate
/// merges quickly.
///
/// `inst` maps every pivot position to its pattern; `owner` maps every
/// matrix cell to the pivot of the instance covering it. Together with the
/// model they reconstruct the input matrix exactly.
#[derive(Clone, Debug)]
pub struct MiningState {
    matrix: Arc<Matrix>,
    params: EncodingParams,
    pub(crate) slots: Vec<Option<PatternSlot>>,
    by_fingerprint: FxHashMap<u64, Vec<PatternId>>,
    pub(crate) inst: Vec<u32>,
    pub(crate) owner: Vec<u32>,
    model_size: u64,
    instance_count: u64,
    tables: Tables,
    baseline_bits: f64,
}

impl MiningState {
    /// Baseline state: one singleton pattern per occurring symbol and one
    /// instance per matrix cell.
    pub fn new(matrix: &Matrix) -> Self {
        MiningState::with_params(matrix, EncodingParams::for_matrix(matrix))
    }

    pub fn with_params(matrix: &Matrix, params: EncodingParams) -> Self {
        let mut state = MiningState::empty(matrix, params);
        let mut ids = vec![EMPTY; matrix.alphabet_size() as usize];
        for s in matrix.distinct_symbols() {
            ids[s as usize] = state.intern(Pattern::singleton(s)).0;
        }
        for (idx, &s) in matrix.cells().iter().enumerate() {
            let id = ids[s as usize];
            state.inst[idx] = id;
            state.owner[idx] = idx as u32;
            state.slot_mut(PatternId(id)).usage += 1;
        }
        state.refresh_counts();
        state.baseline_bits = state.total_bits();
        state
    }

    /// Rebuilds a state from an explicit model and a list of
    /// `(pivot position, pattern index)` instances. The instances must be
    /// well-defined, pairwise non-overlapping and reproduce `matrix`.
    pub fn from_instantiation(
        matrix: &Matrix,
        params: EncodingParams,
        patterns: &[Pattern],
        instances: &[(Position, usize)],
    ) -> Result<Self, MinerError> {
        let mut state = MiningState::empty(matrix, params);
        let mut ids = Vec::with_capacity(patterns.len());
        for p in patterns {
            if state.lookup(p).is_some() {
                return Err(MinerError::InvalidInstantiation(format!("pattern listed twice:\n{p}")));
            }
            ids.push(state.intern(p.clone()));
        }
        let cols = matrix.cols();
        for &((r, c), index) in instances {
            let id = *ids.get(index).ok_or_else(|| {
                MinerError::InvalidInstantiation(format!("instance at ({r}, {c}) names pattern {index}"))
            })?;
            let overlay = instantiate(&patterns[index], (r, c), matrix.dims())?;
            let pivot = r * cols + c;
            if state.inst[pivot] != EMPTY {
                return Err(MinerError::InvalidInstantiation(format!("two instances pivot at ({r}, {c})")));
            }
            for ((i, j), s) in overlay.entries() {
                let cell = i * cols + j;
                if state.owner[cell] != EMPTY {
                    return Err(crate::grid::GridError::OverlapError { row: i, col: j }.into());
                }
                if matrix.get(i, j) != s {
                    return Err(MinerError::InvalidInstantiation(format!(
                        "instance at ({r}, {c}) places {s} at ({i}, {j}) but the matrix holds {}",
                        matrix.get(i, j)
                    )));
                }
                state.owner[cell] = pivot as u32;
            }
            state.inst[pivot] = id.0;
            state.slot_mut(id).usage += 1;
        }
        if let Some(cell) = state.owner.iter().position(|&o| o == EMPTY) {
            return Err(MinerError::InvalidInstantiation(format!(
                "cell ({}, {}) is not covered by any instance",
                cell / cols,
                cell % cols
            )));
        }
        if let Some(unused) = ids.iter().find(|id| state.slot(**id).usage == 0) {
            return Err(MinerError::InvalidInstantiation(format!("pattern {} is never used", unused.0)));
        }
        state.refresh_counts();
        state.baseline_bits = MiningState::with_params(matrix, params).total_bits();
        Ok(state)
    }

    fn empty(matrix: &Matrix, params: EncodingParams) -> Self {
        let cells = matrix.rows() * matrix.cols();
        MiningState {
            matrix: Arc::new(matrix.clone()),
            params,
            slots: Vec::new(),
            by_fingerprint: FxHashMap::default(),
            inst: vec![EMPTY; cells],
            owner: vec![EMPTY; cells],
            model_size: 0,
            instance_count: 0,
            tables: Tables::new(cells, params.epsilon()),
            baseline_bits: 0.0,
        }
    }

    fn refresh_counts(&mut self) {
        self.model_size = self.slots.iter().flatten().filter(|s| s.usage > 0).count() as u64;
        self.instance_count = self.slots.iter().flatten().map(|s| s.usage).sum();
    }

    pub(crate) fn slot(&self, id: PatternId) -> &PatternSlot {
        self.slots[id.index()].as_ref().expect("live pattern id")
    }

    fn slot_mut(&mut self, id: PatternId) -> &mut PatternSlot {
        self.slots[id.index()].as_mut().expect("live pattern id")
    }

    pub(crate) fn live_slot(&self, id: PatternId) -> Result<&PatternSlot, MinerError> {
        self.slots.get(id.index()).and_then(|s| s.as_ref()).ok_or(MinerError::UnknownPattern(id.0))
    }

    /// Finds the id of a pattern already known to the state.
    pub fn lookup(&self, pattern: &Pattern) -> Option<PatternId> {
        let fp = pattern.relative_cells().fold(0u64, |acc, (r, c, s)| acc.wrapping_add(cell_hash(r, c, s)));
        self.by_fingerprint.get(&fp)?.iter().copied().find(|&id| &self.slot(id).pattern == pattern)
    }

    /// Returns the id for `pattern`, creating an unused slot if needed.
    fn intern(&mut self, pattern: Pattern) -> PatternId {
        if let Some(id) = self.lookup(&pattern) {
            return id;
        }
        let id = PatternId(self.slots.len() as u32);
        let slot = PatternSlot::new(pattern, &self.params);
        self.by_fingerprint.entry(slot.fingerprint).or_default().push(id);
        self.slots.push(Some(slot));
        id
    }

    fn retire(&mut self, id: PatternId) {
        let slot = self.slots[id.index()].take().expect("live pattern id");
        if let Some(ids) = self.by_fingerprint.get_mut(&slot.fingerprint) {
            ids.retain(|&other| other != id);
            if ids.is_empty() {
                self.by_fingerprint.remove(&slot.fingerprint);
            }
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn dims(&self) -> (usize, usize) {
        self.matrix.dims()
    }

    /// `|H|`.
    pub fn model_size(&self) -> u64 {
        self.model_size
    }

    /// `|I|`: number of non-empty instantiation cells.
    pub fn instance_count(&self) -> u64 {
        self.instance_count
    }

    pub fn pattern(&self, id: PatternId) -> Option<&Pattern> {
        self.slots.get(id.index()).and_then(|s| s.as_ref()).map(|s| &s.pattern)
    }

    pub fn usage(&self, id: PatternId) -> u64 {
        self.slots.get(id.index()).and_then(|s| s.as_ref()).map_or(0, |s| s.usage)
    }

    /// `L_p` of a model pattern.
    pub fn pattern_bits(&self, id: PatternId) -> Option<f64> {
        self.slots.get(id.index()).and_then(|s| s.as_ref()).map(|s| s.bits)
    }

    /// Model patterns with their usages, in id order.
    pub fn model(&self) -> impl Iterator<Item = (PatternId, &Pattern, u64)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().filter(|s| s.usage > 0).map(|s| (PatternId(i as u32), &s.pattern, s.usage)))
    }

    /// Pattern pivoting at `at`, if any.
    pub fn instance_at(&self, at: Position) -> Option<PatternId> {
        let id = self.inst[at.0 * self.matrix.cols() + at.1];
        (id != EMPTY).then_some(PatternId(id))
    }

    /// All instances as `(pivot, pattern)`, in lexicographic pivot order.
    pub fn instances(&self) -> impl Iterator<Item = (Position, PatternId)> + '_ {
        let cols = self.matrix.cols();
        self.inst
            .iter()
            .enumerate()
            .filter(|(_, &id)| id != EMPTY)
            .map(move |(idx, &id)| ((idx / cols, idx % cols), PatternId(id)))
    }

    /// Pivot positions of all instances of `id`, in lexicographic order.
    pub fn positions_of(&self, id: PatternId) -> Vec<Position> {
        self.instances().filter(|&(_, p)| p == id).map(|(pos, _)| pos).collect()
    }

    /// Pivot of the instance covering matrix cell `at`.
    pub fn owner_of(&self, at: Position) -> Position {
        let cols = self.matrix.cols();
        let o = self.owner[at.0 * cols + at.1] as usize;
        (o / cols, o % cols)
    }

    /// `L1(H) + L2(I)` from the cached counts.
    pub fn total_bits(&self) -> f64 {
        let report = self.lengths();
        report.total_bits
    }

    /// Description lengths from the cached per-pattern lengths and usages.
    pub fn lengths(&self) -> LengthReport {
        let mut pattern_bits = 0.0;
        let mut usage_bits = 0.0;
        for s in self.slots.iter().flatten().filter(|s| s.usage > 0) {
            pattern_bits += s.bits;
            usage_bits += self.tables.log_g1[s.usage as usize];
        }
        let model = self.tables.universal(self.model_size.max(1)) + pattern_bits;
        let inst = self.params.index_bits() - usage_bits + self.tables.log_g(self.instance_count, self.model_size);
        LengthReport::new(model, inst, self.baseline_bits.max(f64::MIN_POSITIVE))
    }

    /// Description lengths recomputed from scratch: usages are recounted
    /// from the instantiation and every pattern length is re-derived.
    pub fn recompute_lengths(&self) -> LengthReport {
        let mut usage: FxHashMap<u32, u64> = FxHashMap::default();
        for &id in self.inst.iter().filter(|&&id| id != EMPTY) {
            *usage.entry(id).or_default() += 1;
        }
        let mut ids: Vec<u32> = usage.keys().copied().collect();
        ids.sort_unstable();
        let patterns: Vec<&Pattern> = ids.iter().map(|&id| &self.slot(PatternId(id)).pattern).collect();
        let model = model_length(patterns.iter().copied(), &self.params).expect("non-empty model");
        let inst = instantiation_length(ids.iter().map(|id| usage[id]), &self.params);
        LengthReport::new(model, inst, self.baseline_bits.max(f64::MIN_POSITIVE))
    }

    /// Superposes all instances. Fails if any two overlap or if some cell
    /// is left uncovered.
    pub fn reconstruct(&self) -> Result<Matrix, MinerError> {
        let (rows, cols) = self.matrix.dims();
        let mut acc = SparseOverlay::new(rows, cols);
        for (pos, id) in self.instances() {
            let overlay = instantiate(&self.slot(id).pattern, pos, (rows, cols))?;
            for (at, s) in overlay.entries() {
                acc.insert(at, s)?;
            }
        }
        if acc.len() != rows * cols {
            return Err(MinerError::InvalidInstantiation(format!(
                "instances cover {} of {} cells",
                acc.len(),
                rows * cols
            )));
        }
        let cells = acc.entries().map(|(_, s)| s).collect();
        Ok(Matrix::new(rows, cols, self.matrix.alphabet_size(), cells)?)
    }

    /// True when the instances reproduce the input matrix exactly.
    pub fn is_lossless(&self) -> bool {
        self.reconstruct().map(|m| m == *self.matrix).unwrap_or(false)
    }

    /// Shape `(area, cardinality)` of the union of `x` and `y` at `delta`,
    /// without building it.
    pub(crate) fn union_shape(&self, x: &PatternSlot, y: &PatternSlot, delta: Offset) -> (u64, u64) {
        let row_max = x.extent.row_max.max(delta.di + y.extent.row_max);
        let row_min = delta.di.min(0);
        let col_min = x.extent.col_min.min(delta.dj + y.extent.col_min);
        let col_max = x.extent.col_max.max(delta.dj + y.extent.col_max);
        let area = (row_max - row_min + 1) as u64 * (col_max - col_min + 1) as u64;
        (area, (x.rel.len() + y.rel.len()) as u64)
    }

    /// Existing model pattern equal to the union of a candidate, if any.
    pub(crate) fn existing_union(&self, x: &PatternSlot, y: &PatternSlot, delta: Offset) -> Option<PatternId> {
        let fp = y
            .rel
            .iter()
            .fold(x.fingerprint, |acc, &(r, c, s)| acc.wrapping_add(cell_hash(r + delta.di, c + delta.dj, s)));
        let ids = self.by_fingerprint.get(&fp)?;
        let mut union: Vec<(i32, i32, Symbol)> = x.rel.clone();
        union.extend(y.rel.iter().map(|&(r, c, s)| (r + delta.di, c + delta.dj, s)));
        union.sort_unstable();
        ids.iter().copied().find(|&id| self.slot(id).rel == union)
    }

    /// Gain of a candidate: how many bits the total description length
    /// drops if it is merged with its current support.
    pub fn gain(&self, c: &Candidate) -> Result<f64, MinerError> {
        let x = self.live_slot(c.x)?;
        let y = self.live_slot(c.y)?;
        let (area, card) = self.union_shape(x, y, c.delta);
        let z_bits = self.tables.shape_length(area, card, &self.params);
        let usage_z = self.existing_union(x, y, c.delta).map_or(0, |id| self.slot(id).usage);
        let counts = MergeCounts {
            usage_x: x.usage,
            usage_y: y.usage,
            usage_z,
            support: c.support,
            self_merge: c.x == c.y,
            instances: self.instance_count,
            patterns: self.model_size,
        };
        let bits = MergeBits { x: x.bits, y: y.bits, z: z_bits };
        Ok(merge_gain_with(&counts, &bits, &self.tables)?)
    }

    /// Disjoint `(x pivot, y pivot)` cell-index pairs that merging `c`
    /// replaces, scanning `x` pivots in lexicographic order. An instance
    /// takes part in at most one pair.
    pub(crate) fn merge_pairs(&self, c: &Candidate) -> Vec<(usize, usize)> {
        let (rows, cols) = self.matrix.dims();
        let mut consumed = FxHashSet::default();
        let mut pairs = Vec::new();
        for (p, &id) in self.inst.iter().enumerate() {
            if id != c.x.0 || consumed.contains(&p) {
                continue;
            }
            let Some((qr, qc)) = c.delta.apply((p / cols, p % cols), (rows, cols)) else { continue };
            let q = qr * cols + qc;
            if self.inst[q] == c.y.0 && !consumed.contains(&q) {
                consumed.insert(p);
                consumed.insert(q);
                pairs.push((p, q));
            }
        }
        pairs
    }

    /// Number of replacements merging `c` would perform right now.
    pub fn current_support(&self, c: &Candidate) -> u64 {
        self.merge_pairs(c).len() as u64
    }

    /// Merges every matching `(x, y)` pair of `c` into an instance of the
    /// union pattern `Z` pivoting at the `x` pivot. Patterns whose usage
    /// drops to zero leave the model.
    pub fn apply_merge(&mut self, c: &Candidate) -> Result<MergeOutcome, MinerError> {
        let x = self.live_slot(c.x)?;
        let y = self.live_slot(c.y)?;
        if !c.delta.is_posterior() {
            return Err(MinerError::NotPosterior(c.delta));
        }
        let z_pattern = union_pattern(&x.pattern, &y.pattern, c.delta)?;
        let pairs = self.merge_pairs(c);
        if pairs.is_empty() {
            return Err(MinerError::StaleCandidate);
        }
        let z = self.intern(z_pattern);
        let cols = self.matrix.cols() as i64;
        let y_rel: Vec<(i32, i32)> = self.slot(c.y).rel.iter().map(|&(r, col, _)| (r, col)).collect();
        for &(p, q) in &pairs {
            self.inst[p] = z.0;
            self.inst[q] = EMPTY;
            for &(dr, dc) in &y_rel {
                let cell = q as i64 + dr as i64 * cols + dc as i64;
                self.owner[cell as usize] = p as u32;
            }
        }
        let n = pairs.len() as u64;
        let was_new = self.slot(z).usage == 0;
        self.slot_mut(z).usage += n;
        self.slot_mut(c.x).usage -= n;
        self.slot_mut(c.y).usage -= n;
        self.instance_count -= n;
        if was_new {
            self.model_size += 1;
        }
        for id in [c.x, c.y] {
            if self.slots[id.index()].as_ref().is_some_and(|s| s.usage == 0) {
                self.retire(id);
                self.model_size -= 1;
            }
        }
        Ok(MergeOutcome { pattern: z, replacements: n })
    }
}
