//! Peripheries and candidate enumeration.

use rustc_hash::FxHashMap;

use super::state::{Candidate, MiningState, PatternId, EMPTY};
use crate::grid::{Offset, Pattern, Position};

/// Linear index of a posterior offset of `x` relative to itself:
/// `e = (2 N_X + 1) δ_i + δ_j + N_X`.
pub fn overlap_coefficient(x: &Pattern, delta: Offset) -> usize {
    debug_assert!(delta.is_posterior(), "overlap coefficient of an anterior offset");
    let n = x.cols() as i64;
    ((2 * n + 1) * delta.di as i64 + delta.dj as i64 + n) as usize
}

/// Per-instance bit vectors `V(x)` remembering which self-overlap
/// coefficients have already been counted in the current pass.
#[derive(Clone, Debug, Default)]
pub struct OverlapLedger {
    bits: FxHashMap<usize, Vec<u64>>,
}

impl OverlapLedger {
    /// Number of coefficients a vector for `x` must hold:
    /// `(2 N_X + 1)(M_X + 1)`.
    pub fn capacity_for(x: &Pattern) -> usize {
        (2 * x.cols() as usize + 1) * (x.rows() as usize + 1)
    }

    pub fn is_marked(&self, instance: usize, e: usize) -> bool {
        self.bits.get(&instance).is_some_and(|v| v.get(e / 64).is_some_and(|w| w >> (e % 64) & 1 == 1))
    }

    pub fn mark(&mut self, instance: usize, e: usize, capacity: usize) {
        let words = capacity.max(e + 1).div_ceil(64);
        let v = self.bits.entry(instance).or_insert_with(|| vec![0; words]);
        if v.len() <= e / 64 {
            v.resize(e / 64 + 1, 0);
        }
        v[e / 64] |= 1 << (e % 64);
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }
}

impl MiningState {
    /// Pivots (cell indices) of the instances adjacent to the instance
    /// pivoting at cell `p`, deduplicated, in discovery order.
    pub(crate) fn neighbour_pivots(&self, p: usize, out: &mut Vec<u32>) {
        out.clear();
        let id = self.inst[p];
        if id == EMPTY {
            return;
        }
        let (rows, cols) = self.dims();
        let (pr, pc) = ((p / cols) as i32, (p % cols) as i32);
        for &(dr, dc) in &self.slot(PatternId(id)).halo {
            let (r, c) = (pr + dr, pc + dc);
            if r < 0 || c < 0 || r >= rows as i32 || c >= cols as i32 {
                continue;
            }
            let o = self.owner[r as usize * cols + c as usize];
            if !out.contains(&o) {
                out.push(o);
            }
        }
    }

    fn periphery_filtered(&self, at: Position, keep: impl Fn(usize, usize) -> bool) -> Vec<(Position, PatternId)> {
        let cols = self.dims().1;
        let p = at.0 * cols + at.1;
        let mut pivots = Vec::new();
        self.neighbour_pivots(p, &mut pivots);
        let mut out: Vec<(Position, PatternId)> = pivots
            .into_iter()
            .map(|o| o as usize)
            .filter(|&o| keep(p, o))
            .map(|o| ((o / cols, o % cols), PatternId(self.inst[o])))
            .collect();
        out.sort_unstable();
        out
    }

    /// Instances whose elements touch the instance pivoting at `at`
    /// (horizontally, vertically or diagonally). Empty if no instance
    /// pivots at `at`.
    pub fn periphery(&self, at: Position) -> Vec<(Position, PatternId)> {
        self.periphery_filtered(at, |_, _| true)
    }

    /// Peripheral instances whose pivot comes after `at`.
    pub fn posterior_periphery(&self, at: Position) -> Vec<(Position, PatternId)> {
        self.periphery_filtered(at, |p, o| o > p)
    }

    /// Peripheral instances whose pivot comes before `at`.
    pub fn anterior_periphery(&self, at: Position) -> Vec<(Position, PatternId)> {
        self.periphery_filtered(at, |p, o| o < p)
    }

    /// Enumerates all candidates with their supports in one lexicographic
    /// scan over the instantiation. Each instance is paired only with its
    /// posterior periphery, so mirrored duplicates never appear. For
    /// self-candidates `(X, X, δ)` the overlap ledger ensures only pairs
    /// that can be merged simultaneously are counted.
    ///
    /// Candidates are returned in order of first discovery.
    pub fn find_candidates(&self) -> Vec<Candidate> {
        let cols = self.dims().1;
        let mut index: FxHashMap<(u32, u32, Offset), usize> =
            FxHashMap::with_capacity_and_hasher(self.instance_count() as usize, Default::default());
        let mut found: Vec<Candidate> = Vec::new();
        let mut ledger = OverlapLedger::default();
        let mut pivots = Vec::with_capacity(16);

        for p in 0..self.inst.len() {
            let x = self.inst[p];
            if x == EMPTY {
                continue;
            }
            self.neighbour_pivots(p, &mut pivots);
            let (pr, pc) = (p / cols, p % cols);
            for &o in &pivots {
                let o = o as usize;
                if o <= p {
                    continue;
                }
                let y = self.inst[o];
                let delta = Offset::between((pr, pc), (o / cols, o % cols));
                if x == y {
                    let pattern = &self.slot(PatternId(x)).pattern;
                    let e = overlap_coefficient(pattern, delta);
                    if ledger.is_marked(p, e) {
                        continue;
                    }
                    ledger.mark(o, e, OverlapLedger::capacity_for(pattern));
                }
                match index.get(&(x, y, delta)) {
                    Some(&i) => found[i].support += 1,
                    None => {
                        index.insert((x, y, delta), found.len());
                        found.push(Candidate { x: PatternId(x), y: PatternId(y), delta, support: 1 });
                    }
                }
            }
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Matrix, Pattern};
    use std::collections::BTreeSet;

    fn state(rows: &[&[u32]], alphabet: u32) -> MiningState {
        MiningState::new(&Matrix::from_rows(alphabet, rows).unwrap())
    }

    fn positions(v: Vec<(Position, PatternId)>) -> Vec<Position> {
        v.into_iter().map(|(p, _)| p).collect()
    }

    #[test]
    fn peripheries_of_small_grid() {
        let s = state(&[&[0, 1], &[2, 3]], 4);
        assert_eq!(positions(s.posterior_periphery((0, 0))), vec![(0, 1), (1, 0), (1, 1)]);
        assert!(s.posterior_periphery((1, 1)).is_empty());
        assert_eq!(positions(s.anterior_periphery((1, 1))), vec![(0, 0), (0, 1), (1, 0)]);
        assert!(s.anterior_periphery((0, 0)).is_empty());
    }

    #[test]
    fn separated_instances_are_not_peripheral() {
        let mut s = state(&[&[0, 1, 2, 3, 4]], 5);
        assert_eq!(positions(s.posterior_periphery((0, 0))), vec![(0, 1)]);
        // the domino covering (0,0)-(0,1) is two cells away from (0,4)
        let c = Candidate {
            x: s.instance_at((0, 0)).unwrap(),
            y: s.instance_at((0, 1)).unwrap(),
            delta: Offset::new(0, 1),
            support: 1,
        };
        s.apply_merge(&c).unwrap();
        assert_eq!(positions(s.posterior_periphery((0, 0))), vec![(0, 2)]);
        assert!(!positions(s.periphery((0, 0))).contains(&(0, 4)));
        assert!(!positions(s.periphery((0, 4))).contains(&(0, 0)));
    }

    #[test]
    fn overlap_coefficients() {
        let two_wide = Pattern::from_cells([(0, 0, 1), (0, 1, 1)]).unwrap();
        assert_eq!(overlap_coefficient(&two_wide, Offset::new(0, 1)), 3);
        assert_eq!(overlap_coefficient(&two_wide, Offset::new(1, -2)), 5);
        assert_eq!(overlap_coefficient(&Pattern::singleton(0), Offset::new(1, 0)), 4);
    }

    #[test]
    fn overlap_coefficient_is_injective_over_posterior_adjacent_offsets() {
        let x = Pattern::from_cells([(0, 1, 1), (1, 0, 1), (1, 1, 1), (2, 2, 1)]).unwrap();
        let (m, n) = (x.rows() as i32, x.cols() as i32);
        let mut seen = BTreeSet::new();
        for di in 0..=m {
            for dj in -n..=n {
                let d = Offset::new(di, dj);
                if d.is_posterior() {
                    let e = overlap_coefficient(&x, d);
                    assert!(e < OverlapLedger::capacity_for(&x));
                    assert!(seen.insert(e));
                }
            }
        }
    }

    #[test]
    fn ledger_marks() {
        let mut l = OverlapLedger::default();
        assert!(!l.is_marked(3, 70));
        l.mark(3, 70, 9);
        assert!(l.is_marked(3, 70));
        assert!(!l.is_marked(3, 69));
        l.clear();
        assert!(!l.is_marked(3, 70));
    }

    fn support_of(s: &MiningState, x: u32, y: u32, delta: Offset) -> Option<u64> {
        let sx = s.lookup(&Pattern::singleton(x))?;
        let sy = s.lookup(&Pattern::singleton(y))?;
        s.find_candidates().into_iter().find(|c| c.x == sx && c.y == sy && c.delta == delta).map(|c| c.support)
    }

    #[test]
    fn line_of_five_supports_two() {
        let s = state(&[&[0, 0, 0, 0, 0]], 1);
        let cands = s.find_candidates();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].support, 2);
        assert_eq!(cands[0].delta, Offset::new(0, 1));
    }

    #[test]
    fn two_by_two_candidates() {
        // [[a, b], [a, b]] with a = 0, b = 1
        let s = state(&[&[0, 1], &[0, 1]], 2);
        assert_eq!(support_of(&s, 0, 1, Offset::new(0, 1)), Some(2));
        assert_eq!(support_of(&s, 0, 0, Offset::new(1, 0)), Some(1));
        assert_eq!(support_of(&s, 1, 1, Offset::new(1, 0)), Some(1));
        assert_eq!(support_of(&s, 0, 1, Offset::new(1, 1)), Some(1));
        assert_eq!(support_of(&s, 1, 0, Offset::new(1, -1)), Some(1));
        assert_eq!(s.find_candidates().len(), 5);
    }

    #[test]
    fn distinct_symbols_give_unit_supports() {
        let s = state(&[&[0, 1, 2], &[3, 4, 5], &[6, 7, 8]], 9);
        let cands = s.find_candidates();
        assert!(cands.iter().all(|c| c.support == 1));
        // 2 horizontal per row, 2 vertical per column, 4 + 4 diagonals
        assert_eq!(cands.len(), 6 + 6 + 8);
    }

    #[test]
    fn candidates_are_canonical() {
        let s = state(&[&[0, 1, 0, 1], &[1, 0, 1, 0], &[0, 0, 1, 1]], 2);
        let cands = s.find_candidates();
        for c in &cands {
            assert!(c.delta.is_posterior());
            assert!(!cands.iter().any(|d| d.x == c.y && d.y == c.x && d.delta == -c.delta));
        }
    }
}
