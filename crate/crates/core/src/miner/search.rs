//! Candidate ranking, Best-* selection and local search.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;

use super::state::{Candidate, MiningState, PatternId, EMPTY};
use super::MinerError;
use crate::grid::Offset;

/// A candidate together with its gain in the state it was ranked in.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub gain: f64,
}

/// What [`local_search`] did.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct LocalSearchOutcome {
    /// Pattern the search ended with.
    pub pattern: PatternId,
    /// Number of merges performed.
    pub merges: usize,
}

impl MiningState {
    /// Total order on ranked candidates, best first: higher gain, then
    /// higher support, then pattern fingerprints, then offset.
    pub fn compare_ranked(&self, a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
        let key = |r: &RankedCandidate| {
            let c = r.candidate;
            let fx = self.slots[c.x.index()].as_ref().map_or(0, |s| s.fingerprint);
            let fy = self.slots[c.y.index()].as_ref().map_or(0, |s| s.fingerprint);
            (fx, fy, c.delta, c.x, c.y)
        };
        b.gain.total_cmp(&a.gain).then(b.candidate.support.cmp(&a.candidate.support)).then_with(|| key(a).cmp(&key(b)))
    }

    /// Gains for all candidates, sorted best first.
    pub fn rank_candidates(&self, candidates: &[Candidate]) -> Result<Vec<RankedCandidate>, MinerError> {
        let mut ranked = candidates
            .iter()
            .map(|&candidate| Ok(RankedCandidate { candidate, gain: self.gain(&candidate)? }))
            .collect::<Result<Vec<_>, MinerError>>()?;
        ranked.sort_by(|a, b| self.compare_ranked(a, b));
        Ok(ranked)
    }

    /// Highest-ranked candidate, if there is any.
    pub fn best_candidate(&self, candidates: &[Candidate]) -> Result<Option<RankedCandidate>, MinerError> {
        let mut best: Option<RankedCandidate> = None;
        for &candidate in candidates {
            let r = RankedCandidate { candidate, gain: self.gain(&candidate)? };
            if best.as_ref().is_none_or(|b| self.compare_ranked(&r, b) == Ordering::Less) {
                best = Some(r);
            }
        }
        Ok(best)
    }
}

/// Best-* selection: scans candidates in descending gain order (ties keep
/// their input order) and keeps each one with positive gain that shares no
/// pattern with a candidate kept earlier.
pub fn select_best_star(ranked: &[RankedCandidate]) -> Vec<RankedCandidate> {
    let mut order: Vec<&RankedCandidate> = ranked.iter().filter(|r| r.gain > 0.0).collect();
    order.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    let mut used: Vec<PatternId> = Vec::new();
    let mut kept = Vec::new();
    for r in order {
        let c = r.candidate;
        if used.contains(&c.x) || used.contains(&c.y) {
            continue;
        }
        used.push(c.x);
        used.push(c.y);
        kept.push(*r);
    }
    kept
}

/// Grows a freshly merged pattern `z` by merging neighbours that sit at the
/// same offset around every one of its instances, as long as that
/// improves compression. Each step merges the best such candidate; its
/// support always equals the usage of the pattern being grown.
pub fn local_search(state: &mut MiningState, z: PatternId) -> Result<LocalSearchOutcome, MinerError> {
    let mut current = z;
    let mut merges = 0;
    let mut pivots = Vec::new();
    loop {
        let usage = state.usage(current);
        if usage == 0 {
            break;
        }
        let cols = state.dims().1;
        let mut around: FxHashMap<(u32, Offset), u64> = FxHashMap::default();
        for (p, &id) in state.inst.iter().enumerate() {
            if id != current.0 {
                continue;
            }
            state.neighbour_pivots(p, &mut pivots);
            for &o in &pivots {
                let w = state.inst[o as usize];
                if w == current.0 || w == EMPTY {
                    continue;
                }
                let delta = Offset::between((p / cols, p % cols), (o as usize / cols, o as usize % cols));
                *around.entry((w, delta)).or_default() += 1;
            }
        }
        let mut candidates: Vec<Candidate> = around
            .into_iter()
            .filter(|&(_, count)| count == usage)
            .map(|((w, delta), _)| {
                let w = PatternId(w);
                if delta.is_posterior() {
                    Candidate { x: current, y: w, delta, support: usage }
                } else {
                    Candidate { x: w, y: current, delta: -delta, support: usage }
                }
            })
            .collect();
        // map iteration order is not part of the contract
        candidates.sort_unstable_by_key(|c| (c.x, c.y, c.delta));
        let Some(best) = state.best_candidate(&candidates)? else { break };
        if best.gain <= 0.0 {
            break;
        }
        let outcome = state.apply_merge(&best.candidate)?;
        debug_assert_eq!(outcome.replacements, usage);
        current = outcome.pattern;
        merges += 1;
    }
    Ok(LocalSearchOutcome { pattern: current, merges })
}
