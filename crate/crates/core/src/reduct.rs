//! Exact reducts (minimal hitting sets of the related family), reduct
//! verification and the greedy NIHV heuristic.

use serde::{Deserialize, Serialize};

use crate::approx::{positive_region, positive_region_of};
use crate::bits::CoveringIndexSet;
use crate::related::{minimal_related_sets, related_family, RelatedFamily};
use crate::system::CoveringDecisionSystem;

/// An antichain of covering-index sets, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductSet {
    m: usize,
    reducts: Vec<CoveringIndexSet>,
}

impl ReductSet {
    /// Sorts and deduplicates; the input must already be an antichain.
    pub fn new(m: usize, mut reducts: Vec<CoveringIndexSet>) -> Self {
        reducts.sort();
        reducts.dedup();
        debug_assert!(is_antichain(&reducts), "reduct set is not an antichain");
        ReductSet { m, reducts }
    }

    pub fn covering_count(&self) -> usize {
        self.m
    }

    pub fn reducts(&self) -> &[CoveringIndexSet] {
        &self.reducts
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CoveringIndexSet> {
        self.reducts.iter()
    }

    pub fn len(&self) -> usize {
        self.reducts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reducts.is_empty()
    }

    pub fn contains(&self, r: &CoveringIndexSet) -> bool {
        self.reducts.binary_search(r).is_ok()
    }

    /// `{∅}`: the positive region is empty, so nothing needs preserving.
    pub fn is_vacuous(&self) -> bool {
        self.reducts.len() == 1 && self.reducts[0].is_empty()
    }

    /// Smallest reduct cardinality, if any.
    pub fn min_size(&self) -> Option<usize> {
        self.reducts.iter().map(CoveringIndexSet::len).min()
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.reducts.iter().map(CoveringIndexSet::to_vec).collect()
    }
}

/// JSON output of a reduction: `{"reducts": [[…]…], "heuristic": […]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reducts: Option<Vec<Vec<usize>>>,
    pub heuristic: Vec<usize>,
}

pub fn is_antichain(sets: &[CoveringIndexSet]) -> bool {
    sets.iter().enumerate().all(|(i, a)| {
        sets.iter()
            .enumerate()
            .all(|(j, b)| i == j || !a.is_subset(b))
    })
}

/// All minimal hitting sets (minimal transversals) of `sets` over `0..m`.
///
/// Depth-first: branch on the elements of the lexicographically smallest
/// unhit set, forbidding earlier siblings so each transversal is reached
/// once, and prune any partial set in which some member has lost all of its
/// private sets.
pub fn minimal_hitting_sets(sets: &[CoveringIndexSet], m: usize) -> Vec<CoveringIndexSet> {
    if sets.iter().any(CoveringIndexSet::is_empty) {
        return Vec::new();
    }
    let mut sorted = sets.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut search = Transversals {
        sets: &sorted,
        out: Vec::new(),
    };
    let unhit: Vec<usize> = (0..sorted.len()).collect();
    search.descend(
        &mut CoveringIndexSet::empty(m),
        &CoveringIndexSet::empty(m),
        &unhit,
    );
    let mut out = search.out;
    out.sort();
    out
}

struct Transversals<'a> {
    sets: &'a [CoveringIndexSet],
    out: Vec<CoveringIndexSet>,
}

impl Transversals<'_> {
    fn descend(&mut self, chosen: &mut CoveringIndexSet, forbidden: &CoveringIndexSet, unhit: &[usize]) {
        let Some(&first) = unhit.first() else {
            self.out.push(chosen.clone());
            return;
        };
        let allowed = self.sets[first].difference(forbidden);
        let mut forbid = forbidden.clone();
        for c in &allowed {
            chosen.insert(c);
            if self.all_critical(chosen) {
                let rest: Vec<usize> = unhit
                    .iter()
                    .copied()
                    .filter(|&s| !self.sets[s].contains(c))
                    .collect();
                self.descend(chosen, &forbid, &rest);
            }
            chosen.remove(c);
            forbid.insert(c);
        }
    }

    /// Every member of `chosen` is the sole hitter of at least one set.
    fn all_critical(&self, chosen: &CoveringIndexSet) -> bool {
        let mut private = CoveringIndexSet::empty(chosen.capacity());
        for s in self.sets {
            let hit = s.intersection(chosen);
            if hit.len() == 1 {
                private.union_with(&hit);
            }
        }
        private == *chosen
    }
}

/// `ℛ(U, Δ, 𝒟)`: prime implicants of `⋀ₓ ⋁ r(x)`, i.e. the minimal hitting
/// sets of `SR`. An empty positive region yields `{∅}`.
pub fn all_reducts(family: &RelatedFamily) -> ReductSet {
    let m = family.covering_count();
    let sr = minimal_related_sets(family);
    ReductSet::new(m, minimal_hitting_sets(&sr, m))
}

/// Checks both clauses of the reduct definition by direct positive-region
/// computation.
pub fn is_reduct(system: &CoveringDecisionSystem, subset: &CoveringIndexSet) -> bool {
    let full = positive_region(system);
    if positive_region_of(system, subset) != full {
        return false;
    }
    subset.iter().all(|c| {
        let mut smaller = subset.clone();
        smaller.remove(c);
        positive_region_of(system, &smaller) != full
    })
}

/// Whether `subset` keeps the positive region of the whole family.
pub fn preserves_positive_region(system: &CoveringDecisionSystem, subset: &CoveringIndexSet) -> bool {
    positive_region_of(system, subset) == positive_region(system)
}

pub fn hits_all(candidate: &CoveringIndexSet, sets: &[CoveringIndexSet]) -> bool {
    sets.iter().all(|s| s.intersects(candidate))
}

/// Greedy reduct over `SR`: repeatedly take the covering occurring in the
/// most unhit sets (lowest index on ties), then drop members in reverse
/// selection order while every set stays hit.
pub fn heuristic_reduct(sr: &[CoveringIndexSet], m: usize) -> CoveringIndexSet {
    let mut chosen = CoveringIndexSet::empty(m);
    if sr.is_empty() {
        log::warn!("empty positive region: heuristic reduct is vacuously empty");
        return chosen;
    }
    let mut order = Vec::new();
    let mut unhit: Vec<&CoveringIndexSet> = sr.iter().collect();
    while !unhit.is_empty() {
        let mut freq = vec![0usize; m];
        for s in &unhit {
            for i in *s {
                freq[i] += 1;
            }
        }
        let best = freq
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
            .map(|(i, _)| i)
            .expect("m >= 1");
        assert!(freq[best] > 0, "SR contains an empty set");
        chosen.insert(best);
        order.push(best);
        unhit.retain(|s| !s.contains(best));
    }
    for &c in order.iter().rev() {
        chosen.remove(c);
        if !hits_all(&chosen, sr) {
            chosen.insert(c);
        }
    }
    chosen
}

/// NIHV end to end: related family, `SR`, greedy.
pub fn nihv(system: &CoveringDecisionSystem) -> CoveringIndexSet {
    let family = related_family(system);
    heuristic_reduct(&minimal_related_sets(&family), system.len())
}
