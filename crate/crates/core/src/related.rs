//! Admissible blocks, related sets `r(x)`, the related family and its minimal
//! antichain.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use crate::bits::{CoveringIndexSet, ObjectSet};
use crate::system::{Covering, CoveringDecisionSystem, DecisionPartition};

/// `x ↦ r(x)` over the positive region.
///
/// Stored per object so that single-covering updates can rewrite entries in
/// place; entries outside `pos` are empty and never exposed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelatedFamily {
    m: usize,
    pos: ObjectSet,
    sets: Vec<CoveringIndexSet>,
}

impl RelatedFamily {
    /// Builds a family from per-object sets (`sets[x]` for every object);
    /// the positive region is exactly the objects with a nonempty set.
    pub fn from_sets(m: usize, sets: Vec<CoveringIndexSet>) -> Self {
        let n = sets.len();
        let mut pos = ObjectSet::empty(n);
        for (x, s) in sets.iter().enumerate() {
            assert_eq!(s.capacity(), m, "related set of object {x} has wrong capacity");
            if !s.is_empty() {
                pos.insert(x);
            }
        }
        RelatedFamily { m, pos, sets }
    }

    pub fn universe_size(&self) -> usize {
        self.sets.len()
    }

    pub fn covering_count(&self) -> usize {
        self.m
    }

    pub fn pos(&self) -> &ObjectSet {
        &self.pos
    }

    /// `r(x)` for `x ∈ POS`, `None` otherwise.
    pub fn get(&self, x: usize) -> Option<&CoveringIndexSet> {
        self.pos.contains(x).then(|| &self.sets[x])
    }

    /// `r(x)` for any object; empty outside the positive region.
    pub fn related_set(&self, x: usize) -> &CoveringIndexSet {
        &self.sets[x]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &CoveringIndexSet)> + '_ {
        self.pos.iter().map(move |x| (x, &self.sets[x]))
    }

    /// The distinct sets of `R`, sorted.
    pub fn distinct_sets(&self) -> Vec<CoveringIndexSet> {
        let mut seen: HashSet<&CoveringIndexSet> = HashSet::new();
        let mut out: Vec<CoveringIndexSet> = self
            .iter()
            .filter(|(_, s)| seen.insert(s))
            .map(|(_, s)| s.clone())
            .collect();
        out.sort();
        out
    }

    /// Cheap summary of the family: positive region plus per-object set sizes.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.m.hash(&mut h);
        self.pos.hash(&mut h);
        for (_, s) in self.iter() {
            s.len().hash(&mut h);
        }
        h.finish()
    }

    pub(crate) fn into_sets(self) -> Vec<CoveringIndexSet> {
        self.sets
    }
}

/// Blocks of `covering` that fit inside a decision class.
pub fn admissible_in(covering: &Covering, decision: &DecisionPartition) -> Vec<ObjectSet> {
    covering
        .blocks()
        .iter()
        .filter(|b| decision.contains_block(b))
        .cloned()
        .collect()
}

/// `∪𝒜_𝒞`: union of the admissible blocks of one covering.
pub fn admissible_union(covering: &Covering, decision: &DecisionPartition) -> ObjectSet {
    let mut out = ObjectSet::empty(covering.universe_size());
    for b in covering.blocks() {
        if decision.contains_block(b) {
            out.union_with(b);
        }
    }
    out
}

/// `𝒜_Δ` as `(covering index, block)` pairs, in covering then block order.
pub fn admissible_blocks(system: &CoveringDecisionSystem) -> Vec<(usize, ObjectSet)> {
    system
        .coverings()
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            admissible_in(c, system.decision())
                .into_iter()
                .map(move |b| (i, b))
        })
        .collect()
}

/// `r(x)`: coverings owning an admissible block that contains `x`.
pub fn related_set(system: &CoveringDecisionSystem, x: usize) -> CoveringIndexSet {
    let mut out = CoveringIndexSet::empty(system.len());
    for (i, c) in system.coverings().iter().enumerate() {
        if c
            .blocks()
            .iter()
            .any(|b| b.contains(x) && system.decision().contains_block(b))
        {
            out.insert(i);
        }
    }
    out
}

/// `R(U, Δ, 𝒟)`, built one covering at a time from admissible unions.
pub fn related_family(system: &CoveringDecisionSystem) -> RelatedFamily {
    let n = system.universe_size();
    let m = system.len();
    let mut sets = vec![CoveringIndexSet::empty(m); n];
    for (i, c) in system.coverings().iter().enumerate() {
        for x in &admissible_union(c, system.decision()) {
            sets[x].insert(i);
        }
    }
    RelatedFamily::from_sets(m, sets)
}

/// `SR`: the ⊆-minimal distinct related sets, sorted.
pub fn minimal_related_sets(family: &RelatedFamily) -> Vec<CoveringIndexSet> {
    minimal_antichain(family.distinct_sets())
}

/// Keeps the ⊆-minimal members of `sets` (absorption), deduplicated and sorted.
pub fn minimal_antichain(mut sets: Vec<CoveringIndexSet>) -> Vec<CoveringIndexSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<CoveringIndexSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

/// `‖𝒞‖`: number of sets in `sets` containing each covering index.
pub fn frequencies(sets: &[CoveringIndexSet], m: usize) -> Vec<usize> {
    let mut freq = vec![0; m];
    for s in sets {
        for i in s {
            freq[i] += 1;
        }
    }
    freq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::build_system;

    fn cset(m: usize, v: &[usize]) -> CoveringIndexSet {
        CoveringIndexSet::from_iter_checked(m, v.iter().copied())
    }

    #[test]
    fn single_class_makes_every_block_admissible() {
        let s = build_system(3, &[vec![vec![0, 1], vec![2]], vec![vec![0, 1, 2]]], &[vec![0, 1, 2]]).unwrap();
        assert_eq!(admissible_blocks(&s).len(), 3);
    }

    #[test]
    fn singleton_classes_without_singleton_blocks() {
        let s = build_system(3, &[vec![vec![0, 1], vec![1, 2]]], &[vec![0], vec![1], vec![2]]).unwrap();
        assert!(admissible_blocks(&s).is_empty());
        assert!(related_family(&s).pos().is_empty());
    }

    #[test]
    fn consistent_single_covering() {
        let s = build_system(4, &[vec![vec![0, 1], vec![2, 3]]], &[vec![0, 1], vec![2, 3]]).unwrap();
        let f = related_family(&s);
        assert!(f.pos().is_full());
        assert!(f.iter().all(|(_, r)| *r == cset(1, &[0])));
    }

    #[test]
    fn identical_sets_collapse() {
        let f = RelatedFamily::from_sets(3, vec![cset(3, &[0, 2]); 4]);
        assert_eq!(minimal_related_sets(&f), vec![cset(3, &[0, 2])]);
    }

    #[test]
    fn antichain_absorbs_supersets() {
        let sets = vec![cset(4, &[0, 1, 2]), cset(4, &[1]), cset(4, &[2, 3]), cset(4, &[1, 3])];
        assert_eq!(minimal_antichain(sets), vec![cset(4, &[1]), cset(4, &[2, 3])]);
    }

    #[test]
    fn get_is_none_outside_pos() {
        let f = RelatedFamily::from_sets(2, vec![cset(2, &[0]), cset(2, &[])]);
        assert!(f.get(0).is_some());
        assert!(f.get(1).is_none());
    }
}
