//! Third-type covering approximations (`CL`/`CH`) and the regions they induce.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::bits::{CoveringIndexSet, ObjectSet};
use crate::system::{Covering, CoveringDecisionSystem};

/// Positive, boundary and negative regions of a target set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionTriple {
    pub pos: ObjectSet,
    pub bnd: ObjectSet,
    pub neg: ObjectSet,
}

/// A covering with minimal descriptions computed lazily and cached per object.
pub struct CoveringSpace<'a> {
    covering: &'a Covering,
    md: Vec<OnceLock<Vec<usize>>>,
}

impl<'a> CoveringSpace<'a> {
    pub fn new(covering: &'a Covering) -> Self {
        let n = covering.universe_size();
        CoveringSpace {
            covering,
            md: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn covering(&self) -> &Covering {
        self.covering
    }

    /// Indices of the blocks in `Md(x)`.
    pub fn minimal_description_indices(&self, x: usize) -> &[usize] {
        self.md[x].get_or_init(|| {
            let blocks = self.covering.blocks();
            let containing: Vec<usize> = (0..blocks.len()).filter(|&b| blocks[b].contains(x)).collect();
            containing
                .iter()
                .copied()
                .filter(|&k| {
                    !containing
                        .iter()
                        .any(|&s| s != k && blocks[s].is_proper_subset(&blocks[k]))
                })
                .collect()
        })
    }

    pub fn minimal_description(&self, x: usize) -> Vec<ObjectSet> {
        let blocks = self.covering.blocks();
        self.minimal_description_indices(x)
            .iter()
            .map(|&b| blocks[b].clone())
            .collect()
    }

    /// `CL(X)`: union of blocks contained in `X`.
    pub fn lower(&self, target: &ObjectSet) -> ObjectSet {
        lower_of_blocks(self.covering.universe_size(), self.covering.blocks().iter(), target)
    }

    /// `CH(X)`: union of `Md(x)` over `x ∈ X`.
    pub fn upper(&self, target: &ObjectSet) -> ObjectSet {
        let blocks = self.covering.blocks();
        let mut out = ObjectSet::empty(self.covering.universe_size());
        let mut used = vec![false; blocks.len()];
        for x in target {
            for &b in self.minimal_description_indices(x) {
                if !used[b] {
                    used[b] = true;
                    out.union_with(&blocks[b]);
                }
            }
        }
        out
    }
}

fn lower_of_blocks<'b, I>(n: usize, blocks: I, target: &ObjectSet) -> ObjectSet
where
    I: Iterator<Item = &'b ObjectSet>,
{
    let mut out = ObjectSet::empty(n);
    for b in blocks {
        if b.is_subset(target) {
            out.union_with(b);
        }
    }
    out
}

/// `∪Δ`: the deduplicated union of all blocks of all coverings.
pub fn union_covering(system: &CoveringDecisionSystem) -> Covering {
    let n = system.universe_size();
    let mut seen = HashSet::new();
    let blocks: Vec<ObjectSet> = system
        .coverings()
        .iter()
        .flat_map(|c| c.blocks().iter())
        .filter(|b| seen.insert(*b))
        .cloned()
        .collect();
    Covering::new(n, blocks).expect("union of coverings is a covering")
}

pub fn minimal_description(covering: &Covering, x: usize) -> Vec<ObjectSet> {
    CoveringSpace::new(covering).minimal_description(x)
}

pub fn lower_approx(covering: &Covering, target: &ObjectSet) -> ObjectSet {
    lower_of_blocks(covering.universe_size(), covering.blocks().iter(), target)
}

pub fn upper_approx(covering: &Covering, target: &ObjectSet) -> ObjectSet {
    CoveringSpace::new(covering).upper(target)
}

/// `POS_{∪Δ}(𝒟)`.
pub fn positive_region(system: &CoveringDecisionSystem) -> ObjectSet {
    let all = CoveringIndexSet::full(system.len());
    positive_region_of(system, &all)
}

/// `POS_{∪P}(𝒟)` for a subfamily `P ⊆ Δ`; empty when `P = ∅`.
pub fn positive_region_of(system: &CoveringDecisionSystem, subset: &CoveringIndexSet) -> ObjectSet {
    let n = system.universe_size();
    let mut pos = ObjectSet::empty(n);
    for class in system.decision().classes() {
        let blocks = subset
            .iter()
            .flat_map(|i| system.covering(i).blocks().iter());
        pos.union_with(&lower_of_blocks(n, blocks, class));
    }
    pos
}

/// Regions of `X` with respect to the union covering.
pub fn classify_regions(system: &CoveringDecisionSystem, target: &ObjectSet) -> RegionTriple {
    let union = union_covering(system);
    let space = CoveringSpace::new(&union);
    let lower = space.lower(target);
    let upper = space.upper(target);
    RegionTriple {
        bnd: upper.difference(&lower),
        neg: upper.complement(),
        pos: lower,
    }
}

pub fn is_consistent(system: &CoveringDecisionSystem) -> bool {
    positive_region(system).is_full()
}
