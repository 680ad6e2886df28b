//! Universes, coverings, decision partitions and covering decision systems.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::ObjectSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("universe must contain at least one object")]
    EmptyUniverse,
    #[error("a system needs at least one covering")]
    NoCoverings,
    #[error("covering {covering}: block {block} is empty")]
    EmptyBlock { covering: usize, block: usize },
    #[error("covering {covering} does not cover the universe (object {missing} is in no block)")]
    NotACovering { covering: usize, missing: usize },
    #[error("decision is not a partition: {reason}")]
    NotAPartition { reason: String },
    #[error("universe mismatch: expected {expected} objects, found {found}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("object id {id} out of range for a universe of {n}")]
    IdOutOfRange { id: usize, n: usize },
    #[error("restriction to an empty object set")]
    EmptyRestriction,
    #[error("restriction breaks covering {covering}")]
    RestrictionBreaksCovering { covering: usize },
}

/// A family of nonempty blocks whose union is the universe. Blocks are
/// deduplicated on construction; first occurrence order is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    n: usize,
    blocks: Vec<ObjectSet>,
}

impl Covering {
    pub fn new(n: usize, blocks: Vec<ObjectSet>) -> Result<Self, SystemError> {
        Self::new_indexed(n, blocks, 0)
    }

    fn new_indexed(n: usize, blocks: Vec<ObjectSet>, index: usize) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::EmptyUniverse);
        }
        let mut seen = HashSet::with_capacity(blocks.len());
        let mut kept = Vec::with_capacity(blocks.len());
        let mut union = ObjectSet::empty(n);
        for (b, block) in blocks.into_iter().enumerate() {
            if block.capacity() != n {
                return Err(SystemError::UniverseMismatch {
                    expected: n,
                    found: block.capacity(),
                });
            }
            if block.is_empty() {
                return Err(SystemError::EmptyBlock { covering: index, block: b });
            }
            union.union_with(&block);
            if seen.insert(block.clone()) {
                kept.push(block);
            }
        }
        if let Some(missing) = union.complement().first() {
            return Err(SystemError::NotACovering { covering: index, missing });
        }
        Ok(Covering { n, blocks: kept })
    }

    /// Builds a covering from lists of object ids.
    pub fn from_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self, SystemError> {
        Self::from_lists_indexed(n, lists, 0)
    }

    fn from_lists_indexed(n: usize, lists: &[Vec<usize>], index: usize) -> Result<Self, SystemError> {
        let blocks = lists
            .iter()
            .map(|l| to_set(n, l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new_indexed(n, blocks, index)
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[ObjectSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True when blocks are pairwise disjoint.
    pub fn is_partition(&self) -> bool {
        self.blocks.iter().map(ObjectSet::len).sum::<usize>() == self.n
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(ObjectSet::to_vec).collect()
    }
}

fn to_set(n: usize, ids: &[usize]) -> Result<ObjectSet, SystemError> {
    ObjectSet::try_from_iter(n, ids.iter().copied()).map_err(|id| SystemError::IdOutOfRange { id, n })
}

/// Decision classes: pairwise disjoint, nonempty, covering the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionPartition {
    n: usize,
    classes: Vec<ObjectSet>,
    class_of: Vec<usize>,
}

impl DecisionPartition {
    pub fn new(n: usize, classes: Vec<ObjectSet>) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::EmptyUniverse);
        }
        let mut class_of = vec![usize::MAX; n];
        for (c, class) in classes.iter().enumerate() {
            if class.capacity() != n {
                return Err(SystemError::UniverseMismatch {
                    expected: n,
                    found: class.capacity(),
                });
            }
            if class.is_empty() {
                return Err(SystemError::NotAPartition {
                    reason: format!("class {c} is empty"),
                });
            }
            for x in class {
                if class_of[x] != usize::MAX {
                    return Err(SystemError::NotAPartition {
                        reason: format!("object {x} is in classes {} and {c}", class_of[x]),
                    });
                }
                class_of[x] = c;
            }
        }
        if let Some(x) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(SystemError::NotAPartition {
                reason: format!("object {x} is in no class"),
            });
        }
        Ok(DecisionPartition { n, classes, class_of })
    }

    pub fn from_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self, SystemError> {
        let classes = lists
            .iter()
            .map(|l| to_set(n, l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, classes)
    }

    /// Groups objects by label, classes ordered by first appearance.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: &[L]) -> Result<Self, SystemError> {
        let n = labels.len();
        let mut index = std::collections::HashMap::new();
        let mut classes: Vec<ObjectSet> = Vec::new();
        for (x, l) in labels.iter().enumerate() {
            let c = *index.entry(l).or_insert_with(|| {
                classes.push(ObjectSet::empty(n));
                classes.len() - 1
            });
            classes[c].insert(x);
        }
        Self::new(n, classes)
    }

    pub fn classes(&self) -> &[ObjectSet] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    /// True if `block` lies inside a single decision class.
    pub fn contains_block(&self, block: &ObjectSet) -> bool {
        match block.first() {
            Some(x) => block.is_subset(&self.classes[self.class_of[x]]),
            None => true,
        }
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.classes.iter().map(ObjectSet::to_vec).collect()
    }
}

/// `(U, Δ, 𝒟)`. Coverings are identified by their position in Δ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringDecisionSystem {
    n: usize,
    coverings: Vec<Covering>,
    decision: DecisionPartition,
    labels: Option<Vec<String>>,
}

impl CoveringDecisionSystem {
    pub fn new(
        coverings: Vec<Covering>,
        decision: DecisionPartition,
    ) -> Result<Self, SystemError> {
        let n = decision.n;
        if coverings.is_empty() {
            return Err(SystemError::NoCoverings);
        }
        for c in &coverings {
            if c.n != n {
                return Err(SystemError::UniverseMismatch { expected: n, found: c.n });
            }
        }
        Ok(CoveringDecisionSystem { n, coverings, decision, labels: None })
    }

    /// Attaches external object labels (e.g. source row numbers) used for reporting.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SystemError> {
        if labels.len() != self.n {
            return Err(SystemError::UniverseMismatch { expected: self.n, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn coverings(&self) -> &[Covering] {
        &self.coverings
    }

    pub fn covering(&self, i: usize) -> &Covering {
        &self.coverings[i]
    }

    /// Number of coverings `m`.
    pub fn len(&self) -> usize {
        self.coverings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coverings.is_empty()
    }

    pub fn decision(&self) -> &DecisionPartition {
        &self.decision
    }

    pub fn universe(&self) -> ObjectSet {
        ObjectSet::full(self.n)
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => format!("x{}", x + 1),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Same system with covering `index` swapped for `covering`.
    pub fn replace_covering(&self, index: usize, covering: Covering) -> Result<Self, SystemError> {
        if covering.n != self.n {
            return Err(SystemError::UniverseMismatch { expected: self.n, found: covering.n });
        }
        let mut next = self.clone();
        next.coverings[index] = covering;
        Ok(next)
    }

    /// Sub-system on `keep`, objects renumbered densely in increasing order.
    pub fn restrict(&self, keep: &ObjectSet) -> Result<Self, SystemError> {
        if keep.is_empty() {
            return Err(SystemError::EmptyRestriction);
        }
        if keep.capacity() != self.n {
            return Err(SystemError::UniverseMismatch { expected: self.n, found: keep.capacity() });
        }
        let kept: Vec<usize> = keep.to_vec();
        let sub_n = kept.len();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &x) in kept.iter().enumerate() {
            new_id[x] = i;
        }
        let project = |s: &ObjectSet| -> ObjectSet {
            let mut out = ObjectSet::empty(sub_n);
            for x in s.intersection(keep).iter() {
                out.insert(new_id[x]);
            }
            out
        };
        let mut coverings = Vec::with_capacity(self.coverings.len());
        for (i, c) in self.coverings.iter().enumerate() {
            let blocks: Vec<ObjectSet> = c
                .blocks
                .iter()
                .map(project)
                .filter(|b| !b.is_empty())
                .collect();
            let covering = Covering::new_indexed(sub_n, blocks, i)
                .map_err(|_| SystemError::RestrictionBreaksCovering { covering: i })?;
            coverings.push(covering);
        }
        let classes: Vec<ObjectSet> = self
            .decision
            .classes
            .iter()
            .map(project)
            .filter(|c| !c.is_empty())
            .collect();
        let decision = DecisionPartition::new(sub_n, classes)?;
        let labels = self
            .labels
            .as_ref()
            .map(|l| kept.iter().map(|&x| l[x].clone()).collect());
        Ok(CoveringDecisionSystem { n: sub_n, coverings, decision, labels })
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            n: self.n,
            coverings: self.coverings.iter().map(Covering::to_lists).collect(),
            decision: self.decision.to_lists(),
            labels: self.labels.clone(),
        }
    }
}

/// Validates and builds a system from plain id lists.
pub fn build_system(
    n: usize,
    coverings: &[Vec<Vec<usize>>],
    decision: &[Vec<usize>],
) -> Result<CoveringDecisionSystem, SystemError> {
    if n == 0 {
        return Err(SystemError::EmptyUniverse);
    }
    let coverings = coverings
        .iter()
        .enumerate()
        .map(|(i, lists)| Covering::from_lists_indexed(n, lists, i))
        .collect::<Result<Vec<_>, _>>()?;
    let decision = DecisionPartition::from_lists(n, decision)?;
    CoveringDecisionSystem::new(coverings, decision)
}

/// JSON form: `{"n":…, "coverings":[[[ids]…]…], "decision":[[ids]…]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub coverings: Vec<Vec<Vec<usize>>>,
    pub decision: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl SystemFile {
    pub fn into_system(self) -> Result<CoveringDecisionSystem, SystemError> {
        let system = build_system(self.n, &self.coverings, &self.decision)?;
        match self.labels {
            Some(l) => system.with_labels(l),
            None => Ok(system),
        }
    }
}
