//! Incremental maintenance of related families and reducts when one covering
//! is refined or coarsened.
//!
//! All updates go through the same per-object rewrite
//! `r'(x) = (r(x) \ {m}) ∪ {m | x ∈ ∪𝒜_new}`, where `m` is the mutated
//! covering and `∪𝒜_new` the union of its admissible blocks after the change.
//! For refinements that split blocks this is the familiar "replace `m` where
//! the new admissible union reaches, keep the rest" rule; for coarsenings it
//! drops `m` from objects no longer reached.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{CoveringIndexSet, ObjectSet};
use crate::reduct::{all_reducts, heuristic_reduct, minimal_hitting_sets, ReductSet};
use crate::related::{admissible_union, minimal_antichain, minimal_related_sets, related_family, RelatedFamily};
use crate::system::{Covering, CoveringDecisionSystem, SystemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicError {
    #[error("new covering is not a refinement of covering {target}")]
    NotARefinement { target: usize },
    #[error("new covering is not a coarsening of covering {target}")]
    NotACoarsening { target: usize },
    #[error("covering index {target} out of range for {m} coverings")]
    TargetOutOfRange { target: usize, m: usize },
    #[error("mutation targets covering {found}, state tracks covering {expected}")]
    WrongTarget { expected: usize, found: usize },
    #[error("incremental state is stale: {0}")]
    StaleState(String),
    #[error("incremental state carries no reduct set")]
    MissingReducts,
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MutationKind {
    Refine,
    Coarsen,
}

/// Every block of `new` lies inside some block of `old`.
pub fn verify_refinement(old: &Covering, new: &Covering) -> bool {
    if old.universe_size() != new.universe_size() {
        return false;
    }
    // Only old blocks holding a new block's first member can contain it.
    let mut holders: HashMap<usize, Vec<&ObjectSet>> = HashMap::new();
    new.blocks().iter().all(|b| {
        let Some(x) = b.first() else { return true };
        holders
            .entry(x)
            .or_insert_with(|| old.blocks().iter().filter(|o| o.contains(x)).collect())
            .iter()
            .any(|o| b.is_subset(o))
    })
}

/// Every block of `old` lies inside some block of `new`.
pub fn verify_coarsening(old: &Covering, new: &Covering) -> bool {
    verify_refinement(new, old)
}

/// A verified replacement of one covering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringMutation {
    target: usize,
    kind: MutationKind,
    new_covering: Covering,
}

impl CoveringMutation {
    pub fn new(
        system: &CoveringDecisionSystem,
        target: usize,
        kind: MutationKind,
        new_covering: Covering,
    ) -> Result<Self, DynamicError> {
        if target >= system.len() {
            return Err(DynamicError::TargetOutOfRange { target, m: system.len() });
        }
        check_kind(system.covering(target), &new_covering, kind, target)?;
        Ok(CoveringMutation { target, kind, new_covering })
    }

    pub fn from_file(system: &CoveringDecisionSystem, file: MutationFile) -> Result<Self, DynamicError> {
        let covering = Covering::from_lists(system.universe_size(), &file.blocks)?;
        Self::new(system, file.target, file.kind, covering)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn kind(&self) -> MutationKind {
        self.kind
    }

    pub fn new_covering(&self) -> &Covering {
        &self.new_covering
    }

    pub fn to_file(&self) -> MutationFile {
        MutationFile {
            target: self.target,
            kind: self.kind,
            blocks: self.new_covering.to_lists(),
        }
    }
}

fn check_kind(old: &Covering, new: &Covering, kind: MutationKind, target: usize) -> Result<(), DynamicError> {
    if old.universe_size() != new.universe_size() {
        return Err(SystemError::UniverseMismatch {
            expected: old.universe_size(),
            found: new.universe_size(),
        }
        .into());
    }
    match kind {
        MutationKind::Refine if !verify_refinement(old, new) => Err(DynamicError::NotARefinement { target }),
        MutationKind::Coarsen if !verify_coarsening(old, new) => Err(DynamicError::NotACoarsening { target }),
        _ => Ok(()),
    }
}

/// JSON form: `{"target": m, "kind": "refine"|"coarsen", "blocks": [[ids]…]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationFile {
    pub target: usize,
    pub kind: MutationKind,
    pub blocks: Vec<Vec<usize>>,
}

/// Which update rule produced an incremental reduct set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Positive region unchanged: retained old reducts plus new ones using `m`.
    Retained,
    /// Some object is now related to `m` alone, so every reduct uses `m`.
    ForcedTarget,
    /// Positive region changed otherwise: reducts recomputed from the updated family.
    Recomputed,
}

/// Result of an incremental all-reducts update, split by origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncrementalReducts {
    /// `◊ℛ`: old reducts that do not use the mutated covering.
    pub retained: ReductSet,
    /// `▲ℛ`: newly generated reducts.
    pub added: ReductSet,
    pub all: ReductSet,
    pub rule: UpdateRule,
}

/// Quantities carried between mutations of one target covering.
#[derive(Clone, Debug)]
pub struct IncrementalState {
    system: CoveringDecisionSystem,
    target: usize,
    family: RelatedFamily,
    reducts: Option<ReductSet>,
    admissible_union: ObjectSet,
    fingerprint: u64,
    generation: u64,
}

impl IncrementalState {
    /// Builds the related family from scratch.
    pub fn new(system: CoveringDecisionSystem, target: usize) -> Result<Self, DynamicError> {
        if target >= system.len() {
            return Err(DynamicError::TargetOutOfRange { target, m: system.len() });
        }
        let family = related_family(&system);
        let admissible_union = admissible_union(system.covering(target), system.decision());
        Ok(Self::assemble(system, target, family, None, admissible_union, 0))
    }

    /// Adopts externally kept quantities. Debug builds recompute the family
    /// and reject a mismatch.
    pub fn from_parts(
        system: CoveringDecisionSystem,
        target: usize,
        family: RelatedFamily,
        reducts: Option<ReductSet>,
    ) -> Result<Self, DynamicError> {
        if target >= system.len() {
            return Err(DynamicError::TargetOutOfRange { target, m: system.len() });
        }
        if family.universe_size() != system.universe_size() || family.covering_count() != system.len() {
            return Err(DynamicError::StaleState("family dimensions differ from the system".into()));
        }
        if cfg!(debug_assertions) && related_family(&system) != family {
            return Err(DynamicError::StaleState("family disagrees with recomputation".into()));
        }
        let admissible_union = admissible_union(system.covering(target), system.decision());
        let state = Self::assemble(system, target, family, reducts, admissible_union, 0);
        state.validate()?;
        Ok(state)
    }

    fn assemble(
        system: CoveringDecisionSystem,
        target: usize,
        family: RelatedFamily,
        reducts: Option<ReductSet>,
        admissible_union: ObjectSet,
        generation: u64,
    ) -> Self {
        let fingerprint = family.fingerprint();
        IncrementalState { system, target, family, reducts, admissible_union, fingerprint, generation }
    }

    /// Computes and carries the full reduct set.
    pub fn with_reducts(mut self) -> Self {
        self.reducts = Some(all_reducts(&self.family));
        self
    }

    pub fn system(&self) -> &CoveringDecisionSystem {
        &self.system
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn family(&self) -> &RelatedFamily {
        &self.family
    }

    pub fn reducts(&self) -> Option<&ReductSet> {
        self.reducts.as_ref()
    }

    /// `∪𝒜` of the target covering.
    pub fn admissible_union(&self) -> &ObjectSet {
        &self.admissible_union
    }

    /// Number of mutations applied since the state was built.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Cheap consistency check between the carried quantities.
    pub fn validate(&self) -> Result<(), DynamicError> {
        if self.family.fingerprint() != self.fingerprint {
            return Err(DynamicError::StaleState("family fingerprint changed".into()));
        }
        let m = self.target;
        let reached = self
            .family
            .iter()
            .filter(|(_, r)| r.contains(m))
            .map(|(x, _)| x);
        let reached = ObjectSet::from_iter_checked(self.system.universe_size(), reached);
        if reached != self.admissible_union {
            return Err(DynamicError::StaleState(
                "target covering's admissible union disagrees with the family".into(),
            ));
        }
        Ok(())
    }

    fn check_new_family(&self, new_family: &RelatedFamily) -> Result<(), DynamicError> {
        self.validate()?;
        if new_family.universe_size() != self.system.universe_size()
            || new_family.covering_count() != self.system.len()
        {
            return Err(DynamicError::StaleState("new family dimensions differ from the system".into()));
        }
        Ok(())
    }

    fn rewrite(&self, new_m: &Covering) -> (RelatedFamily, ObjectSet) {
        let m = self.target;
        let new_union = admissible_union(new_m, self.system.decision());
        let mut sets = self.family.clone().into_sets();
        for x in &self.admissible_union.union(&new_union) {
            sets[x].remove(m);
            if new_union.contains(x) {
                sets[x].insert(m);
            }
        }
        (RelatedFamily::from_sets(self.system.len(), sets), new_union)
    }

    fn check_mutation(&self, mutation: &CoveringMutation, kind: MutationKind) -> Result<(), DynamicError> {
        self.validate()?;
        if mutation.target != self.target {
            return Err(DynamicError::WrongTarget { expected: self.target, found: mutation.target });
        }
        match (kind, mutation.kind) {
            (MutationKind::Refine, MutationKind::Coarsen) => Err(DynamicError::NotARefinement { target: self.target }),
            (MutationKind::Coarsen, MutationKind::Refine) => Err(DynamicError::NotACoarsening { target: self.target }),
            _ => Ok(()),
        }
    }

    /// `r⁺(x)` for every object after refining the target covering.
    pub fn update_related_refine(&self, mutation: &CoveringMutation) -> Result<RelatedFamily, DynamicError> {
        self.check_mutation(mutation, MutationKind::Refine)?;
        let (family, new_union) = self.rewrite(&mutation.new_covering);
        if !self.admissible_union.is_subset(&new_union) {
            // A block-splitting refinement never shrinks the admissible union;
            // general refinements can, and the rewrite drops the target there.
            log::warn!(
                "refinement of covering {} shrinks its admissible union; {} object(s) lose it",
                self.target,
                self.admissible_union.difference(&new_union).len()
            );
        }
        Ok(family)
    }

    /// `r⁻(x)` for every object after coarsening the target covering.
    pub fn update_related_coarsen(&self, mutation: &CoveringMutation) -> Result<RelatedFamily, DynamicError> {
        self.check_mutation(mutation, MutationKind::Coarsen)?;
        Ok(self.rewrite(&mutation.new_covering).0)
    }

    pub fn incremental_all_reducts_refine(
        &self,
        new_family: &RelatedFamily,
    ) -> Result<IncrementalReducts, DynamicError> {
        self.incremental_all_reducts(new_family)
    }

    pub fn incremental_all_reducts_coarsen(
        &self,
        new_family: &RelatedFamily,
    ) -> Result<IncrementalReducts, DynamicError> {
        self.incremental_all_reducts(new_family)
    }

    fn incremental_all_reducts(&self, new_family: &RelatedFamily) -> Result<IncrementalReducts, DynamicError> {
        self.check_new_family(new_family)?;
        let old = self.reducts.as_ref().ok_or(DynamicError::MissingReducts)?;
        let m = self.target;
        let count = self.system.len();
        let only_target = CoveringIndexSet::singleton(count, m);

        // Terms of ▲f besides {m}: related sets of objects the new covering does not reach.
        let unreached = || -> Vec<CoveringIndexSet> {
            minimal_antichain(
                new_family
                    .iter()
                    .filter(|(_, r)| !r.contains(m))
                    .map(|(_, r)| r.clone())
                    .collect(),
            )
        };
        let with_target = |q: CoveringIndexSet| {
            let mut q = q;
            q.insert(m);
            q
        };

        if new_family.pos() == self.family.pos() {
            let retained: Vec<CoveringIndexSet> = old.iter().filter(|r| !r.contains(m)).cloned().collect();
            let added: Vec<CoveringIndexSet> = minimal_hitting_sets(&unreached(), count)
                .into_iter()
                .filter(|q| !retained.iter().any(|d| d.is_subset(q)))
                .map(with_target)
                .collect();
            let all: Vec<CoveringIndexSet> = retained.iter().chain(&added).cloned().collect();
            return Ok(IncrementalReducts {
                retained: ReductSet::new(count, retained),
                added: ReductSet::new(count, added),
                all: ReductSet::new(count, all),
                rule: UpdateRule::Retained,
            });
        }

        if new_family.iter().any(|(_, r)| *r == only_target) {
            let added: Vec<CoveringIndexSet> = minimal_hitting_sets(&unreached(), count)
                .into_iter()
                .map(with_target)
                .collect();
            return Ok(IncrementalReducts {
                retained: ReductSet::new(count, Vec::new()),
                added: ReductSet::new(count, added.clone()),
                all: ReductSet::new(count, added),
                rule: UpdateRule::ForcedTarget,
            });
        }

        let all = all_reducts(new_family);
        Ok(IncrementalReducts {
            retained: ReductSet::new(count, Vec::new()),
            added: all.clone(),
            all,
            rule: UpdateRule::Recomputed,
        })
    }

    /// IHVR: greedy reduct over `SR` of the refined system's updated family.
    pub fn ihvr(&self, new_family: &RelatedFamily) -> CoveringIndexSet {
        heuristic_reduct(&minimal_related_sets(new_family), self.system.len())
    }

    /// IHVC: greedy reduct over `SR` of the coarsened system's updated family.
    pub fn ihvc(&self, new_family: &RelatedFamily) -> CoveringIndexSet {
        heuristic_reduct(&minimal_related_sets(new_family), self.system.len())
    }

    /// Applies a mutation and returns the next state; reducts are carried
    /// forward incrementally when present.
    pub fn apply(&self, mutation: &CoveringMutation) -> Result<Self, DynamicError> {
        self.check_mutation(mutation, mutation.kind)?;
        let (family, new_union) = self.rewrite(&mutation.new_covering);
        let reducts = match &self.reducts {
            Some(_) => Some(self.incremental_all_reducts(&family)?.all),
            None => None,
        };
        let system = self.system.replace_covering(self.target, mutation.new_covering.clone())?;
        Ok(Self::assemble(system, self.target, family, reducts, new_union, self.generation + 1))
    }
}
