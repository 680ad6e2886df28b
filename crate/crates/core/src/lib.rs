//! Attribute reduction for covering decision systems, with incremental
//! updates when a single covering is refined or coarsened.

pub mod approx;
pub mod bench;
pub mod bits;
pub mod dynamic;
pub mod ingest;
pub mod reduct;
pub mod related;
pub mod system;

pub use approx::{classify_regions, is_consistent, positive_region, positive_region_of, RegionTriple};
pub use bits::{CoveringIndexSet, ObjectSet};
pub use dynamic::{
    CoveringMutation, DynamicError, IncrementalReducts, IncrementalState, MutationFile, MutationKind, UpdateRule,
};
pub use reduct::{all_reducts, heuristic_reduct, is_reduct, nihv, ReductReport, ReductSet};
pub use related::{minimal_related_sets, related_family, RelatedFamily};
pub use system::{build_system, Covering, CoveringDecisionSystem, DecisionPartition, SystemError, SystemFile};
