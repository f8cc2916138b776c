//! Unsupervised scene abstraction: merge CID groups, then wrap each in a convex hull.

mod hull;
mod merge;

pub use hull::{convex_hulls, hull_of, ConvexPart, Degeneracy, HullFacets, RANK_TOLERANCE};
pub use merge::{merge_groups, MergeMode, MergeSchedule, MergeStep};
