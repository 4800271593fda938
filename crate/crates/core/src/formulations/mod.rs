//! Optimization models built from an [`Instance`](crate::instance::Instance)
//! and a candidate bundle set: the mixed-bundling MILP, bundle-size pricing,
//! and the fixed-assignment LP.

mod bsp;
mod candidates;
mod fixed;
mod mb;
mod solution;
mod subadd;

pub use bsp::{build_bsp, BspModel, BspSolution};
pub use candidates::CandidateSet;
pub use fixed::{build_fixed_assignment_lp, FixedAssignmentLp};
pub use mb::{build_mb, build_mb_with, MbLayout, MbModel};
pub use solution::{PricingSolution, SolveMeta};
pub use subadd::{gen_subadditivity, SubaddMode, SubaddRow};
