//! Reductions between MDPs, policy adaptation through alignment maps and the
//! two alignment objectives.

mod adapt;
mod maps;
mod objectives;
mod verify;

pub use adapt::{adapt_policy, inverse_action_map};
pub use maps::{preimages, AlignmentMaps, ReductionMap};
pub use objectives::{
    codomain_triplet, construct_reduction, evaluate_objectives, ObjectiveEvaluator, ObjectiveScore,
    GAP_TOL, TV_TOL,
};
pub(crate) use verify::is_reduction_unchecked;
pub use verify::{is_reduction, verify_reduction, verify_with_tables, ViolationReport};
