//! Exhaustive enumeration of reductions, annealing search for alignments and
//! planted-pair generation.

mod anneal;
mod enumerate;
mod planted;

pub use anneal::{search_alignment, SearchConfig, SearchOutcome, TraceRow, DEGENERATE_PENALTY};
pub use enumerate::{candidate_count, enumerate_reductions, enumerate_with_tables, DEFAULT_CAP};
pub use planted::{
    generate_planted, generate_planted_tasks, lift_mdp, random_mdp, random_regular_mdp, PlantSpec,
    PlantedPair,
};
