//! Exact analysis of reductions and alignments between finite deterministic
//! MDPs: optimality functions, reduction checks, policy adaptation, alignment
//! search, transfer over task sets and maximal reductions.

pub mod alignment;
pub mod chain;
pub mod error;
pub mod io;
pub mod mdp;
pub mod multitask;
pub mod optimality;
pub mod search;
pub mod sim;
pub mod triplet;

pub use alignment::{
    adapt_policy, codomain_triplet, construct_reduction, evaluate_objectives, inverse_action_map,
    verify_reduction, AlignmentMaps, ObjectiveScore, ReductionMap, ViolationReport,
};
pub use chain::{policy_value, stationary_triplet, validate_chain, ChainReport};
pub use error::{Error, Result};
pub use mdp::{TabularMdp, TabularPolicy};
pub use multitask::{
    compose_cdnf, is_transferable, joint_reductions, maximal_reduction, CdnfExpr, OTask, TaskSet,
};
pub use optimality::{
    covering_policy, solve_optimal, CriterionMode, OptimalityModel, OptimalityTable, SolvedMdp,
};
pub use search::{
    enumerate_reductions, generate_planted, search_alignment, PlantSpec, PlantedPair, SearchConfig,
};
pub use sim::{
    check_process_equivalence, empirical_triplet, rollout, sequence_distribution, Rollout,
    SequenceDistribution,
};
pub use triplet::{Triple, TripletDistribution, TripletKind};
