//! Joint reductions over task sets, transferability, positive-DNF task
//! composition and maximal reductions.

mod maximal;
mod tasks;

pub use maximal::{
    are_isomorphic, find_isomorphism, maximal_reduction, maximal_reduction_ordered, quotient_mdp,
    MaximalReduction,
};
pub use tasks::{
    compose_cdnf, is_transferable, joint_reductions, CdnfExpr, OTask, TaskSet, TransferWitness,
    Transferability,
};
