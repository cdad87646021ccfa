//! Fixtures shared by the benchmarks.

use mdpalign::{generate_planted, CriterionMode, PlantSpec, ReductionMap, SolvedMdp};

/// A solved planted pair: `bs` base states with two actions, each state split
/// into `ks` copies, with the planted reduction.
pub fn planted_pair(bs: usize, ks: usize, seed: u64) -> (SolvedMdp, SolvedMdp, ReductionMap) {
    let p = generate_planted(&PlantSpec::new(bs, 2, ks, 1).with_seed(seed)).expect("planted pair");
    (
        SolvedMdp::solve(p.mx, CriterionMode::Stationary).expect("solvable"),
        SolvedMdp::solve(p.my, CriterionMode::Stationary).expect("solvable"),
        p.planted,
    )
}
