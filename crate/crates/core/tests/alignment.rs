mod common;

use mdpalign::alignment::is_reduction;
use mdpalign::search::{enumerate_with_tables, random_mdp, DEFAULT_CAP};
use mdpalign::{
    adapt_policy, construct_reduction, evaluate_objectives, generate_planted, inverse_action_map,
    stationary_triplet, verify_reduction, AlignmentMaps, CriterionMode, Error, PlantSpec,
    ReductionMap, SolvedMdp, TabularMdp, TabularPolicy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solve(m: TabularMdp) -> SolvedMdp {
    SolvedMdp::solve(m, CriterionMode::Stationary).unwrap()
}

/// Two x-states that both lead back to the start collapse into one y-state,
/// and two x-actions at the start collapse into one y-action.
fn merged_pair() -> (SolvedMdp, SolvedMdp) {
    let mx = TabularMdp::new(
        vec![vec![1, 2], vec![0, 0], vec![0, 0]],
        vec![vec![1.0; 2]; 3],
        vec![1.0 / 3.0; 3],
        0.9,
    )
    .unwrap();
    let my = TabularMdp::new(
        vec![vec![1], vec![0]],
        vec![vec![1.0]; 2],
        vec![0.5, 0.5],
        0.9,
    )
    .unwrap();
    (solve(mx), solve(my))
}

#[test]
fn merged_states_and_actions_reduce() {
    let (mx, my) = merged_pair();
    let r = ReductionMap::new(vec![0, 1, 1], vec![0, 0]);
    assert!(verify_reduction(&mx, &my, &r).unwrap().is_empty());
    let split = ReductionMap::new(vec![0, 1, 0], vec![0, 0]);
    let report = verify_reduction(&mx, &my, &split).unwrap();
    assert!(!report.dynamics_violations.is_empty());

    let g = inverse_action_map(&r.psi, my.table(), None).unwrap();
    let maps = AlignmentMaps::from_reduction(&r, g);
    let score = evaluate_objectives(&mx, &my, &maps, &my.covering_policy()).unwrap();
    assert!(score.both_met(), "{score:?}");
}

#[test]
fn verify_agrees_with_literal_conditions() {
    let mut checked = 0;
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mx = solve(random_mdp(&mut rng, 3, 2, 0.9));
        let my = solve(random_mdp(&mut rng, 2, 2, 0.9));
        let (ox, oy) = (&mx.opt.table.o, &my.opt.table.o);
        for phi in common::all_maps(3, 2) {
            for psi in common::all_maps(2, 2) {
                let r = ReductionMap::new(phi.clone(), psi);
                let lib = verify_reduction(&mx, &my, &r).unwrap().is_empty();
                assert_eq!(
                    lib,
                    common::is_reduction(&mx.mdp, ox, &my.mdp, oy, &r.phi, &r.psi)
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 30 * 8 * 4);
}

#[test]
fn enumeration_matches_brute_force() {
    for seed in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, ny) = (2 + seed as usize % 3, 1 + seed as usize % 3);
        let mx = solve(random_mdp(&mut rng, nx, 2, 0.9));
        let my = solve(random_mdp(&mut rng, ny, 2, 0.9));
        let lib: Vec<(Vec<usize>, Vec<usize>)> =
            enumerate_with_tables(&mx.mdp, mx.table(), &my.mdp, my.table(), DEFAULT_CAP)
                .unwrap()
                .into_iter()
                .map(|r| (r.phi, r.psi))
                .collect();
        let oracle = common::all_reductions(&mx.mdp, &mx.opt.table.o, &my.mdp, &my.opt.table.o);
        assert_eq!(lib, oracle, "seed {seed}");
    }
}

#[test]
fn enumeration_respects_the_cap() {
    let (mx, my) = merged_pair();
    let err = enumerate_with_tables(&mx.mdp, mx.table(), &my.mdp, my.table(), 3).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { .. }));
}

#[test]
fn planted_adaptation_is_optimal() {
    for seed in 0..20u64 {
        let spec =
            PlantSpec::new(2 + seed as usize % 3, 2, 1 + seed as usize % 2, 2).with_seed(seed);
        let p = generate_planted(&spec).unwrap();
        let (mx, my) = (solve(p.mx), solve(p.my));
        let g = inverse_action_map(&p.planted.psi, my.table(), Some(seed)).unwrap();
        let maps = AlignmentMaps::from_reduction(&p.planted, g);
        let pi_x = adapt_policy(&my.covering_policy(), &maps, mx.mdp.action_count()).unwrap();
        let j = common::truncated_value(&mx.mdp, &pi_x, 3000);
        assert!(
            (j - common::naive_j_star(&mx.mdp)).abs() < 1e-7,
            "seed {seed}"
        );
    }
}

#[test]
fn constructed_reduction_verifies_on_augmented_planted_pairs() {
    for seed in 0..10u64 {
        let p = generate_planted(&PlantSpec::new(2, 2, 2, 1).with_seed(seed)).unwrap();
        let mx = solve(p.mx.augment_with_dummies().unwrap());
        let my = solve(p.my.augment_with_dummies().unwrap());
        let dx = mx.mdp.dummy_state().unwrap();
        let f: Vec<usize> = (0..mx.mdp.state_count())
            .map(|s| {
                if s == dx {
                    my.mdp.dummy_state().unwrap()
                } else {
                    p.planted.phi[s]
                }
            })
            .collect();
        let psi: Vec<usize> = (0..mx.mdp.action_count())
            .map(|a| {
                if mx.mdp.is_dummy_action(a) {
                    my.mdp.dummy_action().unwrap()
                } else {
                    p.planted.psi[a]
                }
            })
            .collect();
        let g = inverse_action_map(&psi, my.table(), None).unwrap();
        let maps = AlignmentMaps::new(f, g);
        let pi_y = my.covering_policy();
        let r = construct_reduction(&mx, &my, &maps, &pi_y).unwrap();
        assert!(
            verify_reduction(&mx, &my, &r).unwrap().is_empty(),
            "seed {seed}"
        );
    }
}

#[test]
fn unaugmented_inputs_are_rejected() {
    let (mx, my) = merged_pair();
    let maps = AlignmentMaps::new(vec![0, 1, 1], vec![0]);
    let err = construct_reduction(&mx, &my, &maps, &my.covering_policy()).unwrap_err();
    assert!(matches!(err, Error::PreconditionFailed(_)));
}

#[test]
fn stationary_triplet_matches_cesaro_average() {
    for seed in 0..10u64 {
        let m = random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), 5, 2, 0.9);
        let pi = TabularPolicy::uniform(5, 2);
        let Ok(exact) = stationary_triplet(&m, &pi) else {
            continue;
        };
        let exact: common::TripleMass = exact.iter().collect();
        let avg = common::cesaro_triplet(&m, &pi, 200, 20_000);
        assert!(common::tv(&exact, &avg) < 1e-3, "seed {seed}");
    }
}

fn arb_solved() -> impl Strategy<Value = SolvedMdp> {
    (1usize..9, 1usize..4, any::<u64>())
        .prop_map(|(n, m, seed)| solve(random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), n, m, 0.9)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_is_a_reduction(m in arb_solved()) {
        let r = ReductionMap::identity(m.mdp.state_count(), m.mdp.action_count());
        prop_assert!(verify_reduction(&m, &m, &r).unwrap().is_empty());
    }

    #[test]
    fn covering_support_is_optimal(m in arb_solved()) {
        let pi = m.covering_policy();
        if let Ok(sigma) = stationary_triplet(&m.mdp, &pi) {
            for (s, a, _) in sigma.support() {
                prop_assert!(m.opt.o(s, a));
            }
        }
    }

    #[test]
    fn reduction_check_is_order_free(m in arb_solved(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi: Vec<usize> = (0..m.mdp.state_count()).map(|_| rand::Rng::gen_range(&mut rng, 0..m.mdp.state_count())).collect();
        let psi: Vec<usize> = (0..m.mdp.action_count()).map(|_| rand::Rng::gen_range(&mut rng, 0..m.mdp.action_count())).collect();
        let r = ReductionMap::new(phi, psi);
        let full = verify_reduction(&m, &m, &r).unwrap().is_empty();
        let quick = is_reduction(&m.mdp, m.table(), &m.mdp, m.table(), &r).unwrap();
        prop_assert_eq!(full, quick);
        prop_assert_eq!(full, common::is_reduction(&m.mdp, &m.opt.table.o, &m.mdp, &m.opt.table.o, &r.phi, &r.psi));
    }
}
