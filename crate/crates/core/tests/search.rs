use mdpalign::search::{candidate_count, DEGENERATE_PENALTY};
use mdpalign::{
    evaluate_objectives, generate_planted, search_alignment, CriterionMode, PlantSpec,
    SearchConfig, SolvedMdp,
};
use proptest::prelude::*;

fn planted(seed: u64, bs: usize, ks: usize) -> (SolvedMdp, SolvedMdp) {
    let p = generate_planted(&PlantSpec::new(bs, 2, ks, 2).with_seed(seed)).unwrap();
    (
        SolvedMdp::solve(p.mx, CriterionMode::Stationary).unwrap(),
        SolvedMdp::solve(p.my, CriterionMode::Stationary).unwrap(),
    )
}

#[test]
fn recovers_small_planted_pairs() {
    for seed in 0..10u64 {
        let (mx, my) = planted(seed, 3, 2);
        let pi_y = my.covering_policy();
        let out =
            search_alignment(&mx, &my, &pi_y, &SearchConfig::default().with_seed(seed)).unwrap();
        assert!(out.score.both_met(), "seed {seed}: {:?}", out.score);
        let again = evaluate_objectives(&mx, &my, &out.maps, &pi_y).unwrap();
        assert_eq!(again, out.score);
    }
}

#[test]
fn same_seed_same_outcome() {
    let (mx, my) = planted(4, 4, 1);
    let pi_y = my.covering_policy();
    let cfg = SearchConfig {
        max_iters: 300,
        ..SearchConfig::default().with_seed(11)
    };
    let a = search_alignment(&mx, &my, &pi_y, &cfg).unwrap();
    let b = search_alignment(&mx, &my, &pi_y, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_configs_are_rejected() {
    let (mx, my) = planted(0, 2, 1);
    let pi_y = my.covering_policy();
    for cfg in [
        SearchConfig {
            decay: 1.0,
            ..SearchConfig::default()
        },
        SearchConfig {
            restarts: 0,
            ..SearchConfig::default()
        },
        SearchConfig {
            lambda: -1.0,
            ..SearchConfig::default()
        },
    ] {
        assert!(search_alignment(&mx, &my, &pi_y, &cfg).is_err());
    }
}

#[test]
fn candidate_count_is_the_table_product() {
    let (mx, my) = planted(1, 2, 2);
    // |S_y|^|S_x| * |A_y|^|A_x| = 2^4 * 2^4
    let (x, y) = (&mx.mdp, &my.mdp);
    assert_eq!(
        candidate_count(
            x.state_count(),
            x.action_count(),
            y.state_count(),
            y.action_count()
        ),
        256.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn best_so_far_trace_never_rises(seed in 0u64..1000) {
        let (mx, my) = planted(seed, 3, 2);
        let cfg = SearchConfig { max_iters: 200, restarts: 2, ..SearchConfig::default().with_seed(seed) };
        let out = search_alignment(&mx, &my, &my.covering_policy(), &cfg).unwrap();
        for w in out.trace.windows(2) {
            prop_assert!(w[1].loss <= w[0].loss);
        }
        prop_assert!(out.trace.iter().all(|r| r.tv <= 1.0 + DEGENERATE_PENALTY));
    }
}
