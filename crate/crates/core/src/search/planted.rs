use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{verify_reduction, ReductionMap};
use crate::chain::analyze_graph;
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::optimality::{solve_optimal, CriterionMode, SolvedMdp};

const MAX_DRAWS: usize = 100_000;
/// Minimum gap between the best and second-best action value in a base MDP.
const MIN_MARGIN: f64 = 1e-6;

fn default_gamma() -> f64 {
    0.95
}

fn default_permute() -> bool {
    true
}

/// How to build a pair with a known reduction from `M_x` to `M_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub base_states: usize,
    pub base_actions: usize,
    pub split_factor_states: usize,
    pub split_factor_actions: usize,
    #[serde(default = "default_permute")]
    pub permute: bool,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl PlantSpec {
    pub fn new(
        base_states: usize,
        base_actions: usize,
        split_states: usize,
        split_actions: usize,
    ) -> Self {
        PlantSpec {
            base_states,
            base_actions,
            split_factor_states: split_states,
            split_factor_actions: split_actions,
            permute: true,
            rng_seed: 0,
            gamma: default_gamma(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("base_states", self.base_states),
            ("base_actions", self.base_actions),
            ("split_factor_states", self.split_factor_states),
            ("split_factor_actions", self.split_factor_actions),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma {} is not in (0, 1)",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// A generated pair and the reduction planted between them.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPair {
    pub mx: TabularMdp,
    pub my: TabularMdp,
    pub planted: ReductionMap,
}

/// Random MDP with uniform rewards in `[0, 1)` and uniform `eta`.
pub fn random_mdp<R: Rng>(rng: &mut R, states: usize, actions: usize, gamma: f64) -> TabularMdp {
    let transition = (0..states)
        .map(|_| (0..actions).map(|_| rng.gen_range(0..states)).collect())
        .collect();
    let reward = (0..states)
        .map(|_| (0..actions).map(|_| rng.gen::<f64>()).collect())
        .collect();
    TabularMdp::new(transition, reward, vec![1.0 / states as f64; states], gamma)
        .expect("random mdp is valid")
}

/// Base MDP whose greedy actions are unique and whose greedy graph is a single
/// cycle with trees hanging off it. Returns the greedy actions and the cycle in
/// traversal order. With `hamiltonian` the cycle must visit every state.
fn sample_base<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    gamma: f64,
    hamiltonian: bool,
) -> Result<(TabularMdp, Vec<usize>, Vec<usize>)> {
    for _ in 0..MAX_DRAWS {
        let mdp = random_mdp(rng, n, m, gamma);
        let opt = solve_optimal(&mdp, CriterionMode::Stationary)?;
        let clear = opt
            .q_star
            .iter()
            .zip(&opt.v_star)
            .all(|(row, &v)| row.iter().filter(|&&q| q > v - MIN_MARGIN).count() == 1);
        if !clear {
            continue;
        }
        let greedy: Vec<usize> = opt.greedy_sets.iter().map(|g| g[0]).collect();
        let graph: Vec<Vec<usize>> = (0..n).map(|s| vec![mdp.next(s, greedy[s])]).collect();
        let roots: Vec<usize> = (0..n).collect();
        let report = analyze_graph(&graph, &roots);
        if report.recurrent_classes.len() != 1
            || (hamiltonian && report.recurrent_classes[0].len() != n)
        {
            continue;
        }
        let start = report.recurrent_classes[0][0];
        let mut cycle = vec![start];
        let mut s = mdp.next(start, greedy[start]);
        while s != start {
            cycle.push(s);
            s = mdp.next(s, greedy[s]);
        }
        return Ok((mdp, greedy, cycle));
    }
    Err(Error::PreconditionFailed(format!(
        "no base mdp with unique greedy actions and a single greedy cycle after {MAX_DRAWS} draws"
    )))
}

/// Random MDP with uniform `eta` whose optimal actions are unique and visit
/// every state in a single cycle, so every state is recurrent under the
/// optimal policy.
pub fn random_regular_mdp<R: Rng>(
    rng: &mut R,
    states: usize,
    actions: usize,
    gamma: f64,
) -> Result<TabularMdp> {
    Ok(sample_base(rng, states, actions, gamma, true)?.0)
}

/// Splits every state of `my` into `k` copies and every action into `ka`
/// exact duplicates.
///
/// Unpermuted copy `c` of state `s` is `s * k + c` and duplicate `j` of action
/// `a` is `a * ka + j`; both are then relabeled through `state_perm` and
/// `action_perm`. Copy `c` moves under `a` to copy `c + shift[s][a] mod k` of
/// `P_y(s, a)`. Rewards are copied, `eta` is uniform over every copy of the
/// `eta`-support and dummies are dropped. The returned map is a reduction
/// from the lift to `my` whenever `supp(eta_y)` is the whole state set.
pub fn lift_mdp(
    my: &TabularMdp,
    k: usize,
    ka: usize,
    shift: &[Vec<usize>],
    state_perm: &[usize],
    action_perm: &[usize],
) -> Result<(TabularMdp, ReductionMap)> {
    let (n, m) = (my.state_count(), my.action_count());
    let (nx, mx_actions) = (n * k, m * ka);
    if state_perm.len() != nx || action_perm.len() != mx_actions {
        return Err(Error::DimensionMismatch(
            "permutation sizes do not match the lift".into(),
        ));
    }
    let mut transition = vec![vec![0; mx_actions]; nx];
    let mut reward = vec![vec![0.0; mx_actions]; nx];
    let mut eta = vec![0.0; nx];
    let mut phi = vec![0; nx];
    let mut psi = vec![0; mx_actions];
    for s in 0..n {
        for c in 0..k {
            let sx = state_perm[s * k + c];
            phi[sx] = s;
            eta[sx] = my.eta()[s] / k as f64;
            for a in 0..m {
                let target = state_perm[my.next(s, a) * k + (c + shift[s][a]) % k];
                for j in 0..ka {
                    let ax = action_perm[a * ka + j];
                    transition[sx][ax] = target;
                    reward[sx][ax] = my.reward(s, a);
                }
            }
        }
    }
    for a in 0..m {
        for j in 0..ka {
            psi[action_perm[a * ka + j]] = a;
        }
    }
    let mx = TabularMdp::new(transition, reward, eta, my.gamma())?;
    Ok((mx, ReductionMap::new(phi, psi)))
}

fn shifts_and_perms(
    rng: &mut ChaCha8Rng,
    spec: &PlantSpec,
    greedy: &[usize],
    cycle: &[usize],
) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
    let (n, m) = (spec.base_states, spec.base_actions);
    let (k, ka) = (spec.split_factor_states, spec.split_factor_actions);
    let mut w = vec![vec![0usize; m]; n];
    for row in w.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.gen_range(0..k);
        }
    }
    for &s in cycle {
        w[s][greedy[s]] = 0;
    }
    w[cycle[0]][greedy[cycle[0]]] = 1 % k;

    let mut state_perm: Vec<usize> = (0..n * k).collect();
    let mut action_perm: Vec<usize> = (0..m * ka).collect();
    if spec.permute {
        state_perm.shuffle(rng);
        action_perm.shuffle(rng);
    }
    (w, state_perm, action_perm)
}

fn check_planted(mx: &TabularMdp, my: &TabularMdp, planted: &ReductionMap) -> Result<()> {
    let sx = SolvedMdp::solve(mx.clone(), CriterionMode::Stationary)?;
    let sy = SolvedMdp::solve(my.clone(), CriterionMode::Stationary)?;
    let report = verify_reduction(&sx, &sy, planted)?;
    if !report.is_empty() {
        return Err(Error::PreconditionFailed(format!(
            "planted map fails {} reduction conditions",
            report.len()
        )));
    }
    Ok(())
}

/// Builds `(M_x, M_y, (phi, psi))` where `M_x` is a [`lift_mdp`] of a random
/// `M_y` with unique greedy actions and a single greedy cycle.
///
/// The shift is 1 on one edge of the greedy cycle, 0 on the other cycle edges
/// and random elsewhere, so the greedy cycle lifts to a single cycle through
/// every copy and the adapted covering policy is unichain.
pub fn generate_planted(spec: &PlantSpec) -> Result<PlantedPair> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (my, greedy, cycle) = sample_base(
        &mut rng,
        spec.base_states,
        spec.base_actions,
        spec.gamma,
        false,
    )?;
    let (w, state_perm, action_perm) = shifts_and_perms(&mut rng, spec, &greedy, &cycle);
    let (k, ka) = (spec.split_factor_states, spec.split_factor_actions);
    let (mx, planted) = lift_mdp(&my, k, ka, &w, &state_perm, &action_perm)?;
    check_planted(&mx, &my, &planted)?;
    Ok(PlantedPair { mx, my, planted })
}

/// `tasks` planted pairs sharing dynamics, `eta`, `gamma` and the planted
/// reduction, differing only in rewards. Reward draws under which the planted
/// map stops being a reduction are discarded. The first pair is the one
/// [`generate_planted`] returns for `spec`.
pub fn generate_planted_tasks(spec: &PlantSpec, tasks: usize) -> Result<Vec<PlantedPair>> {
    let first = generate_planted(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed ^ 0x5eed_7a5c);
    rng.set_stream(1);
    let (n, m) = (first.my.state_count(), first.my.action_count());
    let mut out = vec![first];
    let mut draws = 0;
    while out.len() < tasks {
        draws += 1;
        if draws > MAX_DRAWS {
            return Err(Error::PreconditionFailed(format!(
                "no reward draw kept the planted map a reduction after {MAX_DRAWS} draws"
            )));
        }
        let reward: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let my = out[0].my.with_reward(reward)?;
        let mut x_reward = vec![vec![0.0; out[0].mx.action_count()]; out[0].mx.state_count()];
        for (sx, row) in x_reward.iter_mut().enumerate() {
            for (ax, cell) in row.iter_mut().enumerate() {
                *cell = my.reward(out[0].planted.phi[sx], out[0].planted.psi[ax]);
            }
        }
        let mx = out[0].mx.with_reward(x_reward)?;
        let planted = out[0].planted.clone();
        match check_planted(&mx, &my, &planted) {
            Ok(()) => out.push(PlantedPair { mx, my, planted }),
            Err(Error::PreconditionFailed(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsplit_permuted_is_a_permutation() {
        let p = generate_planted(&PlantSpec::new(4, 2, 1, 1).with_seed(3)).unwrap();
        assert!(p.planted.is_permutation(4, 2));
    }

    #[test]
    fn split_sizes() {
        let p = generate_planted(&PlantSpec::new(3, 2, 2, 1).with_seed(1)).unwrap();
        assert_eq!(p.mx.state_count(), 6);
        assert_eq!(p.mx.action_count(), 2);
    }

    #[test]
    fn seeded_reproducible() {
        let spec = PlantSpec::new(3, 3, 2, 2).with_seed(9);
        assert_eq!(
            generate_planted(&spec).unwrap(),
            generate_planted(&spec).unwrap()
        );
    }

    #[test]
    fn tasks_share_dynamics() {
        let tasks = generate_planted_tasks(&PlantSpec::new(2, 2, 2, 1).with_seed(4), 3).unwrap();
        assert_eq!(tasks.len(), 3);
        assert!(tasks[1].mx.same_structure(&tasks[0].mx));
        assert!(tasks[2].my.same_structure(&tasks[0].my));
        assert_ne!(tasks[1].my.rewards(), tasks[0].my.rewards());
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(generate_planted(&PlantSpec::new(0, 1, 1, 1)).is_err());
    }
}
