use serde::{Deserialize, Serialize};

use super::adapt::adapt_policy;
use super::maps::{AlignmentMaps, ReductionMap};
use crate::chain::{policy_value, stationary_states, stationary_triplet};
use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, TabularPolicy};
use crate::optimality::SolvedMdp;
use crate::triplet::TripletDistribution;

/// Objective 1 holds when the suboptimality gap is at most this.
pub const GAP_TOL: f64 = 1e-7;
/// Objective 2 holds when the total variation is at most this.
pub const TV_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScore {
    pub suboptimality_gap: f64,
    pub tv_distance: f64,
    pub objective1_met: bool,
    pub objective2_met: bool,
    pub j_optimal: f64,
    pub j_adapted: f64,
}

impl ObjectiveScore {
    pub fn both_met(&self) -> bool {
        self.objective1_met && self.objective2_met
    }
}

/// For each x-state, the unique y-action behind every supported adapted action.
fn support_inverse(
    pi_y: &TabularPolicy,
    maps: &AlignmentMaps,
    action_count_x: usize,
) -> Result<Vec<Vec<Option<usize>>>> {
    maps.f
        .iter()
        .enumerate()
        .map(|(sx, &sy)| {
            let mut inv: Vec<Option<usize>> = vec![None; action_count_x];
            for b in pi_y.support(sy) {
                let a = maps.g[b];
                if inv[a].replace(b).is_some() {
                    return Err(Error::NonInjectiveG {
                        state_x: sx,
                        action_x: a,
                    });
                }
            }
            Ok(inv)
        })
        .collect()
}

/// Stationary triplet distribution of the co-domain execution process: the
/// pushforward of the adapted policy's triplet distribution on `mx` through
/// `(s, a, s') -> (f(s), g^-1(a), f(s'))`.
pub fn codomain_triplet(
    mx: &TabularMdp,
    maps: &AlignmentMaps,
    pi_y: &TabularPolicy,
) -> Result<TripletDistribution> {
    maps.check_dims(
        mx.state_count(),
        mx.action_count(),
        pi_y.state_count(),
        pi_y.action_count(),
    )?;
    let inv = support_inverse(pi_y, maps, mx.action_count())?;
    let pi_x = adapt_policy(pi_y, maps, mx.action_count())?;
    let rho_x = stationary_triplet(mx, &pi_x)?;
    Ok(rho_x.pushforward(|(s, a, t)| {
        let b = inv[s][a].expect("supported x-action has a y-preimage");
        (maps.f[s], b, maps.f[t])
    }))
}

/// Caches the pieces of the objectives that do not depend on `(f, g)`.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluator<'a> {
    mx: &'a SolvedMdp,
    pi_y: &'a TabularPolicy,
    sigma_y: TripletDistribution,
    j_optimal: f64,
}

impl<'a> ObjectiveEvaluator<'a> {
    pub fn new(mx: &'a SolvedMdp, my: &'a SolvedMdp, pi_y: &'a TabularPolicy) -> Result<Self> {
        if mx.opt.mode() != my.opt.mode() {
            return Err(Error::ModeMismatch {
                x: mx.opt.mode().to_string(),
                y: my.opt.mode().to_string(),
            });
        }
        let sigma_y = stationary_triplet(&my.mdp, pi_y)?;
        Ok(ObjectiveEvaluator {
            mx,
            pi_y,
            sigma_y,
            j_optimal: mx.opt.optimal_value(&mx.mdp),
        })
    }

    pub fn target(&self) -> &TripletDistribution {
        &self.sigma_y
    }

    pub fn j_optimal(&self) -> f64 {
        self.j_optimal
    }

    pub fn evaluate(&self, maps: &AlignmentMaps) -> Result<ObjectiveScore> {
        let mdp = &self.mx.mdp;
        let sigma_xy = codomain_triplet(mdp, maps, self.pi_y)?;
        let pi_x = adapt_policy(self.pi_y, maps, mdp.action_count())?;
        let j_adapted = policy_value(mdp, &pi_x)?;
        let gap = self.j_optimal - j_adapted;
        let tv = sigma_xy.total_variation(&self.sigma_y);
        Ok(ObjectiveScore {
            suboptimality_gap: gap,
            tv_distance: tv,
            objective1_met: gap <= GAP_TOL,
            objective2_met: tv <= TV_TOL,
            j_optimal: self.j_optimal,
            j_adapted,
        })
    }
}

/// Suboptimality of the adapted policy and distance between the co-domain
/// process and the target process.
pub fn evaluate_objectives(
    mx: &SolvedMdp,
    my: &SolvedMdp,
    maps: &AlignmentMaps,
    pi_y: &TabularPolicy,
) -> Result<ObjectiveScore> {
    ObjectiveEvaluator::new(mx, my, pi_y)?.evaluate(maps)
}

/// Builds `(phi, psi)` from an alignment that meets both objectives: states
/// outside the adapted stationary support and actions never used by the
/// adapted policy go to the y-dummies.
pub fn construct_reduction(
    mx: &SolvedMdp,
    my: &SolvedMdp,
    maps: &AlignmentMaps,
    pi_y: &TabularPolicy,
) -> Result<ReductionMap> {
    let (Some(_), Some(_)) = (mx.mdp.dummy_state(), mx.mdp.dummy_action()) else {
        return Err(Error::PreconditionFailed(
            "x mdp is not dummy-augmented".into(),
        ));
    };
    let (Some(dy_state), Some(dy_action)) = (my.mdp.dummy_state(), my.mdp.dummy_action()) else {
        return Err(Error::PreconditionFailed(
            "y mdp is not dummy-augmented".into(),
        ));
    };
    if !maps.is_injective_g() {
        return Err(Error::PreconditionFailed("g is not injective".into()));
    }
    let score = evaluate_objectives(mx, my, maps, pi_y)?;
    if !score.both_met() {
        return Err(Error::PreconditionFailed(format!(
            "objectives not met (gap {:e}, tv {:e})",
            score.suboptimality_gap, score.tv_distance
        )));
    }

    let ax = mx.mdp.action_count();
    let pi_x = adapt_policy(pi_y, maps, ax)?;
    let mu_x = stationary_states(&mx.mdp, &pi_x)?;
    let phi = mu_x
        .iter()
        .zip(&maps.f)
        .map(|(&m, &sy)| if m > 0.0 { sy } else { dy_state })
        .collect();

    let mut g_inv = vec![None; ax];
    for (b, &a) in maps.g.iter().enumerate() {
        g_inv[a] = Some(b);
    }
    let used: Vec<bool> = (0..ax)
        .map(|a| (0..pi_x.state_count()).any(|s| pi_x.prob(s, a) > 0.0))
        .collect();
    let psi = (0..ax)
        .map(|a| match (used[a], g_inv[a]) {
            (true, Some(b)) => b,
            _ => dy_action,
        })
        .collect();
    Ok(ReductionMap { phi, psi })
}
