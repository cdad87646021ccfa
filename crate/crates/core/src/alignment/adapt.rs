use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::maps::{preimages, AlignmentMaps};
use crate::error::{Error, Result};
use crate::mdp::TabularPolicy;
use crate::optimality::OptimalityTable;

/// `pi_x(a_x | s_x) = sum over a_y with g(a_y) = a_x of pi_y(a_y | f(s_x))`.
pub fn adapt_policy(
    pi_y: &TabularPolicy,
    maps: &AlignmentMaps,
    action_count_x: usize,
) -> Result<TabularPolicy> {
    maps.check_dims(
        maps.f.len(),
        action_count_x,
        pi_y.state_count(),
        pi_y.action_count(),
    )?;
    let probs = maps
        .f
        .iter()
        .map(|&sy| {
            let mut row = vec![0.0; action_count_x];
            for (b, &p) in pi_y.row(sy).iter().enumerate() {
                row[maps.g[b]] += p;
            }
            row
        })
        .collect();
    Ok(TabularPolicy::from_rows_unchecked(probs))
}

/// Right inverse `g` of `psi` on the actions that appear in some `O_y = 1` pair.
///
/// With `seed = None` the smallest preimage is chosen; otherwise a uniformly
/// random one. Actions outside the optimal-relevant set take their smallest
/// preimage when one exists and `0` otherwise.
pub fn inverse_action_map(
    psi: &[usize],
    oy: &OptimalityTable,
    seed: Option<u64>,
) -> Result<Vec<usize>> {
    let ay = oy.action_count();
    if let Some(i) = psi.iter().position(|&b| b >= ay) {
        return Err(Error::DimensionMismatch(format!(
            "psi[{i}] = {} is outside 0..{ay}",
            psi[i]
        )));
    }
    let relevant = oy.relevant_actions();
    let pre = preimages(psi, ay);
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    (0..ay)
        .map(|b| match (pre[b].first(), relevant[b]) {
            (None, true) => Err(Error::EmptyPreimage { action_y: b }),
            (None, false) => Ok(0),
            (Some(&first), _) => Ok(match rng.as_mut() {
                Some(r) => *pre[b].choose(r).expect("nonempty"),
                None => first,
            }),
        })
        .collect()
}
