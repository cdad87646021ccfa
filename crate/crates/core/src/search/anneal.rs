use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{
    adapt_policy, AlignmentMaps, ObjectiveEvaluator, ObjectiveScore, GAP_TOL, TV_TOL,
};
use crate::chain::policy_value;
use crate::error::{Error, Result};
use crate::mdp::TabularPolicy;
use crate::optimality::SolvedMdp;

/// Extra distance charged to candidates whose co-domain process is undefined
/// (multichain adapted chain or ambiguous `g^-1`).
pub const DEGENERATE_PENALTY: f64 = 1.0;

fn default_lambda() -> f64 {
    10.0
}
fn default_initial_temperature() -> f64 {
    1.0
}
fn default_decay() -> f64 {
    0.995
}
fn default_max_iters() -> usize {
    20_000
}
fn default_restarts() -> usize {
    8
}

/// Simulated-annealing settings for [`search_alignment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_initial_temperature")]
    pub initial_temperature: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            lambda: default_lambda(),
            max_iters: default_max_iters(),
            restarts: default_restarts(),
            initial_temperature: default_initial_temperature(),
            decay: default_decay(),
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda {} must be >= 0",
                self.lambda
            )));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decay {} is not in (0, 1)",
                self.decay
            )));
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(Error::InvalidConfig(
                "initial_temperature must be positive".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Best-so-far loss after an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub gap: f64,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub maps: AlignmentMaps,
    pub score: ObjectiveScore,
    pub loss: f64,
    pub restart: usize,
    pub g_injective: bool,
    /// Best-so-far trace of the chosen restart.
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    loss: f64,
    gap: f64,
    tv: f64,
    met: bool,
}

struct Scorer<'a> {
    eval: ObjectiveEvaluator<'a>,
    mx: &'a SolvedMdp,
    pi_y: &'a TabularPolicy,
    lambda: f64,
}

impl Scorer<'_> {
    fn score(&self, maps: &AlignmentMaps) -> Result<Eval> {
        match self.eval.evaluate(maps) {
            Ok(s) => Ok(Eval {
                loss: s.suboptimality_gap + self.lambda * s.tv_distance,
                gap: s.suboptimality_gap,
                tv: s.tv_distance,
                met: s.suboptimality_gap <= GAP_TOL && s.tv_distance <= TV_TOL,
            }),
            Err(Error::Multichain { .. } | Error::NonInjectiveG { .. }) => {
                let pi_x = adapt_policy(self.pi_y, maps, self.mx.mdp.action_count())?;
                let gap = self.eval.j_optimal() - policy_value(&self.mx.mdp, &pi_x)?;
                let tv = 1.0 + DEGENERATE_PENALTY;
                Ok(Eval {
                    loss: gap + self.lambda * tv,
                    gap,
                    tv,
                    met: false,
                })
            }
            Err(e) => Err(e),
        }
    }
}

struct RestartResult {
    maps: AlignmentMaps,
    best: Eval,
    trace: Vec<TraceRow>,
}

fn run_restart(
    scorer: &Scorer<'_>,
    cfg: &SearchConfig,
    restart: usize,
    sizes: [usize; 4],
) -> Result<RestartResult> {
    let [sx, ax, sy, ay] = sizes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(restart as u64);

    let mut current = AlignmentMaps::new(
        (0..sx).map(|_| rng.gen_range(0..sy)).collect(),
        (0..ay).map(|_| rng.gen_range(0..ax)).collect(),
    );
    let mut cur = scorer.score(&current)?;
    let mut best_maps = current.clone();
    let mut best = cur;
    let mut trace = Vec::new();
    let mut temperature = cfg.initial_temperature;
    // One decay step per sweep, i.e. per expected visit of every table entry.
    let sweep = sx + ay;

    for iteration in 0..cfg.max_iters {
        if best.met {
            break;
        }
        let slot = rng.gen_range(0..sx + ay);
        let mut proposal = current.clone();
        let changed = if slot < sx {
            if sy > 1 {
                let old = proposal.f[slot];
                proposal.f[slot] = (old + rng.gen_range(1..sy)) % sy;
            }
            sy > 1
        } else {
            let b = slot - sx;
            if ax > 1 {
                let old = proposal.g[b];
                proposal.g[b] = (old + rng.gen_range(1..ax)) % ax;
            }
            ax > 1
        };
        if changed {
            let cand = scorer.score(&proposal)?;
            let delta = cand.loss - cur.loss;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                current = proposal;
                cur = cand;
                if cur.loss < best.loss || (cur.met && !best.met) {
                    best = cur;
                    best_maps = current.clone();
                }
            }
        }
        if (iteration + 1) % sweep == 0 {
            temperature *= cfg.decay;
        }
        trace.push(TraceRow {
            iteration,
            loss: best.loss,
            gap: best.gap,
            tv: best.tv,
        });
    }
    Ok(RestartResult {
        maps: best_maps,
        best,
        trace,
    })
}

/// Simulated annealing over `(f, g)` tables minimizing
/// `gap + lambda * TV(sigma_x->y, sigma_y)`.
///
/// Restarts use independent streams of one seeded generator and may run in
/// parallel. The result is the lowest-indexed restart that met both
/// objectives, or the lowest loss if none did, so it does not depend on
/// scheduling.
pub fn search_alignment(
    mx: &SolvedMdp,
    my: &SolvedMdp,
    pi_y: &TabularPolicy,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let sizes = [
        mx.mdp.state_count(),
        mx.mdp.action_count(),
        my.mdp.state_count(),
        my.mdp.action_count(),
    ];
    if pi_y.state_count() != sizes[2] || pi_y.action_count() != sizes[3] {
        return Err(Error::DimensionMismatch("pi_y does not match M_y".into()));
    }
    let scorer = Scorer {
        eval: ObjectiveEvaluator::new(mx, my, pi_y)?,
        mx,
        pi_y,
        lambda: cfg.lambda,
    };
    let results: Vec<RestartResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(&scorer, cfg, r, sizes))
        .collect::<Result<_>>()?;

    let chosen = results.iter().position(|r| r.best.met).unwrap_or_else(|| {
        let mut idx = 0;
        for (i, r) in results.iter().enumerate() {
            if r.best.loss < results[idx].best.loss {
                idx = i;
            }
        }
        idx
    });
    let RestartResult { maps, best, trace } =
        results.into_iter().nth(chosen).expect("restart exists");
    let score = match scorer.eval.evaluate(&maps) {
        Ok(s) => s,
        Err(_) => ObjectiveScore {
            suboptimality_gap: best.gap,
            tv_distance: best.tv,
            objective1_met: best.gap <= GAP_TOL,
            objective2_met: false,
            j_optimal: scorer.eval.j_optimal(),
            j_adapted: scorer.eval.j_optimal() - best.gap,
        },
    };
    Ok(SearchOutcome {
        g_injective: maps.is_injective_g(),
        maps,
        score,
        loss: best.loss,
        restart: chosen,
        trace,
    })
}
