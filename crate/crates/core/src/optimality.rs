//! Optimal values, greedy action sets and the boolean optimality function.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{analyze_graph, successors};
use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, TabularPolicy};

/// Maximum number of value-iteration sweeps.
pub const MAX_SWEEPS: usize = 1_000_000;
/// Bellman residual target, relative to `max(1, |Q|_inf)`.
pub const RESIDUAL_TARGET: f64 = 1e-12;
/// Relative tolerance for including an action in a greedy set.
pub const TIE_TOL: f64 = 1e-8;

/// Which long-run criterion decides whether a state-action pair is "visited"
/// by an optimal policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionMode {
    /// Support of stationary distributions: recurrent states of the covering
    /// chain reachable from `supp(eta)`.
    #[default]
    Stationary,
    /// Support of the discounted occupancy measure: states reachable from
    /// `supp(eta)` along greedy actions.
    Occupancy,
}

impl fmt::Display for CriterionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionMode::Stationary => f.write_str("stationary"),
            CriterionMode::Occupancy => f.write_str("occupancy"),
        }
    }
}

impl FromStr for CriterionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(CriterionMode::Stationary),
            "occupancy" => Ok(CriterionMode::Occupancy),
            other => Err(Error::InvalidConfig(format!(
                "unknown criterion mode {other:?}"
            ))),
        }
    }
}

/// The optimality function `O(s, a)` as a boolean table.
///
/// Reduction checks only read this table and the dynamics, so it can also be
/// specified directly instead of being derived from rewards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityTable {
    pub mode: CriterionMode,
    pub o: Vec<Vec<bool>>,
}

impl OptimalityTable {
    pub fn new(mode: CriterionMode, o: Vec<Vec<bool>>) -> Self {
        OptimalityTable { mode, o }
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> bool {
        self.o[s][a]
    }

    pub fn state_count(&self) -> usize {
        self.o.len()
    }

    pub fn action_count(&self) -> usize {
        self.o.first().map_or(0, Vec::len)
    }

    /// Actions `a` with `O(s, a) = 1` for some state `s`.
    pub fn relevant_actions(&self) -> Vec<bool> {
        let mut out = vec![false; self.action_count()];
        for row in &self.o {
            for (a, &on) in row.iter().enumerate() {
                out[a] |= on;
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.o.iter().flatten().filter(|&&b| b).count()
    }
}

/// Output of [`solve_optimal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityModel {
    pub q_star: Vec<Vec<f64>>,
    pub v_star: Vec<f64>,
    pub greedy_sets: Vec<Vec<usize>>,
    pub recurrent_states: Vec<usize>,
    pub table: OptimalityTable,
    pub sweeps: usize,
}

impl OptimalityModel {
    #[inline]
    pub fn o(&self, s: usize, a: usize) -> bool {
        self.table.get(s, a)
    }

    pub fn mode(&self) -> CriterionMode {
        self.table.mode
    }

    pub fn is_greedy(&self, s: usize, a: usize) -> bool {
        self.greedy_sets[s].contains(&a)
    }

    /// Optimal expected discounted return from `eta`.
    pub fn optimal_value(&self, mdp: &TabularMdp) -> f64 {
        mdp.eta().iter().zip(&self.v_star).map(|(e, v)| e * v).sum()
    }
}

/// An MDP together with its solved optimality model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedMdp {
    pub mdp: TabularMdp,
    pub opt: OptimalityModel,
}

impl SolvedMdp {
    pub fn solve(mdp: TabularMdp, mode: CriterionMode) -> Result<Self> {
        let opt = solve_optimal(&mdp, mode)?;
        Ok(SolvedMdp { mdp, opt })
    }

    pub fn table(&self) -> &OptimalityTable {
        &self.opt.table
    }

    pub fn covering_policy(&self) -> TabularPolicy {
        covering_policy(&self.opt)
    }
}

fn bellman_sweep(mdp: &TabularMdp, q: &[Vec<f64>], out: &mut [Vec<f64>]) -> f64 {
    let gamma = mdp.gamma();
    let v: Vec<f64> = q
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut residual: f64 = 0.0;
    for (s, row) in out.iter_mut().enumerate() {
        for (a, cell) in row.iter_mut().enumerate() {
            let next = mdp.reward(s, a) + gamma * v[mdp.next(s, a)];
            residual = residual.max((next - q[s][a]).abs());
            *cell = next;
        }
    }
    residual
}

/// Computes `Q*` by synchronous value iteration, then greedy sets, the
/// recurrent support of the covering policy and `O` under `mode`.
pub fn solve_optimal(mdp: &TabularMdp, mode: CriterionMode) -> Result<OptimalityModel> {
    let n = mdp.state_count();
    let m = mdp.action_count();
    let mut q = vec![vec![0.0; m]; n];
    let mut next = q.clone();
    let mut sweeps = 0;
    loop {
        let residual = bellman_sweep(mdp, &q, &mut next);
        std::mem::swap(&mut q, &mut next);
        sweeps += 1;
        let scale = q.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        if residual <= RESIDUAL_TARGET * scale {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps, residual });
        }
    }

    let v_star: Vec<f64> = q
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let greedy_sets: Vec<Vec<usize>> = q
        .iter()
        .zip(&v_star)
        .map(|(row, &v)| {
            let tol = TIE_TOL * v.abs().max(1.0);
            (0..m).filter(|&a| row[a] >= v - tol).collect()
        })
        .collect();

    let greedy_graph = successors(mdp, |s, a| greedy_sets[s].contains(&a));
    let roots: Vec<usize> = mdp.eta_support().collect();
    let report = analyze_graph(&greedy_graph, &roots);
    let recurrent_states = report.recurrent_states();

    let active: Vec<bool> = match mode {
        CriterionMode::Stationary => {
            let mut mask = vec![false; n];
            for &s in &recurrent_states {
                mask[s] = true;
            }
            mask
        }
        CriterionMode::Occupancy => {
            let mut mask = vec![false; n];
            for &s in &report.reachable {
                mask[s] = true;
            }
            mask
        }
    };
    let o: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut row = vec![false; m];
            if active[s] {
                for &a in &greedy_sets[s] {
                    row[a] = true;
                }
            }
            row
        })
        .collect();

    if let Some(d) = mdp.dummy_state() {
        for s in (0..n).filter(|&s| s != d) {
            if let Some(a) = (0..m).find(|&a| o[s][a] && mdp.next(s, a) == d) {
                return Err(Error::PreconditionFailed(format!(
                    "optimal pair ({s}, {a}) leads into the dummy state"
                )));
            }
        }
    }

    Ok(OptimalityModel {
        q_star: q,
        v_star,
        greedy_sets,
        recurrent_states,
        table: OptimalityTable::new(mode, o),
        sweeps,
    })
}

/// Uniform mixture over the greedy set of every state.
pub fn covering_policy(opt: &OptimalityModel) -> TabularPolicy {
    let m = opt.table.action_count();
    let probs = opt
        .greedy_sets
        .iter()
        .map(|set| {
            let mut row = vec![0.0; m];
            let p = 1.0 / set.len() as f64;
            for &a in set {
                row[a] = p;
            }
            row
        })
        .collect();
    TabularPolicy::new(probs).expect("greedy sets are nonempty")
}
