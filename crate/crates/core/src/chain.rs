//! Markov chains induced by a policy on a deterministic MDP: structure
//! reports, exact policy values and stationary triplet distributions.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, TabularPolicy};
use crate::triplet::TripletDistribution;

/// Structure of the chain a policy induces from the initial distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    /// States reachable from `supp(eta)`, ascending.
    pub reachable: Vec<usize>,
    /// Closed communicating classes among the reachable states, each ascending,
    /// ordered by their smallest state.
    pub recurrent_classes: Vec<Vec<usize>>,
    /// Period of each recurrent class, aligned with `recurrent_classes`.
    pub periods: Vec<usize>,
}

impl ChainReport {
    pub fn is_unichain(&self) -> bool {
        self.recurrent_classes.len() == 1
    }

    pub fn is_aperiodic(&self) -> bool {
        self.periods.iter().all(|&p| p == 1)
    }

    /// Union of all recurrent classes.
    pub fn recurrent_states(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.recurrent_classes.iter().flatten().copied().collect();
        out.sort_unstable();
        out
    }
}

/// Successor lists of the graph with an edge `s -> P(s,a)` for every action
/// `a` with `allowed(s, a)`.
pub(crate) fn successors(
    mdp: &TabularMdp,
    mut allowed: impl FnMut(usize, usize) -> bool,
) -> Vec<Vec<usize>> {
    (0..mdp.state_count())
        .map(|s| {
            let mut next: Vec<usize> = (0..mdp.action_count())
                .filter(|&a| allowed(s, a))
                .map(|a| mdp.next(s, a))
                .collect();
            next.sort_unstable();
            next.dedup();
            next
        })
        .collect()
}

fn reach_from(graph: &[Vec<usize>], roots: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; graph.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for r in roots {
        if !seen[r] {
            seen[r] = true;
            queue.push_back(r);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn class_period(graph: &[Vec<usize>], class: &[usize]) -> usize {
    let n = graph.len();
    let mut in_class = vec![false; n];
    for &s in class {
        in_class[s] = true;
    }
    let mut level = vec![usize::MAX; n];
    let root = class[0];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if in_class[v] && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0;
    for &u in class {
        for &v in &graph[u] {
            if in_class[v] {
                let diff = (level[u] + 1).abs_diff(level[v]);
                period = gcd(period, diff);
            }
        }
    }
    period.max(1)
}

/// Reachability and recurrent-class structure of a successor graph from `roots`.
pub(crate) fn analyze_graph(graph: &[Vec<usize>], roots: &[usize]) -> ChainReport {
    let n = graph.len();
    let reachable_mask = reach_from(graph, roots.iter().copied());
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            if reachable_mask[s] {
                reach_from(graph, [s])
            } else {
                Vec::new()
            }
        })
        .collect();

    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for s in 0..n {
        if !reachable_mask[s] || assigned[s] {
            continue;
        }
        // s is recurrent iff every state it reaches can reach it back.
        let closed = (0..n).all(|t| !reach[s][t] || reach[t][s]);
        if closed {
            let class: Vec<usize> = (0..n).filter(|&t| reach[s][t]).collect();
            for &t in &class {
                assigned[t] = true;
            }
            classes.push(class);
        }
    }
    let periods = classes.iter().map(|c| class_period(graph, c)).collect();
    ChainReport {
        reachable: (0..n).filter(|&s| reachable_mask[s]).collect(),
        recurrent_classes: classes,
        periods,
    }
}

/// Reports reachable states, recurrent classes and their periods for the chain
/// `pi` induces on `mdp` from `supp(eta)`.
pub fn validate_chain(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<ChainReport> {
    pi.check_shape(mdp)?;
    let graph = successors(mdp, |s, a| pi.prob(s, a) > 0.0);
    let roots: Vec<usize> = mdp.eta_support().collect();
    Ok(analyze_graph(&graph, &roots))
}

/// State-to-state transition matrix of the chain induced by `pi`.
pub fn state_transition_matrix(mdp: &TabularMdp, pi: &TabularPolicy) -> DMatrix<f64> {
    let n = mdp.state_count();
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for (a, &w) in pi.row(s).iter().enumerate() {
            if w > 0.0 {
                p[(s, mdp.next(s, a))] += w;
            }
        }
    }
    p
}

/// Expected discounted return `eta^T (I - gamma P_pi)^-1 r_pi`, by direct solve.
pub fn policy_value(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<f64> {
    let v = state_values(mdp, pi)?;
    Ok(mdp.eta().iter().zip(v.iter()).map(|(e, v)| e * v).sum())
}

/// Discounted value of every state under `pi`.
pub fn state_values(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<Vec<f64>> {
    pi.check_shape(mdp)?;
    let n = mdp.state_count();
    let p = state_transition_matrix(mdp, pi);
    let a = DMatrix::<f64>::identity(n, n) - p * mdp.gamma();
    let b = DVector::from_iterator(
        n,
        (0..n).map(|s| {
            pi.row(s)
                .iter()
                .enumerate()
                .map(|(a, &w)| w * mdp.reward(s, a))
                .sum::<f64>()
        }),
    );
    let v = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("policy evaluation".into()))?;
    let residual = (&a * &v - &b).amax();
    let scale = b.amax().max(1.0);
    if residual > 1e-10 * scale {
        return Err(Error::SingularSystem(format!(
            "policy evaluation residual {residual:e}"
        )));
    }
    Ok(v.iter().copied().collect())
}

/// Stationary state distribution of the unique recurrent class reachable from
/// `supp(eta)`; zero on every other state.
pub fn stationary_states(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<Vec<f64>> {
    let report = validate_chain(mdp, pi)?;
    if !report.is_unichain() {
        return Err(Error::Multichain {
            classes: report.recurrent_classes.len(),
        });
    }
    let class = &report.recurrent_classes[0];
    let k = class.len();
    let p = state_transition_matrix(mdp, pi);

    // mu^T (P_C - I) = 0 with the last balance equation replaced by sum(mu) = 1.
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (row, &j) in class.iter().enumerate() {
        for (col, &i) in class.iter().enumerate() {
            a[(row, col)] = p[(i, j)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for col in 0..k {
        a[(k - 1, col)] = 1.0;
    }
    let mut b = DVector::zeros(k);
    b[k - 1] = 1.0;
    let mu = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("stationary distribution".into()))?;

    let mut out = vec![0.0; mdp.state_count()];
    for (idx, &s) in class.iter().enumerate() {
        out[s] = mu[idx].max(0.0);
    }
    let total: f64 = out.iter().sum();
    for x in &mut out {
        *x /= total;
    }
    Ok(out)
}

/// Exact stationary distribution over `(s, a, s')` triples:
/// `mu(s) * pi(a|s) * 1[s' = P(s,a)]`.
pub fn stationary_triplet(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<TripletDistribution> {
    let mu = stationary_states(mdp, pi)?;
    let mut mass = BTreeMap::new();
    for (s, &m) in mu.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        for a in pi.support(s) {
            mass.insert((s, a, mdp.next(s, a)), m * pi.prob(s, a));
        }
    }
    Ok(TripletDistribution::exact(mass))
}
