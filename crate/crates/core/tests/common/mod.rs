//! Reference implementations written directly from the definitions, with no
//! shared code paths with the library. Slow on purpose.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mdpalign::{CriterionMode, TabularMdp, TabularPolicy};

pub type TripleMass = BTreeMap<(usize, usize, usize), f64>;

/// Discounted return of a deterministic policy from `s`, summing the
/// transient prefix and the closed-form geometric series of the cycle.
pub fn deterministic_value(m: &TabularMdp, actions: &[usize], s: usize) -> f64 {
    let g = m.gamma();
    let mut first_seen = vec![usize::MAX; m.state_count()];
    let mut rewards = Vec::new();
    let mut cur = s;
    while first_seen[cur] == usize::MAX {
        first_seen[cur] = rewards.len();
        rewards.push(m.reward(cur, actions[cur]));
        cur = m.next(cur, actions[cur]);
    }
    let p = first_seen[cur];
    let prefix: f64 = rewards[..p]
        .iter()
        .enumerate()
        .map(|(t, r)| g.powi(t as i32) * r)
        .sum();
    let cycle = &rewards[p..];
    let c: f64 = cycle
        .iter()
        .enumerate()
        .map(|(i, r)| g.powi(i as i32) * r)
        .sum();
    prefix + g.powi(p as i32) * c / (1.0 - g.powi(cycle.len() as i32))
}

/// Maximum of `J` over every deterministic stationary policy, or `None` when
/// there are more than `limit` of them.
pub fn brute_force_j_star(m: &TabularMdp, limit: u64) -> Option<f64> {
    let (n, k) = (m.state_count(), m.action_count());
    let count = (k as u64).checked_pow(n as u32)?;
    if count > limit {
        return None;
    }
    let mut best = f64::NEG_INFINITY;
    let mut actions = vec![0usize; n];
    for mut code in 0..count {
        for a in actions.iter_mut() {
            *a = (code % k as u64) as usize;
            code /= k as u64;
        }
        let j: f64 = (0..n)
            .map(|s| m.eta()[s] * deterministic_value(m, &actions, s))
            .sum();
        best = best.max(j);
    }
    Some(best)
}

/// `Q*` by plain Bellman sweeps until nothing moves.
pub fn naive_q_star(m: &TabularMdp) -> Vec<Vec<f64>> {
    let (n, k) = (m.state_count(), m.action_count());
    let mut q = vec![vec![0.0; k]; n];
    for _ in 0..200_000 {
        let v: Vec<f64> = q
            .iter()
            .map(|r| r.iter().cloned().fold(f64::MIN, f64::max))
            .collect();
        let mut delta: f64 = 0.0;
        for s in 0..n {
            for a in 0..k {
                let x = m.reward(s, a) + m.gamma() * v[m.next(s, a)];
                delta = delta.max((x - q[s][a]).abs());
                q[s][a] = x;
            }
        }
        if delta == 0.0 {
            break;
        }
    }
    q
}

pub fn naive_j_star(m: &TabularMdp) -> f64 {
    let q = naive_q_star(m);
    (0..m.state_count())
        .map(|s| m.eta()[s] * q[s].iter().cloned().fold(f64::MIN, f64::max))
        .sum()
}

/// `J(pi)` by pushing the state distribution forward for `horizon` steps.
pub fn truncated_value(m: &TabularMdp, pi: &TabularPolicy, horizon: usize) -> f64 {
    let n = m.state_count();
    let mut d = m.eta().to_vec();
    let mut total = 0.0;
    let mut disc = 1.0;
    for _ in 0..horizon {
        let mut next = vec![0.0; n];
        for s in 0..n {
            for a in 0..m.action_count() {
                let p = d[s] * pi.prob(s, a);
                total += disc * p * m.reward(s, a);
                next[m.next(s, a)] += p;
            }
        }
        d = next;
        disc *= m.gamma();
    }
    total
}

pub fn greedy_sets(m: &TabularMdp) -> Vec<Vec<usize>> {
    naive_q_star(m)
        .iter()
        .map(|row| {
            let v = row.iter().cloned().fold(f64::MIN, f64::max);
            (0..row.len())
                .filter(|&a| v - row[a] <= 1e-8 * v.abs().max(1.0))
                .collect()
        })
        .collect()
}

fn reach_from(succ: &[Vec<usize>], roots: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = roots.into_iter().collect();
    while let Some(s) = stack.pop() {
        if seen.insert(s) {
            stack.extend(succ[s].iter().copied());
        }
    }
    seen
}

/// Recurrent states among those reachable from `roots`: `s` such that every
/// state reachable from `s` leads back to `s`.
pub fn recurrent_states(
    succ: &[Vec<usize>],
    roots: impl IntoIterator<Item = usize>,
) -> BTreeSet<usize> {
    reach_from(succ, roots)
        .into_iter()
        .filter(|&s| {
            reach_from(succ, [s])
                .iter()
                .all(|&t| reach_from(succ, [t]).contains(&s))
        })
        .collect()
}

/// Optimality table derived from the greedy sets of [`naive_q_star`].
pub fn o_table(m: &TabularMdp, mode: CriterionMode) -> Vec<Vec<bool>> {
    let greedy = greedy_sets(m);
    let succ: Vec<Vec<usize>> = (0..m.state_count())
        .map(|s| greedy[s].iter().map(|&a| m.next(s, a)).collect())
        .collect();
    let roots: Vec<usize> = (0..m.state_count()).filter(|&s| m.eta()[s] > 0.0).collect();
    let members = match mode {
        CriterionMode::Stationary => recurrent_states(&succ, roots),
        CriterionMode::Occupancy => reach_from(&succ, roots),
    };
    (0..m.state_count())
        .map(|s| {
            (0..m.action_count())
                .map(|a| members.contains(&s) && greedy[s].contains(&a))
                .collect()
        })
        .collect()
}

/// Time average of the triple law over `burn..burn + window`.
pub fn cesaro_triplet(
    m: &TabularMdp,
    pi: &TabularPolicy,
    burn: usize,
    window: usize,
) -> TripleMass {
    let n = m.state_count();
    let mut d = m.eta().to_vec();
    let mut acc = TripleMass::new();
    for t in 0..burn + window {
        let mut next = vec![0.0; n];
        for s in 0..n {
            for a in 0..m.action_count() {
                let p = d[s] * pi.prob(s, a);
                if p == 0.0 {
                    continue;
                }
                let s2 = m.next(s, a);
                next[s2] += p;
                if t >= burn {
                    *acc.entry((s, a, s2)).or_insert(0.0) += p / window as f64;
                }
            }
        }
        d = next;
    }
    acc
}

/// Law of `s_t` by repeated multiplication with the state transition matrix.
pub fn marginal(m: &TabularMdp, pi: &TabularPolicy, t: usize) -> Vec<f64> {
    let n = m.state_count();
    let mut d = m.eta().to_vec();
    for _ in 0..t {
        let mut next = vec![0.0; n];
        for s in 0..n {
            for a in 0..m.action_count() {
                next[m.next(s, a)] += d[s] * pi.prob(s, a);
            }
        }
        d = next;
    }
    d
}

pub fn tv(p: &TripleMass, q: &TripleMass) -> f64 {
    let keys: BTreeSet<_> = p.keys().chain(q.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Reduction conditions checked literally with a double loop over x-pairs
/// for every optimal y-pair.
pub fn is_reduction(
    mx: &TabularMdp,
    ox: &[Vec<bool>],
    my: &TabularMdp,
    oy: &[Vec<bool>],
    phi: &[usize],
    psi: &[usize],
) -> bool {
    for s in 0..mx.state_count() {
        for a in 0..mx.action_count() {
            if oy[phi[s]][psi[a]] && !ox[s][a] {
                return false;
            }
        }
    }
    for t in 0..my.state_count() {
        for b in 0..my.action_count() {
            if !oy[t][b] {
                continue;
            }
            let mut hit = false;
            for s in 0..mx.state_count() {
                for a in 0..mx.action_count() {
                    if phi[s] == t && psi[a] == b {
                        hit = true;
                        if phi[mx.next(s, a)] != my.next(t, b) {
                            return false;
                        }
                    }
                }
            }
            if !hit {
                return false;
            }
        }
    }
    true
}

/// Every `(phi, psi)` in odometer order, filtered by [`is_reduction`].
pub fn all_reductions(
    mx: &TabularMdp,
    ox: &[Vec<bool>],
    my: &TabularMdp,
    oy: &[Vec<bool>],
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (sx, ax, sy, ay) = (
        mx.state_count(),
        mx.action_count(),
        my.state_count(),
        my.action_count(),
    );
    let mut out = Vec::new();
    for phi in all_maps(sx, sy) {
        for psi in all_maps(ax, ay) {
            if is_reduction(mx, ox, my, oy, &phi, &psi) {
                out.push((phi.clone(), psi));
            }
        }
    }
    out.sort();
    out
}

/// All functions `0..n -> 0..m` as vectors.
pub fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Injective functions `0..n -> 0..m`.
pub fn injective_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    all_maps(n, m)
        .into_iter()
        .filter(|v| v.iter().collect::<BTreeSet<_>>().len() == v.len())
        .collect()
}

/// Normal quantile bound: `|p_hat - p| <= 3 sqrt(p (1 - p) / n)` plus slack
/// for `p` near the edges.
pub fn within_three_sigma(p_hat: f64, p: f64, n: usize) -> bool {
    (p_hat - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt() + 1.0 / n as f64
}
