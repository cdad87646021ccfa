use std::collections::HashMap;

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alignment::{verify_reduction, ReductionMap};
use crate::error::Result;
use crate::mdp::TabularMdp;
use crate::optimality::{OptimalityTable, SolvedMdp};

/// Coarsest quotient found by merging, and the reduction onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalReduction {
    pub quotient: SolvedMdp,
    pub reduction: ReductionMap,
    /// Number of accepted merges.
    pub merges: usize,
}

#[derive(Debug, Clone, Copy)]
enum Merge {
    States(usize, usize),
    Actions(usize, usize),
}

/// Relabels classes so that they are numbered by their smallest member.
fn canonical(labels: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    labels
        .map(|l| {
            let next = seen.len();
            *seen.entry(l).or_insert(next)
        })
        .collect()
}

fn union_find_from(labels: &[usize]) -> UnionFind<usize> {
    let mut uf = UnionFind::new(labels.len());
    let mut first: HashMap<usize, usize> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if let Some(&j) = first.get(&l) {
            uf.union(i, j);
        } else {
            first.insert(l, i);
        }
    }
    uf
}

/// Applies `merge` and then merges successors until every class pair whose
/// members are all optimal has a single successor class.
fn close(m: &SolvedMdp, phi: &[usize], psi: &[usize], merge: Merge) -> (Vec<usize>, Vec<usize>) {
    let mdp = &m.mdp;
    let o = m.table();
    let mut us = union_find_from(phi);
    let mut ua = union_find_from(psi);
    match merge {
        Merge::States(i, j) => {
            us.union(i, j);
        }
        Merge::Actions(i, j) => {
            ua.union(i, j);
        }
    }
    loop {
        let mut groups: HashMap<(usize, usize), (bool, Vec<usize>)> = HashMap::new();
        for s in 0..mdp.state_count() {
            for a in 0..mdp.action_count() {
                let entry = groups
                    .entry((us.find(s), ua.find(a)))
                    .or_insert((true, Vec::new()));
                entry.0 &= o.get(s, a);
                entry.1.push(mdp.next(s, a));
            }
        }
        let mut changed = false;
        for (all_optimal, next) in groups.values() {
            if *all_optimal {
                for &t in &next[1..] {
                    changed |= us.union(next[0], t);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let phi = canonical((0..mdp.state_count()).map(|s| us.find(s)));
    let psi = canonical((0..mdp.action_count()).map(|a| ua.find(a)));
    (phi, psi)
}

/// Quotient MDP under class maps numbered by smallest member. Each class
/// takes the dynamics and rewards of its smallest member; dummies survive
/// only as singleton classes.
pub fn quotient_mdp(mdp: &TabularMdp, phi: &[usize], psi: &[usize]) -> Result<TabularMdp> {
    let nq = phi.iter().max().map_or(0, |&c| c + 1);
    let mq = psi.iter().max().map_or(0, |&c| c + 1);
    let mut rep_s = vec![usize::MAX; nq];
    let mut rep_a = vec![usize::MAX; mq];
    let mut size_s = vec![0usize; nq];
    let mut size_a = vec![0usize; mq];
    for (s, &c) in phi.iter().enumerate() {
        rep_s[c] = rep_s[c].min(s);
        size_s[c] += 1;
    }
    for (a, &c) in psi.iter().enumerate() {
        rep_a[c] = rep_a[c].min(a);
        size_a[c] += 1;
    }
    let transition = rep_s
        .iter()
        .map(|&s| rep_a.iter().map(|&a| phi[mdp.next(s, a)]).collect())
        .collect();
    let reward = rep_s
        .iter()
        .map(|&s| rep_a.iter().map(|&a| mdp.reward(s, a)).collect())
        .collect();
    let mut eta = vec![0.0; nq];
    for (s, &c) in phi.iter().enumerate() {
        eta[c] += mdp.eta()[s];
    }
    let state_labels = rep_s
        .iter()
        .map(|&s| mdp.state_labels()[s].clone())
        .collect();
    let action_labels = rep_a
        .iter()
        .map(|&a| mdp.action_labels()[a].clone())
        .collect();
    let q = TabularMdp::with_labels(
        state_labels,
        action_labels,
        transition,
        reward,
        eta,
        mdp.gamma(),
    )?;
    let dummy_state = mdp
        .dummy_state()
        .map(|d| phi[d])
        .filter(|&c| size_s[c] == 1);
    let dummy_action = mdp
        .dummy_action()
        .map(|d| psi[d])
        .filter(|&c| size_a[c] == 1);
    q.with_dummies(dummy_state, dummy_action)
}

fn try_quotient(m: &SolvedMdp, phi: &[usize], psi: &[usize]) -> Option<SolvedMdp> {
    let q = quotient_mdp(&m.mdp, phi, psi).ok()?;
    let q = SolvedMdp::solve(q, m.opt.mode()).ok()?;
    let r = ReductionMap::new(phi.to_vec(), psi.to_vec());
    let ok = verify_reduction(m, &q, &r).ok()?.is_empty();
    ok.then_some(q)
}

/// [`maximal_reduction_ordered`] with lexicographic merge order.
pub fn maximal_reduction(m: &SolvedMdp) -> Result<MaximalReduction> {
    maximal_reduction_ordered(m, None)
}

/// Merges state pairs and action pairs until no merge is accepted. A merge
/// is accepted when the re-solved quotient verifies as a reduction of `m`.
/// With a seed, candidate merges are tried in a shuffled order.
pub fn maximal_reduction_ordered(m: &SolvedMdp, seed: Option<u64>) -> Result<MaximalReduction> {
    let (n, k) = (m.mdp.state_count(), m.mdp.action_count());
    let mut candidates: Vec<Merge> = (0..n)
        .tuple_combinations()
        .map(|(i, j)| Merge::States(i, j))
        .chain(
            (0..k)
                .tuple_combinations()
                .map(|(i, j)| Merge::Actions(i, j)),
        )
        .collect();
    if let Some(seed) = seed {
        candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut phi: Vec<usize> = (0..n).collect();
    let mut psi: Vec<usize> = (0..k).collect();
    let mut quotient = try_quotient(m, &phi, &psi).unwrap_or_else(|| m.clone());
    let mut merges = 0;
    loop {
        let mut accepted = false;
        for &c in &candidates {
            let already = match c {
                Merge::States(i, j) => phi[i] == phi[j],
                Merge::Actions(i, j) => psi[i] == psi[j],
            };
            if already {
                continue;
            }
            let (p2, q2) = close(m, &phi, &psi, c);
            if let Some(q) = try_quotient(m, &p2, &q2) {
                phi = p2;
                psi = q2;
                quotient = q;
                merges += 1;
                accepted = true;
            }
        }
        if !accepted {
            break;
        }
    }
    Ok(MaximalReduction {
        quotient,
        reduction: ReductionMap::new(phi, psi),
        merges,
    })
}

fn row_signature(o: &OptimalityTable) -> Vec<usize> {
    let mut sig: Vec<usize> =
        o.o.iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .collect();
    sig.sort_unstable();
    sig
}

fn column_signature(o: &OptimalityTable) -> Vec<usize> {
    let mut sig: Vec<usize> = (0..o.action_count())
        .map(|a| o.o.iter().filter(|row| row[a]).count())
        .collect();
    sig.sort_unstable();
    sig
}

struct IsoSearch<'a> {
    a: &'a TabularMdp,
    oa: &'a OptimalityTable,
    b: &'a TabularMdp,
    ob: &'a OptimalityTable,
    psi: Vec<usize>,
}

impl IsoSearch<'_> {
    fn fits(&self, s: usize, phi: &[usize]) -> bool {
        let t = phi[s];
        for (a, &b) in self.psi.iter().enumerate() {
            let on = self.oa.get(s, a);
            if on != self.ob.get(t, b) {
                return false;
            }
            if on {
                let next = self.a.next(s, a);
                if next <= s && phi[next] != self.b.next(t, b) {
                    return false;
                }
            }
        }
        for src in 0..s {
            for (a, &b) in self.psi.iter().enumerate() {
                if self.oa.get(src, a) && self.a.next(src, a) == s && self.b.next(phi[src], b) != t
                {
                    return false;
                }
            }
        }
        true
    }

    fn assign(&self, s: usize, phi: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if s == phi.len() {
            return true;
        }
        for t in 0..used.len() {
            if used[t] {
                continue;
            }
            phi[s] = t;
            if self.fits(s, phi) {
                used[t] = true;
                if self.assign(s + 1, phi, used) {
                    return true;
                }
                used[t] = false;
            }
        }
        false
    }
}

/// Bijections `(phi, psi)` with `O_b(phi s, psi a) = O_a(s, a)` everywhere and
/// `P_b(phi s, psi a) = phi(P_a(s, a))` wherever `O_a(s, a) = 1`, if any exist.
pub fn find_isomorphism(
    a: &TabularMdp,
    oa: &OptimalityTable,
    b: &TabularMdp,
    ob: &OptimalityTable,
) -> Option<ReductionMap> {
    let (n, k) = (a.state_count(), a.action_count());
    if n != b.state_count() || k != b.action_count() || oa.mode != ob.mode {
        return None;
    }
    if row_signature(oa) != row_signature(ob) || column_signature(oa) != column_signature(ob) {
        return None;
    }
    for psi in (0..k).permutations(k) {
        let search = IsoSearch { a, oa, b, ob, psi };
        let mut phi = vec![usize::MAX; n];
        let mut used = vec![false; n];
        if search.assign(0, &mut phi, &mut used) {
            return Some(ReductionMap::new(phi, search.psi));
        }
    }
    None
}

pub fn are_isomorphic(a: &SolvedMdp, b: &SolvedMdp) -> bool {
    find_isomorphism(&a.mdp, a.table(), &b.mdp, b.table()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimality::CriterionMode;

    fn solved(t: Vec<Vec<usize>>, r: Vec<Vec<f64>>) -> SolvedMdp {
        let n = t.len();
        let m = TabularMdp::new(t, r, vec![1.0 / n as f64; n], 0.9).unwrap();
        SolvedMdp::solve(m, CriterionMode::Stationary).unwrap()
    }

    #[test]
    fn duplicated_states_merge() {
        // 0 -> 1 -> 2 -> 0 and a copy 3 of state 0 that also moves to 1.
        let m = solved(
            vec![vec![1], vec![2], vec![0], vec![1]],
            vec![vec![1.0], vec![0.5], vec![0.2], vec![1.0]],
        );
        let out = maximal_reduction(&m).unwrap();
        assert!(out.quotient.mdp.state_count() <= 3);
        assert!(verify_reduction(&m, &out.quotient, &out.reduction)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn isomorphism_of_relabeled_cycle() {
        let a = solved(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        );
        let b = solved(
            vec![vec![1, 1], vec![0, 0]],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        );
        let iso = find_isomorphism(&a.mdp, a.table(), &b.mdp, b.table()).unwrap();
        assert_eq!(iso.psi, vec![1, 0]);
        let c = solved(
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        );
        assert!(!are_isomorphic(&a, &c));
    }

    #[test]
    fn canonical_numbering() {
        assert_eq!(canonical([7, 3, 7, 1].into_iter()), vec![0, 1, 0, 2]);
    }
}
