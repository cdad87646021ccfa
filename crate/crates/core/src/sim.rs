//! Monte-Carlo rollouts, empirical triplet distributions and exact
//! finite-horizon state-sequence distributions.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, TabularPolicy};
use crate::triplet::{Triple, TripletDistribution};

/// Longest horizon accepted by [`sequence_distribution`].
pub const MAX_HORIZON: usize = 12;
/// Default limit on the number of distinct sequences.
pub const DEFAULT_SEQUENCE_CAP: u64 = 1_000_000;
/// Largest pointwise mass difference accepted as equal.
pub const PROCESS_TOL: f64 = 1e-9;

/// A sampled trajectory: `states` has one more entry than `actions`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rollout {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.actions
            .iter()
            .enumerate()
            .map(|(t, &a)| (self.states[t], a, self.states[t + 1]))
    }
}

struct Sampler {
    start: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl Sampler {
    fn new(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<Self> {
        pi.check_shape(mdp)?;
        let start = WeightedIndex::new(mdp.eta().iter().copied())
            .map_err(|e| Error::mdp("eta", e.to_string()))?;
        let rows = pi
            .rows()
            .iter()
            .map(|row| WeightedIndex::new(row.iter().copied()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidPolicy(e.to_string()))?;
        Ok(Sampler { start, rows })
    }

    fn run(&self, mdp: &TabularMdp, n: usize, seed: u64) -> Rollout {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = Vec::with_capacity(n + 1);
        let mut actions = Vec::with_capacity(n);
        let mut s = self.start.sample(&mut rng);
        states.push(s);
        for _ in 0..n {
            let a = self.rows[s].sample(&mut rng);
            s = mdp.next(s, a);
            actions.push(a);
            states.push(s);
        }
        Rollout { states, actions }
    }
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "rollout length must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `s0 ~ eta`, `a_t ~ pi(.|s_t)`, `s_{t+1} = P(s_t, a_t)` for `n` steps.
pub fn rollout(mdp: &TabularMdp, pi: &TabularPolicy, n: usize, seed: u64) -> Result<Rollout> {
    check_length(n)?;
    Ok(Sampler::new(mdp, pi)?.run(mdp, n, seed))
}

/// Time-averaged counts of `(s_t, a_t, s_{t+1})` for `t = 0..n-1`, pooled
/// over one rollout per seed.
pub fn empirical_triplet(
    mdp: &TabularMdp,
    pi: &TabularPolicy,
    n: usize,
    seeds: &[u64],
) -> Result<TripletDistribution> {
    check_length(n)?;
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    let sampler = Sampler::new(mdp, pi)?;
    let counts = seeds
        .par_iter()
        .map(|&seed| {
            let mut counts: BTreeMap<Triple, u64> = BTreeMap::new();
            for t in sampler.run(mdp, n, seed).triples() {
                *counts.entry(t).or_insert(0) += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0) += v;
            }
            acc
        });
    Ok(TripletDistribution::from_counts(&counts))
}

/// Exact law of `(s_0, ..., s_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDistribution {
    pub horizon: usize,
    pub mass: BTreeMap<Vec<usize>, f64>,
}

impl SequenceDistribution {
    /// Law of `s_t`.
    pub fn marginal(&self, t: usize, state_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; state_count];
        for (seq, &p) in &self.mass {
            out[seq[t]] += p;
        }
        out
    }

    /// Maps every state of every sequence through `f`, summing collisions.
    pub fn pushforward(&self, f: &[usize]) -> SequenceDistribution {
        let mut mass = BTreeMap::new();
        for (seq, &p) in &self.mass {
            let image: Vec<usize> = seq.iter().map(|&s| f[s]).collect();
            *mass.entry(image).or_insert(0.0) += p;
        }
        SequenceDistribution {
            horizon: self.horizon,
            mass,
        }
    }

    /// Largest pointwise difference over the union of supports.
    pub fn max_discrepancy(&self, other: &SequenceDistribution) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &p) in &self.mass {
            worst = worst.max((p - other.mass.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, &q) in &other.mass {
            if !self.mass.contains_key(k) {
                worst = worst.max(q.abs());
            }
        }
        worst
    }
}

/// Forward enumeration of every state sequence of length `n + 1` with its
/// probability. Branching comes only from `eta` and `pi`.
pub fn sequence_distribution(
    mdp: &TabularMdp,
    pi: &TabularPolicy,
    n: usize,
    cap: u64,
) -> Result<SequenceDistribution> {
    pi.check_shape(mdp)?;
    if n > MAX_HORIZON {
        return Err(Error::InvalidConfig(format!(
            "horizon {n} exceeds the maximum of {MAX_HORIZON}"
        )));
    }
    let mut mass: BTreeMap<Vec<usize>, f64> =
        mdp.eta_support().map(|s| (vec![s], mdp.eta()[s])).collect();
    for _ in 0..n {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (seq, p) in mass {
            let s = *seq.last().expect("sequences are nonempty");
            for a in pi.support(s) {
                let mut longer = seq.clone();
                longer.push(mdp.next(s, a));
                *next.entry(longer).or_insert(0.0) += p * pi.prob(s, a);
            }
            if next.len() as u64 > cap {
                return Err(Error::CapExceeded {
                    candidates: next.len() as f64,
                    cap,
                });
            }
        }
        mass = next;
    }
    Ok(SequenceDistribution { horizon: n, mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessEquivalence {
    pub equivalent: bool,
    pub max_discrepancy: f64,
}

/// Whether `(f(s_0), ..., f(s_N))` under `pi_x` on `mx` has the same law as
/// `(s_0, ..., s_N)` under `pi_y` on `my`.
pub fn check_process_equivalence(
    mx: &TabularMdp,
    my: &TabularMdp,
    f: &[usize],
    pi_x: &TabularPolicy,
    pi_y: &TabularPolicy,
    n: usize,
    cap: u64,
) -> Result<ProcessEquivalence> {
    if f.len() != mx.state_count() || f.iter().any(|&t| t >= my.state_count()) {
        return Err(Error::DimensionMismatch(
            "f does not map S_x into S_y".into(),
        ));
    }
    let x = sequence_distribution(mx, pi_x, n, cap)?.pushforward(f);
    let y = sequence_distribution(my, pi_y, n, cap)?;
    let max_discrepancy = x.max_discrepancy(&y);
    Ok(ProcessEquivalence {
        equivalent: max_discrepancy <= PROCESS_TOL,
        max_discrepancy,
    })
}
