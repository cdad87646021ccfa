use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A transition triple `(s, a, s')`.
pub type Triple = (usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripletKind {
    Exact,
    Empirical { sample_count: u64 },
}

/// Probability mass over transition triples.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletDistribution {
    mass: BTreeMap<Triple, f64>,
    kind: TripletKind,
}

impl TripletDistribution {
    pub fn exact(mass: BTreeMap<Triple, f64>) -> Self {
        TripletDistribution {
            mass,
            kind: TripletKind::Exact,
        }
    }

    /// Normalizes integer counts into an empirical distribution.
    pub fn from_counts(counts: &BTreeMap<Triple, u64>) -> Self {
        let total: u64 = counts.values().sum();
        let mass = counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / total as f64))
            .collect();
        TripletDistribution {
            mass,
            kind: TripletKind::Empirical {
                sample_count: total,
            },
        }
    }

    pub fn kind(&self) -> TripletKind {
        self.kind
    }

    pub fn get(&self, t: Triple) -> f64 {
        self.mass.get(&t).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triple, f64)> + '_ {
        self.mass.iter().map(|(&k, &v)| (k, v))
    }

    /// Triples with strictly positive mass.
    pub fn support(&self) -> impl Iterator<Item = Triple> + '_ {
        self.mass.iter().filter(|(_, &v)| v > 0.0).map(|(&k, _)| k)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Marginal mass of each source state.
    pub fn state_marginal(&self, state_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; state_count];
        for (&(s, _, _), &p) in &self.mass {
            out[s] += p;
        }
        out
    }

    /// Pushes the distribution through `map`, summing masses that collide.
    pub fn pushforward(&self, mut map: impl FnMut(Triple) -> Triple) -> Self {
        let mut mass = BTreeMap::new();
        for (&k, &v) in &self.mass {
            *mass.entry(map(k)).or_insert(0.0) += v;
        }
        TripletDistribution {
            mass,
            kind: self.kind,
        }
    }

    /// Half the L1 distance between the two mass functions.
    pub fn total_variation(&self, other: &TripletDistribution) -> f64 {
        let mut sum = 0.0;
        for (k, &p) in &self.mass {
            sum += (p - other.get(*k)).abs();
        }
        for (k, &q) in &other.mass {
            if !self.mass.contains_key(k) {
                sum += q.abs();
            }
        }
        0.5 * sum
    }
}
