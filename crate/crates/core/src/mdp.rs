//! Finite MDPs with deterministic dynamics, and stochastic tabular policies.

use crate::error::{Error, Result};

/// Tolerance used when checking that probability vectors sum to one.
pub const PROB_TOL: f64 = 1e-12;

/// Label given to the dummy state and the dummy action by
/// [`TabularMdp::augment_with_dummies`].
pub const DUMMY_LABEL: &str = "dummy";

/// A finite MDP `(S, A, P, eta, R)` with deterministic transitions.
///
/// Tables are indexed `[state][action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    state_labels: Vec<String>,
    action_labels: Vec<String>,
    transition: Vec<Vec<usize>>,
    reward: Vec<Vec<f64>>,
    eta: Vec<f64>,
    gamma: f64,
    dummy_state: Option<usize>,
    dummy_action: Option<usize>,
}

impl TabularMdp {
    /// Builds an MDP with default labels `s0, s1, ...` and `a0, a1, ...`.
    pub fn new(
        transition: Vec<Vec<usize>>,
        reward: Vec<Vec<f64>>,
        eta: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let n = transition.len();
        let m = transition.first().map_or(0, Vec::len);
        let state_labels = (0..n).map(|s| format!("s{s}")).collect();
        let action_labels = (0..m).map(|a| format!("a{a}")).collect();
        Self::with_labels(state_labels, action_labels, transition, reward, eta, gamma)
    }

    pub fn with_labels(
        state_labels: Vec<String>,
        action_labels: Vec<String>,
        transition: Vec<Vec<usize>>,
        reward: Vec<Vec<f64>>,
        eta: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let mdp = TabularMdp {
            state_labels,
            action_labels,
            transition,
            reward,
            eta,
            gamma,
            dummy_state: None,
            dummy_action: None,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Marks an existing state and action as the dummies.
    pub fn with_dummies(mut self, state: Option<usize>, action: Option<usize>) -> Result<Self> {
        self.dummy_state = state;
        self.dummy_action = action;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.transition.len();
        if n == 0 {
            return Err(Error::mdp("transition", "at least one state is required"));
        }
        let m = self.transition[0].len();
        if m == 0 {
            return Err(Error::mdp("transition", "at least one action is required"));
        }
        if self.state_labels.len() != n {
            return Err(Error::mdp(
                "states",
                format!("{} labels for {n} states", self.state_labels.len()),
            ));
        }
        if self.action_labels.len() != m {
            return Err(Error::mdp(
                "actions",
                format!("{} labels for {m} actions", self.action_labels.len()),
            ));
        }
        for (s, row) in self.transition.iter().enumerate() {
            if row.len() != m {
                return Err(Error::mdp(
                    "transition",
                    format!("row {s} has {} entries, expected {m}", row.len()),
                ));
            }
            if let Some(a) = row.iter().position(|&t| t >= n) {
                return Err(Error::mdp(
                    "transition",
                    format!("entry [{s}][{a}] = {} is not a state index", row[a]),
                ));
            }
        }
        if self.reward.len() != n {
            return Err(Error::mdp(
                "reward",
                format!("{} rows, expected {n}", self.reward.len()),
            ));
        }
        for (s, row) in self.reward.iter().enumerate() {
            if row.len() != m {
                return Err(Error::mdp(
                    "reward",
                    format!("row {s} has {} entries, expected {m}", row.len()),
                ));
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::mdp(
                    "reward",
                    format!("row {s} has a non-finite entry"),
                ));
            }
        }
        if self.eta.len() != n {
            return Err(Error::mdp(
                "eta",
                format!("{} entries, expected {n}", self.eta.len()),
            ));
        }
        if self.eta.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::mdp("eta", "entries must be finite and nonnegative"));
        }
        let total: f64 = self.eta.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::mdp(
                "eta",
                format!("entries sum to {total}, expected 1"),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::mdp(
                "gamma",
                format!("{} is outside the open interval (0, 1)", self.gamma),
            ));
        }
        if let Some(d) = self.dummy_state {
            if d >= n {
                return Err(Error::mdp(
                    "dummy_state",
                    format!("{d} is not a state index"),
                ));
            }
            if self.eta[d] != 0.0 {
                return Err(Error::mdp(
                    "dummy_state",
                    "the dummy state must have zero eta mass",
                ));
            }
        }
        if let Some(d) = self.dummy_action {
            if d >= m {
                return Err(Error::mdp(
                    "dummy_action",
                    format!("{d} is not an action index"),
                ));
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.transition.len()
    }

    pub fn action_count(&self) -> usize {
        self.transition[0].len()
    }

    #[inline]
    pub fn next(&self, s: usize, a: usize) -> usize {
        self.transition[s][a]
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    pub fn transitions(&self) -> &[Vec<usize>] {
        &self.transition
    }

    pub fn rewards(&self) -> &[Vec<f64>] {
        &self.reward
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn action_labels(&self) -> &[String] {
        &self.action_labels
    }

    pub fn dummy_state(&self) -> Option<usize> {
        self.dummy_state
    }

    pub fn dummy_action(&self) -> Option<usize> {
        self.dummy_action
    }

    /// States with positive initial mass.
    pub fn eta_support(&self) -> impl Iterator<Item = usize> + '_ {
        self.eta
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, _)| s)
    }

    /// Same dynamics and initial distribution with a different reward table.
    pub fn with_reward(&self, reward: Vec<Vec<f64>>) -> Result<Self> {
        let mut out = self.clone();
        out.reward = reward;
        out.validate()?;
        Ok(out)
    }

    /// Same MDP with another discount factor.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut out = self.clone();
        out.gamma = gamma;
        out.validate()?;
        Ok(out)
    }

    /// True when both MDPs share states, actions, dynamics, eta and gamma.
    pub fn same_structure(&self, other: &TabularMdp) -> bool {
        self.transition == other.transition && self.eta == other.eta && self.gamma == other.gamma
    }

    /// Appends a dummy state `s^d` and a dummy action `a^d`.
    ///
    /// `s^d` self-loops under every action and carries no initial mass, `a^d`
    /// leads from every state to `s^d`. Every pair touching a dummy gets reward
    /// `min_reward - 1`, which keeps the dummies strictly suboptimal without
    /// changing any optimal action of the original states.
    pub fn augment_with_dummies(&self) -> Result<Self> {
        if self.dummy_state.is_some() || self.dummy_action.is_some() {
            return Err(Error::AlreadyAugmented);
        }
        let n = self.state_count();
        let m = self.action_count();
        let low = self
            .reward
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
            - 1.0;

        let mut transition = self.transition.clone();
        let mut reward = self.reward.clone();
        for (trow, rrow) in transition.iter_mut().zip(reward.iter_mut()) {
            trow.push(n);
            rrow.push(low);
        }
        transition.push(vec![n; m + 1]);
        reward.push(vec![low; m + 1]);

        let mut eta = self.eta.clone();
        eta.push(0.0);
        let mut state_labels = self.state_labels.clone();
        state_labels.push(DUMMY_LABEL.to_string());
        let mut action_labels = self.action_labels.clone();
        action_labels.push(DUMMY_LABEL.to_string());

        TabularMdp::with_labels(
            state_labels,
            action_labels,
            transition,
            reward,
            eta,
            self.gamma,
        )?
        .with_dummies(Some(n), Some(m))
    }

    /// True when `s` is the dummy state.
    pub fn is_dummy_state(&self, s: usize) -> bool {
        self.dummy_state == Some(s)
    }

    /// True when `a` is the dummy action.
    pub fn is_dummy_action(&self, a: usize) -> bool {
        self.dummy_action == Some(a)
    }
}

/// Stochastic state-to-action table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    probs: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPolicy("policy has no states".into()));
        }
        let m = probs[0].len();
        for (s, row) in probs.iter().enumerate() {
            if row.len() != m || m == 0 {
                return Err(Error::InvalidPolicy(format!(
                    "row {s} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidPolicy(format!(
                    "row {s} has a negative entry"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy(format!("row {s} sums to {total}")));
            }
        }
        Ok(TabularPolicy { probs })
    }

    /// Rows built by summing entries of an already valid policy.
    pub(crate) fn from_rows_unchecked(probs: Vec<Vec<f64>>) -> Self {
        TabularPolicy { probs }
    }

    /// Deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], action_count: usize) -> Result<Self> {
        let probs = actions
            .iter()
            .map(|&a| {
                let mut row = vec![0.0; action_count];
                if a < action_count {
                    row[a] = 1.0;
                }
                row
            })
            .collect();
        Self::new(probs)
    }

    /// Uniform over all actions in every state.
    pub fn uniform(state_count: usize, action_count: usize) -> Self {
        let p = 1.0 / action_count as f64;
        TabularPolicy {
            probs: vec![vec![p; action_count]; state_count],
        }
    }

    pub fn state_count(&self) -> usize {
        self.probs.len()
    }

    pub fn action_count(&self) -> usize {
        self.probs[0].len()
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Actions with positive probability in state `s`.
    pub fn support(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.probs[s]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, _)| a)
    }

    pub(crate) fn check_shape(&self, mdp: &TabularMdp) -> Result<()> {
        if self.state_count() != mdp.state_count() || self.action_count() != mdp.action_count() {
            return Err(Error::DimensionMismatch(format!(
                "policy is {}x{}, mdp is {}x{}",
                self.state_count(),
                self.action_count(),
                mdp.state_count(),
                mdp.action_count()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> TabularMdp {
        TabularMdp::new(vec![vec![0]], vec![vec![1.0]], vec![1.0], 0.5).unwrap()
    }

    #[test]
    fn rejects_bad_eta() {
        let err = TabularMdp::new(
            vec![vec![0], vec![1]],
            vec![vec![0.0]; 2],
            vec![0.5, 0.4],
            0.9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMdp { ref field, .. } if field == "eta"));
    }

    #[test]
    fn rejects_bad_transition_and_gamma() {
        let err = TabularMdp::new(vec![vec![3]], vec![vec![0.0]], vec![1.0], 0.9).unwrap_err();
        assert!(matches!(err, Error::InvalidMdp { ref field, .. } if field == "transition"));
        let err = TabularMdp::new(vec![vec![0]], vec![vec![0.0]], vec![1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidMdp { ref field, .. } if field == "gamma"));
    }

    #[test]
    fn augmentation_shape_and_guard() {
        let aug = single().augment_with_dummies().unwrap();
        assert_eq!(aug.state_count(), 2);
        assert_eq!(aug.action_count(), 2);
        assert_eq!(aug.dummy_state(), Some(1));
        assert_eq!(aug.dummy_action(), Some(1));
        assert_eq!(aug.next(0, 1), 1);
        assert_eq!(aug.next(1, 0), 1);
        assert_eq!(aug.reward(0, 1), 0.0);
        assert_eq!(aug.eta(), &[1.0, 0.0]);
        assert_eq!(
            aug.augment_with_dummies().unwrap_err(),
            Error::AlreadyAugmented
        );
    }

    #[test]
    fn policy_rows_must_sum_to_one() {
        assert!(TabularPolicy::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(TabularPolicy::new(vec![vec![-0.5, 1.5]]).is_err());
        let p = TabularPolicy::deterministic(&[1, 0], 2).unwrap();
        assert_eq!(p.support(0).collect::<Vec<_>>(), vec![1]);
    }
}
