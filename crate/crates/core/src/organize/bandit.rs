use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-arm statistics of the UCB search over topic skeletons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    pub expectation: Vec<f64>,
    pub counts: Vec<usize>,
    pub values: Vec<f64>,
    pub budget: usize,
    pub seed: u64,
}

impl BanditState {
    fn new(arms: usize, budget: usize, seed: u64) -> Self {
        Self { expectation: vec![0.0; arms], counts: vec![0; arms], values: vec![0.0; arms], budget, seed }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn record(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        let n = self.counts[arm] as f64;
        self.expectation[arm] += (reward - self.expectation[arm]) / n;
    }

    fn refresh(&mut self) {
        let ln_total = (self.total() as f64).ln();
        for i in 0..self.values.len() {
            self.values[i] = self.expectation[i] + (ln_total / self.counts[i] as f64).sqrt();
        }
    }
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Upper-confidence-bound selection among `arms` arms. Each arm is pulled
/// once, then the arm with the largest value is pulled until `budget` pulls
/// are spent (the budget is raised to the arm count when smaller). Returns
/// the arm with the best mean reward; ties go to the lowest index.
pub fn select_arm<F>(arms: usize, budget: usize, seed: u64, mut pull: F) -> Result<(usize, BanditState)>
where
    F: FnMut(usize, &mut ChaCha8Rng) -> f64,
{
    if arms == 0 {
        return Err(Error::NoSkeletons);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = BanditState::new(arms, budget.max(arms), seed);
    for arm in 0..arms {
        let r = pull(arm, &mut rng);
        state.record(arm, r);
    }
    while state.total() < state.budget {
        state.refresh();
        let arm = first_argmax(&state.values);
        let r = pull(arm, &mut rng);
        state.record(arm, r);
    }
    state.refresh();
    Ok((first_argmax(&state.expectation), state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_arms() {
        let rewards = [0.2, 0.5, 0.8];
        let (best, st) = select_arm(3, 60, 1, |a, _| rewards[a]).unwrap();
        assert_eq!(best, 2);
        assert_eq!(st.total(), 60);
        assert!(st.counts.iter().all(|&c| c >= 1));
        assert!(st.counts[2] * 2 > 60, "{:?}", st.counts);
        let ln_total = 60f64.ln();
        for i in 0..3 {
            let expected = st.expectation[i] + (ln_total / st.counts[i] as f64).sqrt();
            assert!((st.values[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn single_arm_and_ties() {
        let mut pulls = 0;
        let (best, st) = select_arm(1, 1, 0, |_, _| {
            pulls += 1;
            0.3
        })
        .unwrap();
        assert_eq!((best, pulls, st.total()), (0, 1, 1));
        assert_eq!(select_arm(2, 10, 0, |_, _| 0.5).unwrap().0, 0);
        assert!(select_arm(0, 10, 0, |_, _| 0.0).is_err());
    }

    #[test]
    fn budget_raised_to_arm_count() {
        let (_, st) = select_arm(4, 2, 0, |a, _| a as f64).unwrap();
        assert_eq!(st.total(), 4);
    }
}
