//! Interestingness of a feature vector for each fact type.
//!
//! Every function sorts or otherwise canonicalizes its input before summing,
//! so permuting the components never changes a result.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats;
use super::FactType;
use crate::graph::FeatureValue;

/// Largest sample handed to the Shapiro-Wilk test.
pub const SHAPIRO_WILK_MAX: usize = 5000;

/// Why a fact type does not apply to a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    TooFewEntries { needed: usize, got: usize },
    NegativeValues,
    ZeroTotal,
    Unbounded,
    NonPositiveMean,
    ConstantVector,
    NoNeighbors,
    NodeLevelOnly,
}

/// Result of evaluating one fact type: interestingness in [0, 1] and the
/// focus as indices into the vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub interestingness: f64,
    pub focus: Vec<usize>,
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn sum_sorted(values: &[f64]) -> f64 {
    sorted_desc(values).iter().sum()
}

/// Index of the largest value; ties go to the smallest key.
pub fn argmax(values: &[f64], keys: &[usize]) -> usize {
    top_k(values, keys, 1)[0]
}

/// Indices of the `k` largest values in descending order; ties go to the
/// smallest key.
pub fn top_k(values: &[f64], keys: &[usize], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(keys[a].cmp(&keys[b])));
    idx.truncate(k);
    idx
}

/// `min(1, 2·x_max / Σx)` for non-negative vectors with a positive total.
pub fn proportion(values: &[f64]) -> Result<f64, SkipReason> {
    if values.len() < 2 {
        return Err(SkipReason::TooFewEntries { needed: 2, got: values.len() });
    }
    if values.iter().any(|&x| x < 0.0) {
        return Err(SkipReason::NegativeValues);
    }
    let sorted = sorted_desc(values);
    let total: f64 = sorted.iter().sum();
    if !(total > 0.0) {
        return Err(SkipReason::ZeroTotal);
    }
    Ok((2.0 * sorted[0] / total).min(1.0))
}

/// Remove the maximum, fit `x_i ≈ a·i^(−β)` to the remaining sorted values
/// (amplitude only, least squares), model the residuals as a Gaussian and
/// return the probability mass below the maximum's deviation from the fit.
pub fn extreme(values: &[f64], beta: f64) -> Result<f64, SkipReason> {
    if values.len() < 4 {
        return Err(SkipReason::TooFewEntries { needed: 4, got: values.len() });
    }
    let sorted = sorted_desc(values);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Ok(0.0);
    }
    let ranks: Vec<f64> = (2..=sorted.len()).map(|i| (i as f64).powf(-beta)).collect();
    let rest = &sorted[1..];
    let amplitude = rest.iter().zip(&ranks).map(|(x, r)| x * r).sum::<f64>() / ranks.iter().map(|r| r * r).sum::<f64>();
    let residuals: Vec<f64> = rest.iter().zip(&ranks).map(|(x, r)| x - amplitude * r).collect();
    let m = residuals.len() as f64;
    let mu = residuals.iter().sum::<f64>() / m;
    let sigma = (residuals.iter().map(|e| (e - mu).powi(2)).sum::<f64>() / m).sqrt();
    let deviation = (amplitude - sorted[0]).abs();
    let scale = sorted[0].abs().max(1.0);
    if sigma <= 1e-12 * scale {
        return Ok(if deviation > mu + 1e-12 * scale { 1.0 } else { 0.0 });
    }
    Ok(stats::normal_cdf((deviation - mu) / sigma).clamp(0.0, 1.0))
}

/// `1 − p` of the chi-squared test against a uniform vector.
pub fn evenness(values: &[f64]) -> Result<f64, SkipReason> {
    if values.len() < 2 {
        return Err(SkipReason::TooFewEntries { needed: 2, got: values.len() });
    }
    let sorted = sorted_desc(values);
    match stats::chi_squared_uniform(&sorted) {
        Some((_, p)) => Ok((1.0 - p).clamp(0.0, 1.0)),
        None => Err(SkipReason::NonPositiveMean),
    }
}

/// `1 − p` of the Shapiro-Wilk normality test. Vectors above the test's
/// size bound are subsampled with a seeded generator.
pub fn distribution(values: &[f64], seed: u64) -> Result<f64, SkipReason> {
    if values.len() < 3 {
        return Err(SkipReason::TooFewEntries { needed: 3, got: values.len() });
    }
    let mut sorted = sorted_desc(values);
    if sorted.len() > SHAPIRO_WILK_MAX {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picks = rand::seq::index::sample(&mut rng, sorted.len(), SHAPIRO_WILK_MAX);
        sorted = picks.into_iter().map(|i| sorted[i]).collect();
    }
    match stats::shapiro_wilk(&sorted) {
        Some((_, p)) => Ok((1.0 - p).clamp(0.0, 1.0)),
        None => Err(SkipReason::ConstantVector),
    }
}

/// Normalized difference between a component and the average of its
/// neighbours, `|x̃ − x| / max(|x̃|, |x|)`; 0 when both are 0.
pub fn outlier_score(x: f64, neighbour_mean: f64) -> f64 {
    let denom = x.abs().max(neighbour_mean.abs());
    if denom == 0.0 {
        0.0
    } else {
        ((neighbour_mean - x).abs() / denom).clamp(0.0, 1.0)
    }
}

/// Outlier scores of every component with at least one neighbour; the
/// focus is the highest-scoring component.
pub fn outlier(values: &[f64], neighbours: &[Vec<usize>], keys: &[usize]) -> Result<Evaluation, SkipReason> {
    if values.len() < 2 {
        return Err(SkipReason::TooFewEntries { needed: 2, got: values.len() });
    }
    let scores: Vec<f64> = values
        .iter()
        .zip(neighbours)
        .map(|(&x, nb)| {
            if nb.is_empty() {
                return f64::NEG_INFINITY;
            }
            let nv: Vec<f64> = nb.iter().map(|&j| values[j]).collect();
            outlier_score(x, sum_sorted(&nv) / nv.len() as f64)
        })
        .collect();
    if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(SkipReason::NoNeighbors);
    }
    let best = argmax(&scores, keys);
    Ok(Evaluation { interestingness: scores[best], focus: vec![best] })
}

/// Evaluates `fact_type` on a feature vector. `keys` order components for
/// tie-breaking and `neighbours` lists adjacent components.
pub fn evaluate(
    fact_type: FactType,
    values: &[FeatureValue],
    keys: &[usize],
    neighbours: &[Vec<usize>],
    beta: f64,
    k: usize,
    seed: u64,
) -> Result<Evaluation, SkipReason> {
    let finite: Vec<f64> = values.iter().map(|v| v.finite()).collect::<Option<_>>().ok_or(SkipReason::Unbounded)?;
    let whole = |i: f64| Evaluation { interestingness: i, focus: vec![] };
    match fact_type {
        FactType::Extreme => Ok(Evaluation { interestingness: extreme(&finite, beta)?, focus: vec![argmax(&finite, keys)] }),
        FactType::Rank => {
            let needed = 4.max(k + 1);
            if finite.len() < needed {
                return Err(SkipReason::TooFewEntries { needed, got: finite.len() });
            }
            Ok(Evaluation { interestingness: extreme(&finite, beta)?, focus: top_k(&finite, keys, k) })
        }
        FactType::Proportion => {
            Ok(Evaluation { interestingness: proportion(&finite)?, focus: vec![argmax(&finite, keys)] })
        }
        FactType::Evenness => evenness(&finite).map(whole),
        FactType::Distribution => distribution(&finite, seed).map(whole),
        FactType::Outlier => outlier(&finite, neighbours, keys),
    }
}

/// Orders feature values descending for ranking; unbounded values first.
pub fn rank_order(values: &[FeatureValue], keys: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| match values[b].rank_cmp(&values[a]) {
        Ordering::Equal => keys[a].cmp(&keys[b]),
        o => o,
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn proportion_examples() {
        assert_abs_diff_eq!(proportion(&[4.0, 3.0, 3.0]).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(proportion(&[6.0, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(proportion(&[1.0, -1.0]), Err(SkipReason::NegativeValues));
        assert_eq!(proportion(&[0.0, 0.0]), Err(SkipReason::ZeroTotal));
    }

    #[test]
    fn evenness_of_constant_vector_is_zero() {
        assert_eq!(evenness(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(evenness(&[4.0, 3.0, 3.0]).unwrap(), 0.09516258196404044, epsilon = 1e-9);
        assert_eq!(evenness(&[0.0, 0.0, 0.0]), Err(SkipReason::NonPositiveMean));
    }

    #[test]
    fn outlier_on_star() {
        // Centre 10, four leaves 1: each leaf's neighbour average is 10.
        let values = [10.0, 1.0, 1.0, 1.0, 1.0];
        let nb = vec![vec![1, 2, 3, 4], vec![0], vec![0], vec![0], vec![0]];
        for leaf in 1..5 {
            assert_abs_diff_eq!(outlier_score(values[leaf], 10.0), 0.9, epsilon = 1e-15);
        }
        let e = outlier(&values, &nb, &[0, 1, 2, 3, 4]).unwrap();
        assert_abs_diff_eq!(e.interestingness, 0.9, epsilon = 1e-15);
        assert_eq!(e.focus, vec![0]);
        assert_eq!(outlier(&[1.0, 2.0], &[vec![], vec![]], &[0, 1]), Err(SkipReason::NoNeighbors));
    }

    #[test]
    fn extreme_detects_dominant_value() {
        assert_eq!(extreme(&[3.0; 6], 0.7).unwrap(), 0.0);
        let strong = extreme(&[100.0, 5.0, 4.0, 3.5, 3.0, 2.0, 1.5], 0.7).unwrap();
        let weak = extreme(&[5.5, 5.0, 4.0, 3.5, 3.0, 2.0, 1.5], 0.7).unwrap();
        assert!(strong > 0.99, "{strong}");
        assert!(weak < strong);
        assert!(matches!(extreme(&[1.0, 2.0, 3.0], 0.7), Err(SkipReason::TooFewEntries { .. })));
    }

    #[test]
    fn extreme_matches_hand_fit() {
        // Sorted [8, 4, 2, 1], β = 1: ranks 1/2, 1/3, 1/4.
        let r = [0.5, 1.0 / 3.0, 0.25];
        let x = [4.0, 2.0, 1.0];
        let a = (0..3).map(|i| x[i] * r[i]).sum::<f64>() / r.iter().map(|v| v * v).sum::<f64>();
        let e: Vec<f64> = (0..3).map(|i| x[i] - a * r[i]).collect();
        let mu = e.iter().sum::<f64>() / 3.0;
        let sd = (e.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 3.0).sqrt();
        let expected = stats::normal_cdf(((a - 8.0).abs() - mu) / sd);
        assert_abs_diff_eq!(extreme(&[1.0, 8.0, 2.0, 4.0], 1.0).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn rank_focus_is_top_three_in_order() {
        let v: Vec<FeatureValue> = [1.0, 9.0, 3.0, 7.0, 5.0].into_iter().map(FeatureValue::Finite).collect();
        let e = evaluate(FactType::Rank, &v, &[0, 1, 2, 3, 4], &[], 0.7, 3, 0).unwrap();
        assert_eq!(e.focus, vec![1, 3, 4]);
    }

    #[test]
    fn unbounded_vectors_are_skipped() {
        let v = [FeatureValue::Finite(1.0), FeatureValue::Unbounded, FeatureValue::Finite(2.0)];
        assert_eq!(evaluate(FactType::Proportion, &v, &[0, 1, 2], &[], 0.7, 3, 0), Err(SkipReason::Unbounded));
        assert_eq!(rank_order(&v, &[0, 1, 2]), vec![1, 2, 0]);
    }

    #[test]
    fn ties_go_to_smallest_key() {
        assert_eq!(argmax(&[5.0, 5.0, 1.0], &[7, 3, 0]), 1);
    }

    proptest! {
        #[test]
        fn proportion_is_scale_invariant(v in prop::collection::vec(0.0f64..100.0, 2..30), c in 0.01f64..1000.0) {
            prop_assume!(v.iter().sum::<f64>() > 0.0);
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            prop_assert!((proportion(&v).unwrap() - proportion(&scaled).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn scores_are_permutation_invariant(v in prop::collection::vec(0.0f64..50.0, 4..20), seed in 0u64..1000) {
            let n = v.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let pv: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            let keys: Vec<usize> = (0..n).collect();
            let pkeys: Vec<usize> = perm.clone();
            for t in FactType::ALL {
                if t == FactType::Outlier {
                    continue;
                }
                let a = evaluate(t, &v.iter().copied().map(FeatureValue::Finite).collect::<Vec<_>>(), &keys, &[], 0.7, 3, 0);
                let b = evaluate(t, &pv.iter().copied().map(FeatureValue::Finite).collect::<Vec<_>>(), &pkeys, &[], 0.7, 3, 0);
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        prop_assert_eq!(a.interestingness, b.interestingness);
                        let fa: Vec<usize> = a.focus.clone();
                        let fb: Vec<usize> = b.focus.iter().map(|&i| perm[i]).collect();
                        prop_assert_eq!(fa, fb);
                    }
                    (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
                }
            }
        }

        #[test]
        fn interestingness_in_unit_interval(v in prop::collection::vec(0.0f64..1e6, 4..40)) {
            for r in [extreme(&v, 0.7), proportion(&v), evenness(&v), distribution(&v, 1)] {
                if let Ok(x) = r {
                    prop_assert!((0.0..=1.0).contains(&x));
                }
            }
        }
    }
}
