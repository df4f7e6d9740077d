//! Closed-form bounds and the MIA baseline score.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adversaries::Attack;
use crate::error::{Error, Result};
use crate::game::{Dataset, Split};

/// `(epsilon, delta)` of a certified-removal guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || epsilon.is_nan() {
            return Err(Error::invalid("epsilon", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid("delta", "must lie in [0, 1)"));
        }
        Ok(BoundParams { epsilon, delta })
    }

    fn check(&self) -> Result<()> {
        Self::new(self.epsilon, self.delta).map(|_| ())
    }
}

/// Largest advantage any adversary can reach against an `(epsilon, delta)`
/// certified-removal method: `min(1, 2 (1 - (2 - 2 delta) / (e^epsilon + 1)))`.
pub fn certified_bound(params: BoundParams) -> Result<f64> {
    params.check()?;
    let raw = 2.0 * (1.0 - (2.0 - 2.0 * params.delta) / (params.epsilon.exp() + 1.0));
    Ok(raw.min(1.0))
}

/// `(4 - 4 delta) / (e^epsilon + 1) - 1`, not clamped.
pub fn quality_lower_bound(params: BoundParams) -> Result<f64> {
    params.check()?;
    Ok((4.0 - 4.0 * params.delta) / (params.epsilon.exp() + 1.0) - 1.0)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Sort-based, `O((p + q) log(p + q))`.
pub fn rank_auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Precondition(
            "AUC needs at least one positive and one negative".into(),
        ));
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Mann-Whitney U with midranks for tied groups
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        rank_sum += midrank * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }
    let p = positives.len() as f64;
    let q = negatives.len() as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// `1 - AUC` of the attack's scores with forget points as positives and test
/// points as negatives, averaged over `models`.
pub fn mia_auc_score<M>(attack: &dyn Attack<M>, split: &Split, models: &[Arc<M>], dataset: &Dataset) -> Result<f64> {
    if models.is_empty() {
        return Err(Error::Precondition("need at least one model".into()));
    }
    let mut total = 0.0;
    for m in models {
        let weak = attack.against(m)?;
        let pos: Vec<f64> = split.forget().iter().map(|&i| weak.score(dataset.point(i))).collect();
        let neg: Vec<f64> = split.test().iter().map(|&i| weak.score(dataset.point(i))).collect();
        total += rank_auc(&pos, &neg)?;
    }
    Ok(1.0 - total / models.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn naive_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut wins = 0.0;
        for &p in pos {
            for &n in neg {
                if p > n {
                    wins += 1.0;
                } else if p == n {
                    wins += 0.5;
                }
            }
        }
        wins / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn auc_matches_pair_counting() {
        let mut rng = crate::seed::rng(21);
        for _ in 0..500 {
            let p: Vec<f64> = (0..rng.random_range(1..20))
                .map(|_| rng.random_range(0..8) as f64 / 4.0)
                .collect();
            let n: Vec<f64> = (0..rng.random_range(1..20)).map(|_| rng.random::<f64>()).collect();
            assert!((rank_auc(&p, &n).unwrap() - naive_auc(&p, &n)).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_extremes() {
        assert_eq!(rank_auc(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(rank_auc(&[0.5, 0.5], &[0.5]).unwrap(), 0.5);
        assert!(rank_auc(&[], &[0.5]).is_err());
    }

    #[test]
    fn bound_at_perfect_removal() {
        let p = BoundParams::new(0.0, 0.0).unwrap();
        assert_eq!(certified_bound(p).unwrap(), 0.0);
        assert_eq!(quality_lower_bound(p).unwrap(), 1.0);
        assert_eq!(
            certified_bound(BoundParams::new(f64::INFINITY, 0.0).unwrap()).unwrap(),
            1.0
        );
        assert_eq!(certified_bound(BoundParams::new(50.0, 0.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn bound_is_monotone() {
        let eps: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let deltas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.01).collect();
        for &d in &deltas {
            for w in eps.windows(2) {
                let a = certified_bound(BoundParams::new(w[0], d).unwrap()).unwrap();
                let b = certified_bound(BoundParams::new(w[1], d).unwrap()).unwrap();
                assert!(b >= a);
            }
        }
        for &e in &eps {
            for w in deltas.windows(2) {
                let a = certified_bound(BoundParams::new(e, w[0]).unwrap()).unwrap();
                let b = certified_bound(BoundParams::new(e, w[1]).unwrap()).unwrap();
                assert!(b >= a);
            }
        }
    }

    #[test]
    fn bound_rejects_bad_params() {
        assert!(BoundParams::new(-0.1, 0.0).is_err());
        assert!(BoundParams::new(1.0, 1.0).is_err());
        assert!(certified_bound(BoundParams {
            epsilon: 1.0,
            delta: -0.5
        })
        .is_err());
    }
}
