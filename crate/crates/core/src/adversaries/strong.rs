//! Strong adversaries: procedures that may query the oracle repeatedly.

use std::collections::BTreeSet;

use super::WeakAdversary;
use crate::error::{Error, Result};
use crate::game::{draw_from_mass, Bit, DataPoint, Dataset, Oracle, SensitivityDistribution, Split};
use crate::seed;

/// Oracle access for one play of the game. Counts queries.
pub struct OracleHandle<'a> {
    mass: Vec<(usize, f64)>,
    dataset: &'a Dataset,
    rng: seed::Rng,
    queries: usize,
}

impl<'a> OracleHandle<'a> {
    pub fn new(oracle: &Oracle<'_>, dataset: &'a Dataset, seed_value: u64) -> Result<Self> {
        Ok(OracleHandle {
            mass: oracle.mass()?,
            dataset,
            rng: seed::rng(seed_value),
            queries: 0,
        })
    }

    pub fn query(&mut self) -> &'a DataPoint {
        self.queries += 1;
        let id = draw_from_mass(&self.mass, &mut self.rng);
        self.dataset.point(id)
    }

    pub fn queries_used(&self) -> usize {
        self.queries
    }
}

/// An adversary that plays the full game against a model `M`.
pub trait StrongAdversary<M>: Send + Sync {
    fn name(&self) -> &str;

    fn decide(&self, model: &M, oracle: &mut OracleHandle<'_>, max_queries: usize) -> Result<Bit>;

    /// `Pr[decide = 1]` in closed form, when the decision region is known.
    fn analytic_accept_rate(
        &self,
        _model: &M,
        _split: &Split,
        _bit: Bit,
        _sensitivity: &SensitivityDistribution,
    ) -> Option<Result<f64>> {
        None
    }

    fn fit_meta(&self) -> String {
        String::new()
    }
}

/// Default query budget `10 * |F u T|`.
pub fn default_max_queries(split: &Split) -> usize {
    10 * (split.forget().len() + split.test().len())
}

/// Look-up table adversary for a pair of splits: answers 1 on `T1 n T2`, 0 on
/// `F1 n F2`, and redraws elsewhere.
#[derive(Debug, Clone)]
pub struct LookupAdversary {
    answers_one: BTreeSet<usize>,
    answers_zero: BTreeSet<usize>,
}

pub fn lookup_adversary(s1: &Split, s2: &Split) -> Result<LookupAdversary> {
    let inter = |a: &[usize], b: &[usize]| -> BTreeSet<usize> {
        let b: BTreeSet<usize> = b.iter().copied().collect();
        a.iter().copied().filter(|x| b.contains(x)).collect()
    };
    let answers_one = inter(s1.test(), s2.test());
    let answers_zero = inter(s1.forget(), s2.forget());
    if answers_one.is_empty() || answers_zero.is_empty() {
        return Err(Error::NonOverlappingSplits(format!(
            "|F1 n F2| = {}, |T1 n T2| = {}",
            answers_zero.len(),
            answers_one.len()
        )));
    }
    Ok(LookupAdversary {
        answers_one,
        answers_zero,
    })
}

impl LookupAdversary {
    pub fn lookup(&self, id: usize) -> Option<Bit> {
        if self.answers_one.contains(&id) {
            Some(Bit::One)
        } else if self.answers_zero.contains(&id) {
            Some(Bit::Zero)
        } else {
            None
        }
    }
}

impl<M> StrongAdversary<M> for LookupAdversary {
    fn name(&self) -> &str {
        "lookup"
    }

    fn decide(&self, _model: &M, oracle: &mut OracleHandle<'_>, max_queries: usize) -> Result<Bit> {
        for _ in 0..max_queries {
            if let Some(b) = self.lookup(oracle.query().id) {
                return Ok(b);
            }
        }
        Err(Error::QueryBudgetExceeded(max_queries))
    }

    /// Conditional mass of `T1 n T2` within the defined region.
    fn analytic_accept_rate(
        &self,
        _model: &M,
        split: &Split,
        bit: Bit,
        sensitivity: &SensitivityDistribution,
    ) -> Option<Result<f64>> {
        let mass = match Oracle::new(split, bit, sensitivity).mass() {
            Ok(m) => m,
            Err(e) => return Some(Err(e)),
        };
        let (mut one, mut defined) = (0.0, 0.0);
        for (id, p) in mass {
            match self.lookup(id) {
                Some(Bit::One) => {
                    one += p;
                    defined += p;
                }
                Some(Bit::Zero) => defined += p,
                None => {}
            }
        }
        if defined <= 0.0 {
            return Some(Err(Error::Precondition(
                "oracle never lands on a defined look-up entry".into(),
            )));
        }
        Some(Ok(one / defined))
    }

    fn fit_meta(&self) -> String {
        format!(
            "look-up table with {} one-entries and {} zero-entries",
            self.answers_one.len(),
            self.answers_zero.len()
        )
    }
}

/// A weak adversary played with exactly one oracle query.
#[derive(Debug, Clone)]
pub struct WeakAsStrong {
    weak: WeakAdversary,
}

pub fn weak_to_strong(weak: WeakAdversary) -> WeakAsStrong {
    WeakAsStrong { weak }
}

impl<M> StrongAdversary<M> for WeakAsStrong {
    fn name(&self) -> &str {
        self.weak.name()
    }

    fn decide(&self, _model: &M, oracle: &mut OracleHandle<'_>, max_queries: usize) -> Result<Bit> {
        if max_queries == 0 {
            return Err(Error::QueryBudgetExceeded(0));
        }
        Ok(Bit::from_bool(self.weak.classify(oracle.query())))
    }

    fn fit_meta(&self) -> String {
        self.weak.fit_meta().to_string()
    }
}
