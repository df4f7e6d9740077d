//! Advantage estimation.
//!
//! Per-split values are `Pr[A = 1 | b = 0] - Pr[A = 1 | b = 1]`. The exact
//! estimator takes `|mean|` over the whole split space; the SWAP estimator
//! averages `|Adv_s + Adv_swap(s)| / 2` over sampled pairs; the Monte-Carlo
//! estimator takes `|mean|` over sampled splits. Note that `|mean|` is biased
//! upward when the true mean is near zero, and that the SWAP estimator takes
//! the absolute value per pair, so in general it is at least the `|mean|` of
//! the same values.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversaries::{Attack, OracleHandle, StrongAdversary, WeakAdversary};
use crate::error::{Error, Result};
use crate::game::{
    enumerate_splits, sample_split, split_space_size, Alpha, Bit, Dataset, Oracle, SensitivityDistribution, Split,
};
use crate::seed;
use crate::unlearners::{RemovalLedger, UnlearnerKind, UnlearnerSpec};

pub mod challenger;
pub mod metrics;

pub use challenger::{Challenger, ModelBatch, UnlearningChallenger};
pub use metrics::{certified_bound, mia_auc_score, quality_lower_bound, rank_auc, BoundParams};

pub const DEFAULT_ENUMERATION_CAP: usize = 100_000;
pub const DEFAULT_PLAYS: usize = 10_000;
pub const REPORT_VERSION: u32 = 1;

/// Everything about the game that is fixed across splits.
#[derive(Debug, Clone)]
pub struct GameContext {
    pub dataset: Arc<Dataset>,
    pub alpha: Alpha,
    pub sensitivity: Arc<SensitivityDistribution>,
    pub master_seed: u64,
    /// Independent plays per bit for strong adversaries without a closed form.
    pub plays: usize,
    pub enumeration_cap: usize,
    /// Overrides the per-split default of `10 |F u T|`.
    pub max_queries: Option<usize>,
}

impl GameContext {
    pub fn new(dataset: Arc<Dataset>, alpha: Alpha, master_seed: u64) -> Self {
        let n = dataset.len();
        GameContext {
            dataset,
            alpha,
            sensitivity: Arc::new(SensitivityDistribution::uniform(n)),
            master_seed,
            plays: DEFAULT_PLAYS,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            max_queries: None,
        }
    }

    pub fn with_sensitivity(mut self, sensitivity: SensitivityDistribution) -> Result<Self> {
        if sensitivity.len() != self.dataset.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.len(),
                got: sensitivity.len(),
            });
        }
        self.sensitivity = Arc::new(sensitivity);
        Ok(self)
    }
}

/// A roster member.
pub enum Adversary<M> {
    Weak(Arc<dyn Attack<M>>),
    Strong(Arc<dyn StrongAdversary<M>>),
}

impl<M> Clone for Adversary<M> {
    fn clone(&self) -> Self {
        match self {
            Adversary::Weak(a) => Adversary::Weak(Arc::clone(a)),
            Adversary::Strong(a) => Adversary::Strong(Arc::clone(a)),
        }
    }
}

impl<M> Adversary<M> {
    pub fn weak(attack: impl Attack<M> + 'static) -> Self {
        Adversary::Weak(Arc::new(attack))
    }

    pub fn strong(adv: impl StrongAdversary<M> + 'static) -> Self {
        Adversary::Strong(Arc::new(adv))
    }

    pub fn name(&self) -> String {
        match self {
            Adversary::Weak(a) => a.name().to_string(),
            Adversary::Strong(a) => a.name().to_string(),
        }
    }

    pub fn fit_meta(&self) -> String {
        match self {
            Adversary::Weak(a) => a.fit_meta(),
            Adversary::Strong(a) => a.fit_meta(),
        }
    }
}

/// Signed advantage on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAdvantage {
    pub split: Split,
    pub signed_value: f64,
    pub accept_rate_b0: f64,
    pub accept_rate_b1: f64,
    pub num_models: usize,
    /// Plays per bit when the rates were simulated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_plays: Option<usize>,
}

/// `Pr[f(x) = 1]` for `x ~ O_s(b)`, exact over `x` and averaged over the
/// adversaries, one fitted per model.
pub fn weak_accept_rate(
    fitted: &[WeakAdversary],
    split: &Split,
    bit: Bit,
    sensitivity: &SensitivityDistribution,
    dataset: &Dataset,
) -> Result<f64> {
    if fitted.is_empty() {
        return Err(Error::Precondition("need at least one model".into()));
    }
    let mass = Oracle::new(split, bit, sensitivity).mass()?;
    let total: f64 = fitted
        .iter()
        .map(|f| {
            mass.iter()
                .filter(|(id, _)| f.classify(dataset.point(*id)))
                .map(|(_, p)| p)
                .sum::<f64>()
        })
        .sum();
    Ok(total / fitted.len() as f64)
}

fn strong_accept_rate<M>(
    adv: &dyn StrongAdversary<M>,
    models: &[Arc<M>],
    split: &Split,
    bit: Bit,
    ctx: &GameContext,
) -> Result<(f64, Option<usize>)> {
    let analytic: Option<Result<Vec<f64>>> = models
        .iter()
        .map(|m| adv.analytic_accept_rate(m, split, bit, &ctx.sensitivity))
        .collect();
    if let Some(rates) = analytic {
        let rates = rates?;
        return Ok((rates.iter().sum::<f64>() / rates.len() as f64, None));
    }
    if ctx.plays == 0 {
        return Err(Error::invalid("plays", "must be positive for simulated adversaries"));
    }
    let oracle = Oracle::new(split, bit, &ctx.sensitivity);
    let max_queries = ctx
        .max_queries
        .unwrap_or_else(|| crate::adversaries::strong::default_max_queries(split));
    let tag = format!("play-b{}", bit.as_u8());
    let mut ones = 0usize;
    for p in 0..ctx.plays {
        // a fresh model sample per play, fixed for the play's duration
        let model = &models[p % models.len()];
        let mut handle = OracleHandle::new(
            &oracle,
            &ctx.dataset,
            seed::derive_seed(ctx.master_seed, &tag, split.digest(), p as u64),
        )?;
        if adv.decide(model, &mut handle, max_queries)? == Bit::One {
            ones += 1;
        }
    }
    Ok((ones as f64 / ctx.plays as f64, Some(ctx.plays)))
}

/// Signed values for every roster member on one split, sharing the models.
fn evaluate_split<M>(
    roster: &[Adversary<M>],
    batch: &ModelBatch<M>,
    split: &Split,
    ctx: &GameContext,
) -> Result<Vec<SplitAdvantage>> {
    if batch.models.is_empty() {
        return Err(Error::Precondition("challenger returned no models".into()));
    }
    roster
        .iter()
        .map(|adv| {
            let (r0, r1, plays) = match adv {
                Adversary::Weak(attack) => {
                    let fitted = batch
                        .models
                        .iter()
                        .map(|m| attack.against(m))
                        .collect::<Result<Vec<_>>>()?;
                    let r0 = weak_accept_rate(&fitted, split, Bit::Zero, &ctx.sensitivity, &ctx.dataset)?;
                    let r1 = weak_accept_rate(&fitted, split, Bit::One, &ctx.sensitivity, &ctx.dataset)?;
                    (r0, r1, None)
                }
                Adversary::Strong(s) => {
                    let (r0, p) = strong_accept_rate(s.as_ref(), &batch.models, split, Bit::Zero, ctx)?;
                    let (r1, _) = strong_accept_rate(s.as_ref(), &batch.models, split, Bit::One, ctx)?;
                    (r0, r1, p)
                }
            };
            Ok(SplitAdvantage {
                split: split.clone(),
                signed_value: r0 - r1,
                accept_rate_b0: r0,
                accept_rate_b1: r1,
                num_models: batch.models.len(),
                num_plays: plays,
            })
        })
        .collect()
}

pub fn split_advantage<M>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    split: &Split,
    ctx: &GameContext,
) -> Result<SplitAdvantage> {
    let batch = challenger.models(split)?;
    let mut v = evaluate_split(std::slice::from_ref(adversary), &batch, split, ctx)?;
    Ok(v.remove(0))
}

/// `|Adv_s + Adv_swap(s)| / 2` with both halves.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapValue {
    pub value: f64,
    pub original: SplitAdvantage,
    pub swapped: SplitAdvantage,
}

pub fn swap_advantage<M>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    split: &Split,
    ctx: &GameContext,
) -> Result<SwapValue> {
    let original = split_advantage(adversary, challenger, split, ctx)?;
    let swapped = split_advantage(adversary, challenger, &split.swap(), ctx)?;
    Ok(SwapValue {
        value: (original.signed_value + swapped.signed_value).abs() / 2.0,
        original,
        swapped,
    })
}

/// How the advantage is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Exact,
    Swap { num_pairs: usize },
    MonteCarlo { num_splits: usize },
}

impl Estimator {
    pub fn kind(&self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::Swap { .. } => "swap",
            Estimator::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Exact => write!(f, "exact"),
            Estimator::Swap { num_pairs } => write!(f, "swap:{num_pairs}"),
            Estimator::MonteCarlo { num_splits } => write!(f, "mc:{num_splits}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("estimator", format!("expected `exact`, `swap:N` or `mc:N`, got `{s}`"));
        let s = s.trim();
        if s == "exact" {
            return Ok(Estimator::Exact);
        }
        let (kind, count) = s.split_once(':').ok_or_else(bad)?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "swap" if count >= 1 => Ok(Estimator::Swap { num_pairs: count }),
            "mc" if count >= 2 => Ok(Estimator::MonteCarlo { num_splits: count }),
            "swap" | "mc" => Err(Error::config("estimator", format!("count in `{s}` is too small"))),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Estimator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Estimator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of per-split detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRow {
    /// Pair index for SWAP, sample index for Monte Carlo, canonical index for exact.
    pub index: usize,
    /// `"s"` or `"swap"` for SWAP rows, `"split"` otherwise.
    pub role: String,
    pub forget: Vec<usize>,
    pub test: Vec<usize>,
    pub signed_value: f64,
    pub accept_rate_b0: f64,
    pub accept_rate_b1: f64,
    pub num_models: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_plays: Option<usize>,
}

impl SplitRow {
    fn from_advantage(index: usize, role: &str, a: &SplitAdvantage) -> Self {
        SplitRow {
            index,
            role: role.into(),
            forget: a.split.forget().to_vec(),
            test: a.split.test().to_vec(),
            signed_value: a.signed_value,
            accept_rate_b0: a.accept_rate_b0,
            accept_rate_b1: a.accept_rate_b1,
            num_models: a.num_models,
            num_plays: a.num_plays,
        }
    }
}

/// An estimate for one adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryResult {
    pub adversary: String,
    pub fit_meta: String,
    pub estimator: String,
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub raw_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    pub splits: Vec<SplitRow>,
}

/// Aggregate of the removal ledgers seen during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub models: usize,
    pub retrain_triggered: usize,
    pub max_residual_norm: f64,
    pub budget: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_epsilon_consumed: Option<f64>,
}

impl LedgerSummary {
    fn from_ledgers(ledgers: &[RemovalLedger]) -> Option<Self> {
        let first = ledgers.first()?;
        let eps: Vec<f64> = ledgers.iter().filter_map(|l| l.epsilon_consumed).collect();
        Some(LedgerSummary {
            models: ledgers.len(),
            retrain_triggered: ledgers.iter().filter(|l| l.retrain_triggered).count(),
            max_residual_norm: ledgers.iter().map(|l| l.accumulated_residual_norm).fold(0.0, f64::max),
            budget: first.budget,
            max_epsilon_consumed: if eps.is_empty() {
                None
            } else {
                Some(eps.iter().copied().fold(0.0, f64::max))
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub version: u32,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unlearner: Option<UnlearnerSpec>,
    pub estimator: Estimator,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    pub adversaries: Vec<AdversaryResult>,
    pub unlearning_quality: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerSummary>,
}

impl AdvantageReport {
    pub fn max_advantage(&self) -> f64 {
        self.adversaries.iter().map(|a| a.value).fold(0.0, f64::max)
    }

    pub fn result(&self, adversary: &str) -> Option<&AdversaryResult> {
        self.adversaries.iter().find(|a| a.adversary == adversary)
    }
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

struct Evaluated {
    /// `per_split[i][a]` is adversary `a` on split `i`.
    per_split: Vec<Vec<SplitAdvantage>>,
    ledgers: Vec<RemovalLedger>,
}

fn evaluate_all<M>(
    roster: &[Adversary<M>],
    challenger: &dyn Challenger<M>,
    splits: &[Split],
    ctx: &GameContext,
) -> Result<Evaluated>
where
    M: Send + Sync,
{
    let results: Vec<(Vec<SplitAdvantage>, Vec<RemovalLedger>)> = splits
        .par_iter()
        .map(|s| {
            let batch = challenger.models(s)?;
            Ok((evaluate_split(roster, &batch, s, ctx)?, batch.ledgers))
        })
        .collect::<Result<_>>()?;
    let mut per_split = Vec::with_capacity(results.len());
    let mut ledgers = Vec::new();
    for (v, l) in results {
        per_split.push(v);
        ledgers.extend(l);
    }
    Ok(Evaluated { per_split, ledgers })
}

fn check_enumerable(n: usize, ctx: &GameContext) -> Result<()> {
    let size = split_space_size(n, ctx.alpha)?;
    if size > BigUint::from(ctx.enumeration_cap) {
        return Err(Error::EnumerationTooLarge {
            size: size.to_string(),
            cap: ctx.enumeration_cap,
        });
    }
    Ok(())
}

/// Splits used by an estimator, in canonical order. SWAP lists each pair as
/// `s` followed by `swap(s)`.
pub fn estimator_splits(estimator: Estimator, ctx: &GameContext) -> Result<Vec<Split>> {
    let n = ctx.dataset.len();
    match estimator {
        Estimator::Exact => {
            check_enumerable(n, ctx)?;
            Ok(enumerate_splits(n, ctx.alpha)?.collect())
        }
        Estimator::Swap { num_pairs } => {
            if num_pairs == 0 {
                return Err(Error::invalid("num_pairs", "must be positive"));
            }
            let mut out = Vec::with_capacity(2 * num_pairs);
            for k in 0..num_pairs {
                let s = sample_split(
                    n,
                    ctx.alpha,
                    seed::derive_seed(ctx.master_seed, "swap-split", 0, k as u64),
                )?;
                let partner = s.swap();
                out.push(s);
                out.push(partner);
            }
            Ok(out)
        }
        Estimator::MonteCarlo { num_splits } => {
            if num_splits < 2 {
                return Err(Error::Precondition(
                    "Monte-Carlo estimation needs at least two splits".into(),
                ));
            }
            (0..num_splits)
                .map(|k| {
                    sample_split(
                        n,
                        ctx.alpha,
                        seed::derive_seed(ctx.master_seed, "mc-split", 0, k as u64),
                    )
                })
                .collect()
        }
    }
}

fn aggregate(estimator: Estimator, adversary: &str, fit_meta: String, advs: Vec<&SplitAdvantage>) -> AdversaryResult {
    let (raw, se, rows) = match estimator {
        Estimator::Exact | Estimator::MonteCarlo { .. } => {
            let values: Vec<f64> = advs.iter().map(|a| a.signed_value).collect();
            let (mean, se) = mean_and_se(&values);
            let se = if estimator == Estimator::Exact { None } else { se };
            let rows = advs
                .iter()
                .enumerate()
                .map(|(i, a)| SplitRow::from_advantage(i, "split", a))
                .collect();
            (mean.abs(), se, rows)
        }
        Estimator::Swap { .. } => {
            let values: Vec<f64> = advs
                .chunks(2)
                .map(|p| (p[0].signed_value + p[1].signed_value).abs() / 2.0)
                .collect();
            let (mean, se) = mean_and_se(&values);
            let rows = advs
                .chunks(2)
                .enumerate()
                .flat_map(|(i, p)| {
                    [
                        SplitRow::from_advantage(i, "s", p[0]),
                        SplitRow::from_advantage(i, "swap", p[1]),
                    ]
                })
                .collect();
            (mean, se, rows)
        }
    };
    AdversaryResult {
        adversary: adversary.to_string(),
        fit_meta,
        estimator: estimator.to_string(),
        value: clamp_unit(raw),
        raw_value: raw,
        standard_error: se,
        splits: rows,
    }
}

/// Estimates every roster member's advantage and `Q = 1 - max advantage`.
pub fn unlearning_quality<M>(
    roster: &[Adversary<M>],
    challenger: &dyn Challenger<M>,
    estimator: Estimator,
    ctx: &GameContext,
) -> Result<AdvantageReport>
where
    M: Send + Sync,
{
    if roster.is_empty() {
        return Err(Error::Precondition("adversary roster is empty".into()));
    }
    let splits = estimator_splits(estimator, ctx)?;
    let evaluated = evaluate_all(roster, challenger, &splits, ctx)?;
    let adversaries: Vec<AdversaryResult> = roster
        .iter()
        .enumerate()
        .map(|(a, adv)| {
            let advs: Vec<&SplitAdvantage> = evaluated.per_split.iter().map(|v| &v[a]).collect();
            aggregate(estimator, &adv.name(), adv.fit_meta(), advs)
        })
        .collect();
    let max = adversaries.iter().map(|r| r.value).fold(0.0, f64::max);
    let unlearner = challenger.unlearner().cloned();
    let certified = match &unlearner {
        Some(UnlearnerSpec {
            kind: UnlearnerKind::CrNewton,
            epsilon_budget: Some(eps),
            delta: Some(delta),
            ..
        }) => Some(certified_bound(BoundParams::new(*eps, *delta)?)?),
        _ => None,
    };
    Ok(AdvantageReport {
        version: REPORT_VERSION,
        method: challenger.method(),
        unlearner,
        estimator,
        master_seed: ctx.master_seed,
        config_digest: None,
        adversaries,
        unlearning_quality: clamp_unit(1.0 - max),
        certified_bound: certified,
        ledger: LedgerSummary::from_ledgers(&evaluated.ledgers),
    })
}

/// `|mean|` of signed values over the whole split space.
pub fn exact_advantage<M: Send + Sync>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    ctx: &GameContext,
) -> Result<AdversaryResult> {
    estimate(adversary, challenger, Estimator::Exact, ctx)
}

/// `|mean|` and standard error over `num_splits` uniformly sampled splits.
pub fn mc_advantage<M: Send + Sync>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    num_splits: usize,
    ctx: &GameContext,
) -> Result<AdversaryResult> {
    estimate(adversary, challenger, Estimator::MonteCarlo { num_splits }, ctx)
}

/// Mean SWAP value over `num_pairs` sampled pairs.
pub fn swap_estimate<M: Send + Sync>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    num_pairs: usize,
    ctx: &GameContext,
) -> Result<AdversaryResult> {
    estimate(adversary, challenger, Estimator::Swap { num_pairs }, ctx)
}

fn estimate<M: Send + Sync>(
    adversary: &Adversary<M>,
    challenger: &dyn Challenger<M>,
    estimator: Estimator,
    ctx: &GameContext,
) -> Result<AdversaryResult> {
    let report = unlearning_quality(std::slice::from_ref(adversary), challenger, estimator, ctx)?;
    Ok(report.adversaries.into_iter().next().expect("one adversary"))
}

/// Re-derives an estimate from its per-split rows.
pub fn reaggregate(result: &AdversaryResult) -> Result<f64> {
    let estimator: Estimator = result.estimator.parse()?;
    let values: Vec<f64> = result.splits.iter().map(|r| r.signed_value).collect();
    if values.is_empty() {
        return Err(Error::Precondition("no split rows".into()));
    }
    let raw = match estimator {
        Estimator::Swap { .. } => {
            mean_and_se(&values.chunks(2).map(|p| (p[0] + p[1]).abs() / 2.0).collect::<Vec<_>>()).0
        }
        _ => mean_and_se(&values).0.abs(),
    };
    Ok(clamp_unit(raw))
}
