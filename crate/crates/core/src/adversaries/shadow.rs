//! Shadow-model attack.
//!
//! Shadow models are trained on seeded halves of a shadow dataset disjoint
//! from the target data. Each shadow point then yields an in/out example whose
//! features are the model's probability vector sorted in descending order,
//! followed by the probability of the true label. One binary logistic attack
//! model is fitted per class.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{Attack, Thresholds, WeakAdversary};
use crate::error::{Error, Result};
use crate::game::{DataPoint, Dataset};
use crate::learners::{self, LearnerSpec, Model, TrainConfig};
use crate::seed;

/// Splits `0..n` into two seeded halves `(inside, outside)`, each sorted.
pub fn seeded_halves(n: usize, seed_value: u64) -> (Vec<usize>, Vec<usize>) {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut seed::rng(seed_value));
    let mut inside = ids[..n / 2].to_vec();
    let mut outside = ids[n / 2..].to_vec();
    inside.sort_unstable();
    outside.sort_unstable();
    (inside, outside)
}

/// Descending probabilities followed by `p_label`.
pub fn attack_features(probs: &[f64], label: usize) -> Vec<f64> {
    let mut f = probs.to_vec();
    f.sort_by(|a, b| b.total_cmp(a));
    f.push(probs[label]);
    f
}

#[derive(Debug, Clone)]
pub struct ShadowConfig {
    pub shadow_dataset: Arc<Dataset>,
    pub num_shadow: usize,
    pub learner: LearnerSpec,
    pub train_config: TrainConfig,
    pub seed: u64,
}

impl ShadowConfig {
    fn validate(&self) -> Result<()> {
        if self.num_shadow == 0 {
            return Err(Error::invalid("num_shadow", "must be positive"));
        }
        if self.shadow_dataset.len() < 2 {
            return Err(Error::invalid("shadow_dataset", "needs at least two points"));
        }
        self.learner.validate()?;
        self.train_config.validate()
    }
}

/// One in/out example for the attack model.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackExample {
    pub label: usize,
    pub features: Vec<f64>,
    pub member: bool,
}

/// Trains shadow model `k` and returns its in/out examples.
fn shadow_examples(cfg: &ShadowConfig, k: usize) -> Result<Vec<AttackExample>> {
    let data = &cfg.shadow_dataset;
    let (inside, outside) = seeded_halves(data.len(), seed::derive_seed(cfg.seed, "shadow-half", 0, k as u64));
    let model = learners::train(
        &cfg.learner,
        &data.subset(&inside),
        data.num_classes(),
        &cfg.train_config
            .with_seed(seed::derive_seed(cfg.seed, "shadow-model", 0, k as u64)),
    )?;
    examples_for(&model, data, &inside, &outside)
}

/// In/out examples of `model` whose training set is `inside`.
pub fn examples_for(model: &Model, data: &Dataset, inside: &[usize], outside: &[usize]) -> Result<Vec<AttackExample>> {
    let tagged = inside
        .iter()
        .map(|&i| (i, true))
        .chain(outside.iter().map(|&i| (i, false)));
    tagged
        .map(|(i, member)| {
            let p = data.point(i);
            let probs = learners::predict_proba(model, &p.features)?;
            Ok(AttackExample {
                label: p.label,
                features: attack_features(&probs, p.label),
                member,
            })
        })
        .collect()
}

/// Per-class attack models over the shadow features.
#[derive(Debug, Clone)]
pub struct ShadowAttack {
    per_class: Vec<Model>,
    num_shadow: usize,
    seed: u64,
    shadow_size: usize,
}

const ATTACK_LAMBDA: f64 = 1e-3;
const ATTACK_LEARNING_RATE: f64 = 1.0;
const ATTACK_EPOCHS: usize = 2000;

pub fn fit_shadow(cfg: &ShadowConfig) -> Result<ShadowAttack> {
    cfg.validate()?;
    let examples: Vec<Vec<AttackExample>> = (0..cfg.num_shadow)
        .into_par_iter()
        .map(|k| shadow_examples(cfg, k))
        .collect::<Result<_>>()?;
    let examples: Vec<AttackExample> = examples.into_iter().flatten().collect();
    ShadowAttack::from_examples(
        &examples,
        cfg.shadow_dataset.num_classes(),
        cfg.num_shadow,
        cfg.seed,
        cfg.shadow_dataset.len(),
    )
}

impl ShadowAttack {
    fn from_examples(
        examples: &[AttackExample],
        num_classes: usize,
        num_shadow: usize,
        seed_value: u64,
        shadow_size: usize,
    ) -> Result<Self> {
        let spec = LearnerSpec::logistic(ATTACK_LAMBDA);
        let config = TrainConfig::full_batch(ATTACK_LEARNING_RATE, ATTACK_EPOCHS);
        let per_class = (0..num_classes)
            .map(|c| {
                let rows: Vec<DataPoint> = examples
                    .iter()
                    .filter(|e| e.label == c)
                    .enumerate()
                    .map(|(i, e)| DataPoint {
                        id: i,
                        features: e.features.clone(),
                        label: e.member as usize,
                    })
                    .collect();
                let members = rows.iter().filter(|r| r.label == 1).count();
                if members == 0 || members == rows.len() {
                    return Err(Error::DegenerateCalibration(format!(
                        "class {c} has {members} in and {} out shadow examples",
                        rows.len() - members
                    )));
                }
                learners::train(&spec, &rows, 2, &config)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ShadowAttack {
            per_class,
            num_shadow,
            seed: seed_value,
            shadow_size,
        })
    }

    /// Member probability for a probability vector of the target model.
    pub fn member_probability(&self, probs: &[f64], label: usize) -> f64 {
        let f = attack_features(probs, label);
        learners::predict_proba(&self.per_class[label], &f).expect("attack feature width")[1]
    }

    /// Fraction of examples classified correctly at threshold 0.5.
    pub fn accuracy(&self, examples: &[AttackExample]) -> f64 {
        let correct = examples
            .iter()
            .filter(|e| {
                let p =
                    learners::predict_proba(&self.per_class[e.label], &e.features).expect("attack feature width")[1];
                (p >= 0.5) == e.member
            })
            .count();
        correct as f64 / examples.len() as f64
    }

    pub fn attack_models(&self) -> &[Model] {
        &self.per_class
    }
}

impl Attack<Model> for ShadowAttack {
    fn name(&self) -> &str {
        "shadow"
    }

    fn against(&self, model: &Arc<Model>) -> Result<WeakAdversary> {
        if model.num_classes != self.per_class.len() {
            return Err(Error::DimensionMismatch {
                expected: self.per_class.len(),
                got: model.num_classes,
            });
        }
        let target = Arc::clone(model);
        let attack = self.clone();
        Ok(WeakAdversary::new(
            "shadow",
            move |x| {
                attack.member_probability(
                    &learners::predict_proba(&target, &x.features).expect("dimension"),
                    x.label,
                )
            },
            Thresholds::Global(0.5),
            self.fit_meta(),
        ))
    }

    fn fit_meta(&self) -> String {
        format!(
            "{} shadow models on seeded halves of {} shadow points (seed {}), per-class logistic attack",
            self.num_shadow, self.shadow_size, self.seed
        )
    }
}
