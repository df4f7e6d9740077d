//! The challenger: trains and unlearns the models handed to the adversary.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::game::{Dataset, Split};
use crate::learners::{self, LearnerSpec, Model, TrainConfig};
use crate::seed;
use crate::unlearners::{self, RemovalLedger, UnlearnerKind, UnlearnerSpec};

/// Models released for one split, plus removal ledgers where the method keeps one.
#[derive(Debug, Clone)]
pub struct ModelBatch<M> {
    pub models: Vec<Arc<M>>,
    pub ledgers: Vec<RemovalLedger>,
}

/// Produces `Unlearn(Learn(R u F), F)` samples for a split.
pub trait Challenger<M>: Send + Sync {
    /// Short method tag used in seeds and reports.
    fn method(&self) -> String;

    fn unlearner(&self) -> Option<&UnlearnerSpec> {
        None
    }

    fn models(&self, split: &Split) -> Result<ModelBatch<M>>;
}

type Cache = Mutex<HashMap<u64, Arc<Vec<Arc<Model>>>>>;

/// Challenger over real learners.
///
/// All model randomness (initialization, objective perturbation, unlearning
/// noise) is seeded from the retain set and the model index. A split and its
/// swap partner share the retain set, so they see common random numbers, and
/// Retrain hands both exactly the same cached models.
pub struct UnlearningChallenger {
    dataset: Arc<Dataset>,
    learner: LearnerSpec,
    train_config: TrainConfig,
    unlearner: UnlearnerSpec,
    models_per_split: usize,
    master_seed: u64,
    retrained: Cache,
}

impl UnlearningChallenger {
    pub fn new(
        dataset: Arc<Dataset>,
        learner: LearnerSpec,
        train_config: TrainConfig,
        unlearner: UnlearnerSpec,
        models_per_split: usize,
        master_seed: u64,
    ) -> Result<Self> {
        learner.validate()?;
        train_config.validate()?;
        unlearner.validate()?;
        if models_per_split == 0 {
            return Err(crate::error::Error::invalid("models_per_split", "must be positive"));
        }
        Ok(UnlearningChallenger {
            dataset,
            learner,
            train_config,
            unlearner,
            models_per_split,
            master_seed,
            retrained: Mutex::new(HashMap::new()),
        })
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    fn retain_key(split: &Split) -> u64 {
        seed::id_set_digest("retain", split.retain())
    }

    fn train_all(&self, tag: &str, key: u64, ids: &[usize]) -> Result<Vec<Arc<Model>>> {
        let points = self.dataset.subset(ids);
        (0..self.models_per_split)
            .map(|k| {
                let cfg = self
                    .train_config
                    .with_seed(seed::derive_seed(self.master_seed, tag, key, k as u64));
                learners::train(&self.learner, &points, self.dataset.num_classes(), &cfg).map(Arc::new)
            })
            .collect()
    }

    /// Models trained on the retain set only, cached by it.
    pub fn retrained(&self, split: &Split) -> Result<Arc<Vec<Arc<Model>>>> {
        let key = Self::retain_key(split);
        if let Some(hit) = self.retrained.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let models = self.train_all("retrain", key, split.retain())?;
        // concurrent misses compute identical values; keep the first insert
        let mut guard = self.retrained.lock().expect("cache lock");
        Ok(Arc::clone(guard.entry(key).or_insert_with(|| Arc::new(models))))
    }

    /// Models trained on `R u F`.
    pub fn originals(&self, split: &Split) -> Result<Vec<Arc<Model>>> {
        self.train_all("original", Self::retain_key(split), &split.train_ids())
    }
}

impl Challenger<Model> for UnlearningChallenger {
    fn method(&self) -> String {
        self.unlearner.label()
    }

    fn unlearner(&self) -> Option<&UnlearnerSpec> {
        Some(&self.unlearner)
    }

    fn models(&self, split: &Split) -> Result<ModelBatch<Model>> {
        if self.unlearner.kind == UnlearnerKind::Retrain {
            return Ok(ModelBatch {
                models: self.retrained(split)?.as_ref().clone(),
                ledgers: Vec::new(),
            });
        }
        let originals = self.originals(split)?;
        let retain = self.dataset.subset(split.retain());
        let forget = self.dataset.subset(split.forget());
        let mut models = Vec::with_capacity(originals.len());
        let mut ledgers = Vec::new();
        for (k, original) in originals.iter().enumerate() {
            let s = seed::derive_seed(
                self.master_seed,
                self.unlearner.tag(),
                Self::retain_key(split),
                k as u64,
            );
            let (model, ledger) = unlearners::unlearn(
                &self.unlearner,
                original,
                &retain,
                &forget,
                &self.learner,
                &self.train_config,
                s,
            )?;
            models.push(Arc::new(model));
            ledgers.extend(ledger);
        }
        Ok(ModelBatch { models, ledgers })
    }
}
