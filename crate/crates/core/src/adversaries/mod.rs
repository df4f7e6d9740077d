//! Membership-inference adversaries.
//!
//! A [`WeakAdversary`] is a per-point classifier `f(x) -> {0, 1}` bound to one
//! target model; it answers from a single oracle query. An [`Attack`] is the
//! recipe that produces a weak adversary for any model it is handed, after
//! calibration on shadow data only. Strong adversaries (which may query the
//! oracle repeatedly) live in [`strong`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{DataPoint, Dataset};
use crate::learners::{self, LearnerSpec, Model, TrainConfig};
use crate::seed;

pub mod shadow;
pub mod strong;

pub use shadow::{fit_shadow, ShadowAttack, ShadowConfig};
pub use strong::{lookup_adversary, weak_to_strong, LookupAdversary, OracleHandle, StrongAdversary, WeakAsStrong};

type ScoreFn = dyn Fn(&DataPoint) -> f64 + Send + Sync;

/// Decision threshold(s): `score >= threshold` means "member".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Thresholds {
    Global(f64),
    /// Indexed by the point's label; classes without a fitted value use `fallback`.
    PerClass {
        per_class: Vec<Option<f64>>,
        fallback: f64,
    },
}

impl Thresholds {
    pub fn for_label(&self, label: usize) -> f64 {
        match self {
            Thresholds::Global(t) => *t,
            Thresholds::PerClass { per_class, fallback } => {
                per_class.get(label).copied().flatten().unwrap_or(*fallback)
            }
        }
    }
}

/// A fitted per-point membership classifier.
#[derive(Clone)]
pub struct WeakAdversary {
    name: String,
    score: Arc<ScoreFn>,
    thresholds: Thresholds,
    fit_meta: String,
}

impl fmt::Debug for WeakAdversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakAdversary")
            .field("name", &self.name)
            .field("thresholds", &self.thresholds)
            .field("fit_meta", &self.fit_meta)
            .finish()
    }
}

impl WeakAdversary {
    pub fn new<F>(name: impl Into<String>, score: F, thresholds: Thresholds, fit_meta: impl Into<String>) -> Self
    where
        F: Fn(&DataPoint) -> f64 + Send + Sync + 'static,
    {
        WeakAdversary {
            name: name.into(),
            score: Arc::new(score),
            thresholds,
            fit_meta: fit_meta.into(),
        }
    }

    /// Always answers `bit`.
    pub fn constant(bit: bool) -> Self {
        let v = if bit { 1.0 } else { 0.0 };
        WeakAdversary::new(
            format!("constant-{}", bit as u8),
            move |_| v,
            Thresholds::Global(0.5),
            "none",
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fit_meta(&self) -> &str {
        &self.fit_meta
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    /// Higher means more member-like.
    pub fn score(&self, x: &DataPoint) -> f64 {
        (self.score)(x)
    }

    pub fn classify(&self, x: &DataPoint) -> bool {
        self.score(x) >= self.thresholds.for_label(x.label)
    }
}

/// A recipe producing a weak adversary for a given target model.
pub trait Attack<M>: Send + Sync {
    fn name(&self) -> &str;
    fn against(&self, model: &Arc<M>) -> Result<WeakAdversary>;
    /// Describes the calibration inputs, for report provenance.
    fn fit_meta(&self) -> String;
}

/// Probability vectors from a reference model whose membership is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub probs: Vec<f64>,
    pub label: usize,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub samples: Vec<CalibrationSample>,
    pub description: String,
}

impl CalibrationSet {
    /// Scores `(point, membership)` pairs under `reference`, the model the
    /// membership bits describe.
    pub fn from_model(reference: &Model, points: &[(DataPoint, bool)], description: impl Into<String>) -> Result<Self> {
        let samples = points
            .iter()
            .map(|(p, member)| {
                Ok(CalibrationSample {
                    probs: learners::predict_proba(reference, &p.features)?,
                    label: p.label,
                    member: *member,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CalibrationSet {
            samples,
            description: description.into(),
        })
    }

    /// Trains one model on a seeded half of `shadow` and labels the trained
    /// half as members, the rest as non-members.
    pub fn from_shadow(shadow: &Dataset, learner: &LearnerSpec, config: &TrainConfig, seed_value: u64) -> Result<Self> {
        let (inside, outside) =
            shadow::seeded_halves(shadow.len(), seed::derive_seed(seed_value, "calibration-half", 0, 0));
        let train_pts = shadow.subset(&inside);
        let model = learners::train(
            learner,
            &train_pts,
            shadow.num_classes(),
            &config.with_seed(seed::derive_seed(seed_value, "calibration-model", 0, 0)),
        )?;
        let labelled: Vec<(DataPoint, bool)> = inside
            .iter()
            .map(|&i| (shadow.point(i).clone(), true))
            .chain(outside.iter().map(|&i| (shadow.point(i).clone(), false)))
            .collect();
        Self::from_model(
            &model,
            &labelled,
            format!(
                "shadow model on {} of {} shadow points (seed {seed_value})",
                inside.len(),
                shadow.len()
            ),
        )
    }

    fn check_both_classes(&self) -> Result<()> {
        let members = self.samples.iter().filter(|s| s.member).count();
        if members == 0 || members == self.samples.len() {
            return Err(Error::DegenerateCalibration(
                "calibration needs both members and non-members".into(),
            ));
        }
        Ok(())
    }
}

/// Picks the threshold maximizing `TPR - FPR` over `(score, member)` pairs.
///
/// Candidates are every observed score plus `+inf` (never member). Ties go to
/// the smaller threshold. Returns `(threshold, fitted advantage)`.
pub fn fit_threshold(scored: &[(f64, bool)]) -> Result<(f64, f64)> {
    let pos = scored.iter().filter(|s| s.1).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateCalibration(
            "threshold fitting needs both members and non-members".into(),
        ));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    // sweep from the highest score down; at each distinct score s the
    // classifier `score >= s` accepts everything seen so far
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best = (f64::INFINITY, 0.0);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let adv = tp as f64 / pos as f64 - fp as f64 / neg as f64;
        if adv >= best.1 {
            best = (s, adv);
        }
    }
    Ok(best)
}

/// `1` when the model's argmax equals the label, threshold 0.5.
pub fn fit_correctness(model: Arc<Model>) -> WeakAdversary {
    WeakAdversary::new(
        "correctness",
        move |x| {
            let p = learners::predict_proba(&model, &x.features).expect("feature dimension checked by dataset");
            if learners::argmax(&p) == x.label {
                1.0
            } else {
                0.0
            }
        },
        Thresholds::Global(0.5),
        "no calibration",
    )
}

pub fn confidence_score(probs: &[f64], label: usize) -> f64 {
    probs[label]
}

const LOG_CLAMP: f64 = 1e-12;

fn clamped_ln(v: f64) -> f64 {
    v.max(LOG_CLAMP).ln()
}

/// Modified entropy `-(1 - p_y) log p_y - sum_{i != y} p_i log(1 - p_i)`.
pub fn modified_entropy(probs: &[f64], label: usize) -> f64 {
    let mut m = -(1.0 - probs[label]) * clamped_ln(probs[label]);
    for (i, &p) in probs.iter().enumerate() {
        if i != label {
            m -= p * clamped_ln(1.0 - p);
        }
    }
    m
}

pub fn mentropy_score(probs: &[f64], label: usize) -> f64 {
    -modified_entropy(probs, label)
}

/// Threshold on `p_label`, fitted on calibration data.
#[derive(Debug, Clone)]
pub struct ConfidenceAttack {
    threshold: f64,
    calibration_advantage: f64,
    description: String,
}

impl ConfidenceAttack {
    pub fn calibrate(calibration: &CalibrationSet) -> Result<Self> {
        calibration.check_both_classes()?;
        let scored: Vec<(f64, bool)> = calibration
            .samples
            .iter()
            .map(|s| (confidence_score(&s.probs, s.label), s.member))
            .collect();
        let (threshold, adv) = fit_threshold(&scored)?;
        Ok(ConfidenceAttack {
            threshold,
            calibration_advantage: adv,
            description: calibration.description.clone(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn calibration_advantage(&self) -> f64 {
        self.calibration_advantage
    }
}

impl Attack<Model> for ConfidenceAttack {
    fn name(&self) -> &str {
        "confidence"
    }

    fn against(&self, model: &Arc<Model>) -> Result<WeakAdversary> {
        let m = Arc::clone(model);
        Ok(WeakAdversary::new(
            "confidence",
            move |x| confidence_score(&learners::predict_proba(&m, &x.features).expect("dimension"), x.label),
            Thresholds::Global(self.threshold),
            self.fit_meta(),
        ))
    }

    fn fit_meta(&self) -> String {
        format!(
            "threshold {} (calibration advantage {:.4}) from {}",
            self.threshold, self.calibration_advantage, self.description
        )
    }
}

/// Per-class thresholds on the negated modified entropy.
#[derive(Debug, Clone)]
pub struct MentropyAttack {
    thresholds: Thresholds,
    description: String,
}

impl MentropyAttack {
    /// Classes whose calibration samples lack members or non-members fall
    /// back to the threshold fitted on all classes.
    pub fn calibrate(calibration: &CalibrationSet, num_classes: usize) -> Result<Self> {
        calibration.check_both_classes()?;
        let scored: Vec<(usize, f64, bool)> = calibration
            .samples
            .iter()
            .map(|s| (s.label, mentropy_score(&s.probs, s.label), s.member))
            .collect();
        let all: Vec<(f64, bool)> = scored.iter().map(|s| (s.1, s.2)).collect();
        let (fallback, _) = fit_threshold(&all)?;
        let per_class = (0..num_classes)
            .map(|c| {
                let class: Vec<(f64, bool)> = scored.iter().filter(|s| s.0 == c).map(|s| (s.1, s.2)).collect();
                fit_threshold(&class).ok().map(|t| t.0)
            })
            .collect();
        Ok(MentropyAttack {
            thresholds: Thresholds::PerClass { per_class, fallback },
            description: calibration.description.clone(),
        })
    }
}

impl Attack<Model> for MentropyAttack {
    fn name(&self) -> &str {
        "mentropy"
    }

    fn against(&self, model: &Arc<Model>) -> Result<WeakAdversary> {
        let m = Arc::clone(model);
        Ok(WeakAdversary::new(
            "mentropy",
            move |x| mentropy_score(&learners::predict_proba(&m, &x.features).expect("dimension"), x.label),
            self.thresholds.clone(),
            self.fit_meta(),
        ))
    }

    fn fit_meta(&self) -> String {
        format!("thresholds {:?} from {}", self.thresholds, self.description)
    }
}

pub struct CorrectnessAttack;

impl Attack<Model> for CorrectnessAttack {
    fn name(&self) -> &str {
        "correctness"
    }

    fn against(&self, model: &Arc<Model>) -> Result<WeakAdversary> {
        Ok(fit_correctness(Arc::clone(model)))
    }

    fn fit_meta(&self) -> String {
        "no calibration".into()
    }
}

/// Ignores the model and always answers the same bit.
pub struct ConstantAttack(pub bool);

impl<M: Send + Sync> Attack<M> for ConstantAttack {
    fn name(&self) -> &str {
        if self.0 {
            "constant-1"
        } else {
            "constant-0"
        }
    }

    fn against(&self, _model: &Arc<M>) -> Result<WeakAdversary> {
        Ok(WeakAdversary::constant(self.0))
    }

    fn fit_meta(&self) -> String {
        "none".into()
    }
}

pub fn fit_confidence(model: Arc<Model>, calibration: &CalibrationSet) -> Result<WeakAdversary> {
    ConfidenceAttack::calibrate(calibration)?.against(&model)
}

pub fn fit_mentropy(model: Arc<Model>, calibration: &CalibrationSet) -> Result<WeakAdversary> {
    let classes = model.num_classes;
    MentropyAttack::calibrate(calibration, classes)?.against(&model)
}
