//! Unlearning methods `Unlearn(Learn(R ∪ F), F)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::DataPoint;
use crate::learners::{self, LearnerKind, LearnerSpec, Model, Objective, TrainConfig, TwiceDifferentiable};
use crate::seed;

pub const DEFAULT_STEPS: usize = 10;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
/// Fisher diagonal entries are clamped below at this value before the -1/4 power.
pub const FISHER_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlearnerKind {
    Retrain,
    None,
    NegGrad,
    FtFinal,
    RetrFinal,
    Fisher,
    CrNewton,
}

impl UnlearnerKind {
    pub fn tag(self) -> &'static str {
        match self {
            UnlearnerKind::Retrain => "retrain",
            UnlearnerKind::None => "none",
            UnlearnerKind::NegGrad => "neg_grad",
            UnlearnerKind::FtFinal => "ft_final",
            UnlearnerKind::RetrFinal => "retr_final",
            UnlearnerKind::Fisher => "fisher",
            UnlearnerKind::CrNewton => "cr_newton",
        }
    }

    fn uses_steps(self) -> bool {
        matches!(
            self,
            UnlearnerKind::NegGrad | UnlearnerKind::FtFinal | UnlearnerKind::RetrFinal
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnlearnerSpec {
    pub kind: UnlearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl UnlearnerSpec {
    fn bare(kind: UnlearnerKind) -> Self {
        UnlearnerSpec {
            kind,
            steps: None,
            learning_rate: None,
            noise_sigma: None,
            epsilon_budget: None,
            delta: None,
        }
    }

    pub fn retrain() -> Self {
        Self::bare(UnlearnerKind::Retrain)
    }

    pub fn none() -> Self {
        Self::bare(UnlearnerKind::None)
    }

    pub fn neg_grad(steps: usize, learning_rate: f64) -> Self {
        Self::stepped(UnlearnerKind::NegGrad, steps, learning_rate)
    }

    pub fn ft_final(steps: usize, learning_rate: f64) -> Self {
        Self::stepped(UnlearnerKind::FtFinal, steps, learning_rate)
    }

    pub fn retr_final(steps: usize, learning_rate: f64) -> Self {
        Self::stepped(UnlearnerKind::RetrFinal, steps, learning_rate)
    }

    fn stepped(kind: UnlearnerKind, steps: usize, learning_rate: f64) -> Self {
        UnlearnerSpec {
            steps: Some(steps),
            learning_rate: Some(learning_rate),
            ..Self::bare(kind)
        }
    }

    pub fn fisher(noise_sigma: f64) -> Self {
        UnlearnerSpec {
            noise_sigma: Some(noise_sigma),
            ..Self::bare(UnlearnerKind::Fisher)
        }
    }

    pub fn cr_newton(epsilon_budget: f64, delta: f64) -> Self {
        UnlearnerSpec {
            epsilon_budget: Some(epsilon_budget),
            delta: Some(delta),
            ..Self::bare(UnlearnerKind::CrNewton)
        }
    }

    pub fn tag(&self) -> &'static str {
        self.kind.tag()
    }

    /// Human-readable label including parameters.
    pub fn label(&self) -> String {
        match self.kind {
            UnlearnerKind::NegGrad | UnlearnerKind::FtFinal | UnlearnerKind::RetrFinal => {
                format!("{}(steps={},lr={})", self.tag(), self.steps(), self.learning_rate())
            }
            UnlearnerKind::Fisher => format!("fisher(empirical-diagonal,sigma={})", self.noise_sigma.unwrap_or(0.0)),
            UnlearnerKind::CrNewton => format!(
                "cr_newton(eps={},delta={})",
                self.epsilon_budget.unwrap_or(f64::NAN),
                self.delta.unwrap_or(f64::NAN)
            ),
            _ => self.tag().to_string(),
        }
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(DEFAULT_LEARNING_RATE)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.kind;
        let stray = |field: &str, present: bool, used: bool| -> Result<()> {
            if present && !used {
                Err(Error::invalid(field, format!("not a parameter of {}", k.tag())))
            } else {
                Ok(())
            }
        };
        stray("steps", self.steps.is_some(), k.uses_steps())?;
        stray("learning_rate", self.learning_rate.is_some(), k.uses_steps())?;
        stray("noise_sigma", self.noise_sigma.is_some(), k == UnlearnerKind::Fisher)?;
        stray(
            "epsilon_budget",
            self.epsilon_budget.is_some(),
            k == UnlearnerKind::CrNewton,
        )?;
        stray("delta", self.delta.is_some(), k == UnlearnerKind::CrNewton)?;
        if k.uses_steps() && !(self.learning_rate() > 0.0) {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if k == UnlearnerKind::Fisher {
            match self.noise_sigma {
                Some(s) if s >= 0.0 && s.is_finite() => {}
                _ => return Err(Error::invalid("noise_sigma", "fisher needs a non-negative noise_sigma")),
            }
        }
        if k == UnlearnerKind::CrNewton {
            match self.epsilon_budget {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => {
                    return Err(Error::invalid(
                        "epsilon_budget",
                        "cr_newton needs a positive epsilon_budget",
                    ))
                }
            }
            match self.delta {
                Some(d) if d > 0.0 && d < 1.0 => {}
                _ => return Err(Error::invalid("delta", "cr_newton needs delta in (0, 1)")),
            }
        }
        Ok(())
    }
}

/// Gradient-residual accounting for certified removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalLedger {
    /// Norm of the summed retain-objective gradient after the update.
    pub accumulated_residual_norm: f64,
    /// Largest residual the epsilon budget allows (same units).
    pub budget: f64,
    pub retrain_triggered: bool,
    /// `residual_to_budget(residual, sigma, delta)` for an accepted Newton
    /// update, zero after a fallback, absent when sigma is zero.
    pub epsilon_consumed: Option<f64>,
}

/// `sqrt(2 ln(1.5 / delta))`.
pub fn residual_constant(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    Ok((2.0 * (1.5 / delta).ln()).sqrt())
}

/// Epsilon spent by a gradient residual under Gaussian objective perturbation
/// of scale `sigma`.
pub fn residual_to_budget(residual_norm: f64, sigma: f64, delta: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    if !(residual_norm >= 0.0) {
        return Err(Error::invalid("residual_norm", "must be non-negative"));
    }
    Ok(residual_constant(delta)? * residual_norm / sigma)
}

/// One Newton step `theta - H(theta)^-1 grad(theta)` on `objective`.
pub fn newton_step<O: TwiceDifferentiable>(objective: &O, params: &[f64]) -> Result<Vec<f64>> {
    let g = DVector::from_vec(objective.gradient(params));
    let h: DMatrix<f64> = objective.hessian(params);
    let step = match h.clone().cholesky() {
        Some(chol) => chol.solve(&g),
        None => h
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::DivergedTraining("singular Hessian in Newton removal".into()))?,
    };
    Ok(params.iter().zip(step.iter()).map(|(p, s)| p - s).collect())
}

fn ensure_finite(model: Model) -> Result<Model> {
    if model.is_finite() {
        Ok(model)
    } else {
        Err(Error::DivergedTraining("unlearned parameters are not finite".into()))
    }
}

/// Applies an unlearning method to `original`, which was trained on
/// `retain ∪ forget` with `learner`.
#[allow(clippy::too_many_arguments)]
pub fn unlearn(
    spec: &UnlearnerSpec,
    original: &Model,
    retain: &[DataPoint],
    forget: &[DataPoint],
    learner: &LearnerSpec,
    train_config: &TrainConfig,
    seed_value: u64,
) -> Result<(Model, Option<RemovalLedger>)> {
    spec.validate()?;
    let retrain = || {
        learners::train(
            learner,
            retain,
            original.num_classes,
            &train_config.with_seed(seed_value),
        )
    };
    let final_layer_only = |what: &str| -> Result<std::ops::Range<usize>> {
        original
            .spec
            .final_layer(original.dim, original.num_classes)
            .ok_or_else(|| {
                Error::UnsupportedModel(format!(
                    "{what} needs a model with a distinct final layer; logistic_regression has none"
                ))
            })
    };
    let model = match spec.kind {
        UnlearnerKind::Retrain => retrain()?,
        UnlearnerKind::None => original.clone(),
        UnlearnerKind::NegGrad => {
            if spec.steps() == 0 || forget.is_empty() {
                return Ok((original.clone(), None));
            }
            let objective = Objective::for_model(original, forget).data_only();
            let mut params = original.params.clone();
            for _ in 0..spec.steps() {
                let g = objective.gradient(&params);
                for (p, gi) in params.iter_mut().zip(&g) {
                    *p += spec.learning_rate() * gi;
                }
            }
            original.with_params(params)
        }
        UnlearnerKind::FtFinal | UnlearnerKind::RetrFinal => {
            let range = final_layer_only(spec.tag())?;
            let start = if spec.kind == UnlearnerKind::RetrFinal {
                learners::init_final_layer(original, seed::derive_seed(seed_value, "final-layer-init", 0, 0))
            } else {
                original.params.clone()
            };
            if spec.steps() == 0 {
                original.with_params(start)
            } else {
                let cfg = TrainConfig {
                    learning_rate: spec.learning_rate(),
                    epochs: spec.steps(),
                    batch_size: None,
                    seed: seed_value,
                    tolerance: 0.0,
                };
                let (params, _, _) = learners::descend(original, start, retain, &cfg, Some(range))?;
                original.with_params(params)
            }
        }
        UnlearnerKind::Fisher => {
            let sigma = spec.noise_sigma.unwrap_or(0.0);
            if sigma == 0.0 {
                return Ok((original.clone(), None));
            }
            let fisher = learners::fisher_diagonal(original, retain)?;
            let mut rng = seed::rng(seed_value);
            let params = original
                .params
                .iter()
                .zip(&fisher)
                .map(|(p, f)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p + sigma * f.max(FISHER_FLOOR).powf(-0.25) * z
                })
                .collect();
            original.with_params(params)
        }
        UnlearnerKind::CrNewton => return cr_newton(spec, original, retain, learner, train_config, seed_value),
    };
    Ok((ensure_finite(model)?, None))
}

fn cr_newton(
    spec: &UnlearnerSpec,
    original: &Model,
    retain: &[DataPoint],
    learner: &LearnerSpec,
    train_config: &TrainConfig,
    seed_value: u64,
) -> Result<(Model, Option<RemovalLedger>)> {
    if original.spec.kind != LearnerKind::LogisticRegression {
        return Err(Error::UnsupportedModel("cr_newton requires logistic_regression".into()));
    }
    if retain.is_empty() {
        return Err(Error::Precondition("cr_newton needs a nonempty retain set".into()));
    }
    let epsilon = spec.epsilon_budget.unwrap_or(0.0);
    let delta = spec.delta.unwrap_or(0.0);
    let c = residual_constant(delta)?;
    let sigma = original.spec.objective_perturbation_sigma;

    let objective = Objective::for_model(original, retain);
    let params = newton_step(&objective, &original.params)?;
    let residual = retain.len() as f64 * learners::norm(&objective.gradient(&params));
    let budget = epsilon * sigma / c;
    let triggered = !(residual <= budget);
    let ledger = RemovalLedger {
        accumulated_residual_norm: residual,
        budget,
        retrain_triggered: triggered,
        epsilon_consumed: (sigma > 0.0).then(|| if triggered { 0.0 } else { c * residual / sigma }),
    };
    let model = if triggered {
        learners::train(
            learner,
            retain,
            original.num_classes,
            &train_config.with_seed(seed_value),
        )?
    } else {
        original.with_params(params)
    };
    Ok((ensure_finite(model)?, Some(ledger)))
}
