//! Small differentiable models and their deterministic trainer.
//!
//! Two model kinds are supported:
//!
//! * `logistic_regression`: multinomial logistic regression with class 0 as
//!   the reference class (its logit is fixed at zero). Parameters are laid
//!   out as `C - 1` rows of `[w_1 .. w_d, bias]`. With two classes this is
//!   the usual sigmoid model with `d + 1` parameters.
//! * `mlp1`: one hidden `tanh` layer of width `H` followed by a softmax
//!   output layer over all `C` classes. Layout: `W1` (`H x d`, row-major),
//!   `b1` (`H`), `W2` (`C x H`, row-major), `b2` (`C`). The output layer
//!   (`W2`, `b2`) is the "final layer" used by the last-layer unlearners.
//!
//! The training objective is the mean cross-entropy plus
//! `(l2_lambda / 2) * |theta|^2`, plus `b . theta / n` when objective
//! perturbation is enabled (`b ~ N(0, sigma^2 I)`, drawn from the train seed).

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::DataPoint;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LogisticRegression,
    Mlp1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default)]
    pub l2_lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
    #[serde(default)]
    pub objective_perturbation_sigma: f64,
}

impl LearnerSpec {
    pub fn logistic(l2_lambda: f64) -> Self {
        LearnerSpec {
            kind: LearnerKind::LogisticRegression,
            l2_lambda,
            hidden_width: None,
            objective_perturbation_sigma: 0.0,
        }
    }

    pub fn mlp(l2_lambda: f64, hidden_width: usize) -> Self {
        LearnerSpec {
            kind: LearnerKind::Mlp1,
            l2_lambda,
            hidden_width: Some(hidden_width),
            objective_perturbation_sigma: 0.0,
        }
    }

    pub fn with_perturbation(mut self, sigma: f64) -> Self {
        self.objective_perturbation_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0) || !self.l2_lambda.is_finite() {
            return Err(Error::invalid("l2_lambda", "must be finite and non-negative"));
        }
        if !(self.objective_perturbation_sigma >= 0.0) || !self.objective_perturbation_sigma.is_finite() {
            return Err(Error::invalid(
                "objective_perturbation_sigma",
                "must be finite and non-negative",
            ));
        }
        match self.kind {
            LearnerKind::LogisticRegression => {
                if self.hidden_width.is_some() {
                    return Err(Error::invalid("hidden_width", "only valid for mlp1"));
                }
            }
            LearnerKind::Mlp1 => {
                if self.hidden_width.unwrap_or(0) == 0 {
                    return Err(Error::invalid("hidden_width", "mlp1 needs hidden_width >= 1"));
                }
                if self.objective_perturbation_sigma != 0.0 {
                    return Err(Error::invalid(
                        "objective_perturbation_sigma",
                        "objective perturbation is only defined for logistic_regression",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn num_params(&self, dim: usize, num_classes: usize) -> usize {
        match self.kind {
            LearnerKind::LogisticRegression => (num_classes - 1) * (dim + 1),
            LearnerKind::Mlp1 => {
                let h = self.hidden_width.unwrap_or(1);
                h * dim + h + num_classes * h + num_classes
            }
        }
    }

    /// Index range of the output layer inside the flat parameter vector.
    pub fn final_layer(&self, dim: usize, num_classes: usize) -> Option<std::ops::Range<usize>> {
        match self.kind {
            LearnerKind::LogisticRegression => None,
            LearnerKind::Mlp1 => {
                let h = self.hidden_width.unwrap_or(1);
                let start = h * dim + h;
                Some(start..start + num_classes * h + num_classes)
            }
        }
    }
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` means full batch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl TrainConfig {
    pub fn full_batch(learning_rate: f64, epochs: usize) -> Self {
        TrainConfig {
            learning_rate,
            epochs,
            batch_size: None,
            seed: 0,
            tolerance: default_tolerance(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        TrainConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid("tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub final_gradient_norm: f64,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub spec: LearnerSpec,
    pub dim: usize,
    pub num_classes: usize,
    pub params: Vec<f64>,
    pub perturbation: Option<Vec<f64>>,
    pub train_meta: TrainMeta,
}

const MODEL_FORMAT: &str = "usi-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    version: u32,
    model: Model,
}

impl Model {
    /// A model with all-zero parameters, mostly useful in tests.
    pub fn zeros(spec: LearnerSpec, dim: usize, num_classes: usize) -> Self {
        let n = spec.num_params(dim, num_classes);
        Model {
            spec,
            dim,
            num_classes,
            params: vec![0.0; n],
            perturbation: None,
            train_meta: TrainMeta {
                seed: 0,
                final_gradient_norm: f64::NAN,
                epochs_run: 0,
            },
        }
    }

    pub fn with_params(&self, params: Vec<f64>) -> Model {
        Model { params, ..self.clone() }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    pub fn to_json(&self) -> Result<String> {
        let record = ModelRecord {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string(&record)?)
    }

    pub fn from_json(s: &str) -> Result<Model> {
        let record: ModelRecord = serde_json::from_str(s)?;
        if record.format != MODEL_FORMAT || record.version != MODEL_VERSION {
            return Err(Error::invalid(
                "model",
                format!("unsupported model record {} v{}", record.format, record.version),
            ));
        }
        Ok(record.model)
    }

    fn objective<'a>(&'a self, points: &'a [DataPoint]) -> Objective<'a> {
        Objective {
            spec: &self.spec,
            dim: self.dim,
            num_classes: self.num_classes,
            points,
            perturbation: self.perturbation.as_deref(),
            lambda: self.spec.l2_lambda,
        }
    }
}

/// Something with a gradient and a Hessian, for Newton-type updates.
pub trait TwiceDifferentiable {
    fn num_params(&self) -> usize;
    fn gradient(&self, params: &[f64]) -> Vec<f64>;
    fn hessian(&self, params: &[f64]) -> DMatrix<f64>;
}

/// The regularized (and possibly perturbed) empirical objective of a model
/// kind over a fixed subset.
#[derive(Clone, Copy)]
pub struct Objective<'a> {
    spec: &'a LearnerSpec,
    dim: usize,
    num_classes: usize,
    points: &'a [DataPoint],
    perturbation: Option<&'a [f64]>,
    lambda: f64,
}

impl<'a> Objective<'a> {
    pub fn for_model(model: &'a Model, points: &'a [DataPoint]) -> Objective<'a> {
        model.objective(points)
    }

    /// The same objective without the regularizer and perturbation terms.
    pub fn data_only(mut self) -> Self {
        self.perturbation = None;
        self.lambda = 0.0;
        self
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let n = self.points.len() as f64;
        let mut probs = vec![0.0; self.num_classes];
        let mut hidden = Vec::new();
        let mut total = 0.0;
        for p in self.points {
            forward(
                self.spec,
                self.dim,
                self.num_classes,
                params,
                &p.features,
                &mut hidden,
                &mut probs,
            );
            total -= probs[p.label].max(f64::MIN_POSITIVE).ln();
        }
        let mut value = total / n + 0.5 * self.lambda * dot(params, params);
        if let Some(b) = self.perturbation {
            value += dot(b, params) / n;
        }
        value
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let n = self.points.len() as f64;
        let mut grad = vec![0.0; params.len()];
        let mut scratch = Scratch::new(self.spec, self.num_classes);
        for p in self.points {
            example_gradient(
                self.spec,
                self.dim,
                self.num_classes,
                params,
                p,
                &mut scratch,
                &mut grad,
                1.0,
            );
        }
        for (i, g) in grad.iter_mut().enumerate() {
            *g = *g / n + self.lambda * params[i];
        }
        if let Some(b) = self.perturbation {
            for (g, bi) in grad.iter_mut().zip(b) {
                *g += bi / n;
            }
        }
        grad
    }

    /// Exact Hessian; logistic regression only.
    pub fn hessian(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        if self.spec.kind != LearnerKind::LogisticRegression {
            return Err(Error::UnsupportedModel(
                "Hessian is only available for logistic_regression".into(),
            ));
        }
        let k = self.num_classes - 1;
        let w = self.dim + 1;
        let np = k * w;
        let mut h = DMatrix::<f64>::zeros(np, np);
        let n = self.points.len() as f64;
        let mut probs = vec![0.0; self.num_classes];
        let mut hidden = Vec::new();
        let mut xa = vec![0.0; w];
        for p in self.points {
            forward(
                self.spec,
                self.dim,
                self.num_classes,
                params,
                &p.features,
                &mut hidden,
                &mut probs,
            );
            xa[..self.dim].copy_from_slice(&p.features);
            xa[self.dim] = 1.0;
            for a in 0..k {
                for b in 0..k {
                    let pa = probs[a + 1];
                    let pb = probs[b + 1];
                    let c = if a == b { pa - pa * pb } else { -pa * pb };
                    if c == 0.0 {
                        continue;
                    }
                    for i in 0..w {
                        let ci = c * xa[i];
                        for j in 0..w {
                            h[(a * w + i, b * w + j)] += ci * xa[j];
                        }
                    }
                }
            }
        }
        h /= n;
        for i in 0..np {
            h[(i, i)] += self.lambda;
        }
        Ok(h)
    }
}

impl TwiceDifferentiable for Objective<'_> {
    fn num_params(&self) -> usize {
        self.spec.num_params(self.dim, self.num_classes)
    }

    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        Objective::gradient(self, params)
    }

    fn hessian(&self, params: &[f64]) -> DMatrix<f64> {
        Objective::hessian(self, params).expect("hessian requested for a model kind without one")
    }
}

struct Scratch {
    probs: Vec<f64>,
    hidden: Vec<f64>,
    delta_hidden: Vec<f64>,
}

impl Scratch {
    fn new(spec: &LearnerSpec, num_classes: usize) -> Self {
        let h = spec.hidden_width.unwrap_or(0);
        Scratch {
            probs: vec![0.0; num_classes],
            hidden: vec![0.0; h],
            delta_hidden: vec![0.0; h],
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

/// Writes class probabilities into `probs`; `hidden` receives MLP activations.
fn forward(
    spec: &LearnerSpec,
    dim: usize,
    num_classes: usize,
    params: &[f64],
    x: &[f64],
    hidden: &mut Vec<f64>,
    probs: &mut [f64],
) {
    match spec.kind {
        LearnerKind::LogisticRegression => {
            let w = dim + 1;
            probs[0] = 0.0;
            for k in 1..num_classes {
                let row = &params[(k - 1) * w..k * w];
                probs[k] = dot(&row[..dim], x) + row[dim];
            }
        }
        LearnerKind::Mlp1 => {
            let h = spec.hidden_width.unwrap_or(1);
            hidden.resize(h, 0.0);
            let (w1, rest) = params.split_at(h * dim);
            let (b1, rest) = rest.split_at(h);
            let (w2, b2) = rest.split_at(num_classes * h);
            for j in 0..h {
                hidden[j] = (dot(&w1[j * dim..(j + 1) * dim], x) + b1[j]).tanh();
            }
            for k in 0..num_classes {
                probs[k] = dot(&w2[k * h..(k + 1) * h], hidden) + b2[k];
            }
        }
    }
    softmax_in_place(probs);
}

/// Adds `scale * grad(-log p_y)` for one example into `grad`.
#[allow(clippy::too_many_arguments)]
fn example_gradient(
    spec: &LearnerSpec,
    dim: usize,
    num_classes: usize,
    params: &[f64],
    p: &DataPoint,
    s: &mut Scratch,
    grad: &mut [f64],
    scale: f64,
) {
    forward(spec, dim, num_classes, params, &p.features, &mut s.hidden, &mut s.probs);
    s.probs[p.label] -= 1.0;
    let x = &p.features;
    match spec.kind {
        LearnerKind::LogisticRegression => {
            let w = dim + 1;
            for k in 1..num_classes {
                let d = scale * s.probs[k];
                let row = &mut grad[(k - 1) * w..k * w];
                for i in 0..dim {
                    row[i] += d * x[i];
                }
                row[dim] += d;
            }
        }
        LearnerKind::Mlp1 => {
            let h = spec.hidden_width.unwrap_or(1);
            let w2_off = h * dim + h;
            let b2_off = w2_off + num_classes * h;
            s.delta_hidden.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..num_classes {
                let d = s.probs[k];
                for j in 0..h {
                    grad[w2_off + k * h + j] += scale * d * s.hidden[j];
                    s.delta_hidden[j] += d * params[w2_off + k * h + j];
                }
                grad[b2_off + k] += scale * d;
            }
            for j in 0..h {
                let da = scale * s.delta_hidden[j] * (1.0 - s.hidden[j] * s.hidden[j]);
                for i in 0..dim {
                    grad[j * dim + i] += da * x[i];
                }
                grad[h * dim + j] += da;
            }
        }
    }
}

fn check_subset(model_dim: usize, num_classes: usize, subset: &[DataPoint]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Precondition("subset must be nonempty".into()));
    }
    for p in subset {
        if p.features.len() != model_dim {
            return Err(Error::DimensionMismatch {
                expected: model_dim,
                got: p.features.len(),
            });
        }
        if p.label >= num_classes {
            return Err(Error::invalid("label", format!("label {} out of range", p.label)));
        }
    }
    Ok(())
}

fn init_params(spec: &LearnerSpec, dim: usize, num_classes: usize, rng: &mut seed::Rng) -> Vec<f64> {
    let n = spec.num_params(dim, num_classes);
    match spec.kind {
        LearnerKind::LogisticRegression => vec![0.0; n],
        LearnerKind::Mlp1 => {
            let h = spec.hidden_width.unwrap_or(1);
            let mut params = Vec::with_capacity(n);
            let b_in = 1.0 / (dim as f64).sqrt();
            let b_out = 1.0 / (h as f64).sqrt();
            for _ in 0..h * dim + h {
                params.push(rng.random_range(-b_in..=b_in));
            }
            for _ in 0..num_classes * h + num_classes {
                params.push(rng.random_range(-b_out..=b_out));
            }
            params
        }
    }
}

/// Seeded uniform re-initialization of the output layer, as `train` would do.
pub(crate) fn init_final_layer(model: &Model, seed_value: u64) -> Vec<f64> {
    let mut params = model.params.clone();
    if let Some(range) = model.spec.final_layer(model.dim, model.num_classes) {
        let h = model.spec.hidden_width.unwrap_or(1);
        let bound = 1.0 / (h as f64).sqrt();
        let mut rng = seed::rng(seed_value);
        for v in &mut params[range] {
            *v = rng.random_range(-bound..=bound);
        }
    }
    params
}

fn draw_perturbation(sigma: f64, n: usize, rng: &mut seed::Rng) -> Option<Vec<f64>> {
    if sigma == 0.0 {
        return None;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    Some((0..n).map(|_| normal.sample(rng)).collect())
}

/// Gradient descent over a parameter mask. Shared by `train` and the
/// fine-tuning unlearners.
pub(crate) fn descend(
    model: &Model,
    start: Vec<f64>,
    subset: &[DataPoint],
    config: &TrainConfig,
    mask: Option<std::ops::Range<usize>>,
) -> Result<(Vec<f64>, usize, f64)> {
    let objective = model.objective(subset);
    let mut params = start;
    let mut rng = seed::rng(seed::derive_seed(config.seed, "batch-order", 0, 0));
    let mut order: Vec<usize> = (0..subset.len()).collect();
    let range = mask.unwrap_or(0..params.len());
    let mut epochs_run = 0;
    let mut grad_norm = f64::INFINITY;
    for _ in 0..config.epochs {
        let full = objective.gradient(&params);
        grad_norm = norm(&full[range.clone()]);
        if grad_norm <= config.tolerance {
            break;
        }
        match config.batch_size {
            Some(bs) if bs < subset.len() => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(bs) {
                    let batch: Vec<DataPoint> = chunk.iter().map(|&i| subset[i].clone()).collect();
                    let mut g = Objective {
                        points: &batch,
                        ..objective
                    }
                    .gradient(&params);
                    // perturbation term is scaled by the full-set size, not the batch size
                    if let Some(b) = objective.perturbation {
                        let (nb, n) = (batch.len() as f64, subset.len() as f64);
                        for (gi, bi) in g.iter_mut().zip(b) {
                            *gi += bi / n - bi / nb;
                        }
                    }
                    for i in range.clone() {
                        params[i] -= config.learning_rate * g[i];
                    }
                }
            }
            _ => {
                for i in range.clone() {
                    params[i] -= config.learning_rate * full[i];
                }
            }
        }
        epochs_run += 1;
        let loss = objective.loss(&params);
        if !loss.is_finite() || params.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergedTraining(format!(
                "loss became {loss} after {epochs_run} epochs"
            )));
        }
    }
    if epochs_run == config.epochs {
        grad_norm = norm(&objective.gradient(&params)[range]);
    }
    Ok((params, epochs_run, grad_norm))
}

/// Trains a model on `subset`. Deterministic in `(spec, subset order, config)`.
pub fn train(spec: &LearnerSpec, subset: &[DataPoint], num_classes: usize, config: &TrainConfig) -> Result<Model> {
    spec.validate()?;
    config.validate()?;
    let first = subset
        .first()
        .ok_or_else(|| Error::Precondition("training subset must be nonempty".into()))?;
    if num_classes < 2 {
        return Err(Error::invalid("num_classes", "need at least two classes"));
    }
    let dim = first.features.len();
    check_subset(dim, num_classes, subset)?;

    let mut rng = seed::rng(config.seed);
    let n_params = spec.num_params(dim, num_classes);
    let perturbation = draw_perturbation(spec.objective_perturbation_sigma, n_params, &mut rng);
    let params = init_params(spec, dim, num_classes, &mut rng);
    let mut model = Model {
        spec: spec.clone(),
        dim,
        num_classes,
        params: Vec::new(),
        perturbation,
        train_meta: TrainMeta {
            seed: config.seed,
            final_gradient_norm: f64::NAN,
            epochs_run: 0,
        },
    };
    let (params, epochs_run, grad_norm) = descend(&model, params, subset, config, None)?;
    model.params = params;
    model.train_meta.epochs_run = epochs_run;
    model.train_meta.final_gradient_norm = grad_norm;
    Ok(model)
}

/// Class probabilities for one feature vector.
pub fn predict_proba(model: &Model, features: &[f64]) -> Result<Vec<f64>> {
    if features.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: features.len(),
        });
    }
    let mut probs = vec![0.0; model.num_classes];
    let mut hidden = Vec::new();
    forward(
        &model.spec,
        model.dim,
        model.num_classes,
        &model.params,
        features,
        &mut hidden,
        &mut probs,
    );
    Ok(probs)
}

/// Gradient of the regularized (perturbed) objective over `subset`.
pub fn loss_gradient(model: &Model, subset: &[DataPoint]) -> Result<Vec<f64>> {
    check_subset(model.dim, model.num_classes, subset)?;
    Ok(model.objective(subset).gradient(&model.params))
}

pub fn loss_value(model: &Model, subset: &[DataPoint]) -> Result<f64> {
    check_subset(model.dim, model.num_classes, subset)?;
    Ok(model.objective(subset).loss(&model.params))
}

pub fn hessian(model: &Model, subset: &[DataPoint]) -> Result<DMatrix<f64>> {
    if model.spec.kind != LearnerKind::LogisticRegression {
        return Err(Error::UnsupportedModel(
            "Hessian is only available for logistic_regression".into(),
        ));
    }
    check_subset(model.dim, model.num_classes, subset)?;
    model.objective(subset).hessian(&model.params)
}

/// Empirical Fisher diagonal: mean of squared per-example log-likelihood
/// gradients.
pub fn fisher_diagonal(model: &Model, subset: &[DataPoint]) -> Result<Vec<f64>> {
    check_subset(model.dim, model.num_classes, subset)?;
    let n = model.params.len();
    let mut acc = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut scratch = Scratch::new(&model.spec, model.num_classes);
    for p in subset {
        g.iter_mut().for_each(|v| *v = 0.0);
        example_gradient(
            &model.spec,
            model.dim,
            model.num_classes,
            &model.params,
            p,
            &mut scratch,
            &mut g,
            1.0,
        );
        for (a, gi) in acc.iter_mut().zip(&g) {
            *a += gi * gi;
        }
    }
    let m = subset.len() as f64;
    acc.iter_mut().for_each(|v| *v /= m);
    Ok(acc)
}

/// Fraction of `subset` whose argmax prediction equals the label.
pub fn accuracy(model: &Model, subset: &[DataPoint]) -> Result<f64> {
    let mut correct = 0usize;
    for p in subset {
        if argmax(&predict_proba(model, &p.features)?) == p.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / subset.len().max(1) as f64)
}

/// First index of the maximum (ties go to the lowest class).
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
