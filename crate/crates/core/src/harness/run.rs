//! End-to-end pipeline: data, challenger, adversaries, estimates, reports.

use std::sync::Arc;

use super::config::{AdversaryConfig, DatasetSource, RunConfig};
use super::data::{self, Partition};
use super::report::{self, OutputPaths, RunDocument, DOCUMENT_FORMAT, DOCUMENT_VERSION};
use crate::adversaries::{
    fit_shadow, CalibrationSet, ConfidenceAttack, ConstantAttack, CorrectnessAttack, MentropyAttack, ShadowConfig,
};
use crate::engine::{unlearning_quality, Adversary, GameContext, UnlearningChallenger};
use crate::error::Result;
use crate::game::{split_sizes, Dataset, SensitivityDistribution};
use crate::learners::Model;
use crate::seed;

pub fn load_dataset(source: &DatasetSource) -> Result<Dataset> {
    match source {
        DatasetSource::Synthetic(spec) => data::generate_synthetic(spec),
        DatasetSource::Csv { path, num_classes } => data::load_csv(path, *num_classes),
        DatasetSource::Idx {
            images,
            labels,
            keep_labels,
        } => data::load_idx_pair(images, labels, keep_labels),
    }
}

/// Loads, subsamples and partitions the configured dataset.
pub fn prepare_data(config: &RunConfig) -> Result<Partition> {
    let mut dataset = load_dataset(&config.dataset)?;
    if let Some(size) = config.subsample {
        dataset = data::subsample(&dataset, size, seed::derive_seed(config.master_seed, "subsample", 0, 0))?;
    }
    let partition_seed = config.partition_seed.unwrap_or(config.master_seed);
    data::partition_target_shadow(&dataset, config.target_fraction, partition_seed)
}

/// Fits the configured roster. Calibration only ever sees shadow data.
pub fn build_roster(config: &RunConfig, shadow: &Arc<Dataset>) -> Result<Vec<Adversary<Model>>> {
    let calibration_seed = seed::derive_seed(config.master_seed, "calibration", 0, 0);
    let mut calibration: Option<CalibrationSet> = None;
    let mut calibrated = || -> Result<CalibrationSet> {
        if calibration.is_none() {
            calibration = Some(CalibrationSet::from_shadow(
                shadow,
                &config.learner,
                &config.train,
                calibration_seed,
            )?);
        }
        Ok(calibration.clone().expect("just set"))
    };
    config
        .adversaries
        .iter()
        .map(|a| {
            Ok(match a {
                AdversaryConfig::Correctness => Adversary::weak(CorrectnessAttack),
                AdversaryConfig::Confidence => Adversary::weak(ConfidenceAttack::calibrate(&calibrated()?)?),
                AdversaryConfig::Mentropy => {
                    Adversary::weak(MentropyAttack::calibrate(&calibrated()?, shadow.num_classes())?)
                }
                AdversaryConfig::Shadow { num_shadow } => Adversary::weak(fit_shadow(&ShadowConfig {
                    shadow_dataset: Arc::clone(shadow),
                    num_shadow: *num_shadow,
                    learner: config.learner.clone(),
                    train_config: config.train.clone(),
                    seed: seed::derive_seed(config.master_seed, "shadow", 0, 0),
                })?),
                AdversaryConfig::Constant { value } => Adversary::weak(ConstantAttack(*value)),
            })
        })
        .collect()
}

/// Runs every configured unlearner and returns the report document.
pub fn execute(config: &RunConfig) -> Result<RunDocument> {
    config.validate()?;
    let partition = prepare_data(config)?;
    let target = Arc::new(partition.target);
    let shadow = Arc::new(partition.shadow);
    split_sizes(target.len(), config.alpha)?;
    let sensitivity = if config.sensitivity == "uniform" {
        SensitivityDistribution::uniform(target.len())
    } else {
        data::load_sensitivity_csv(std::path::Path::new(&config.sensitivity), target.len())?
    };
    let ctx = GameContext::new(Arc::clone(&target), config.alpha, config.master_seed).with_sensitivity(sensitivity)?;
    let roster = build_roster(config, &shadow)?;
    let digest = config.digest();
    let reports = config
        .unlearners
        .iter()
        .map(|u| {
            let challenger = UnlearningChallenger::new(
                Arc::clone(&target),
                config.learner.clone(),
                config.train.clone(),
                u.clone(),
                config.models_per_split,
                config.master_seed,
            )?;
            let mut r = unlearning_quality(&roster, &challenger, config.estimator, &ctx)?;
            r.config_digest = Some(digest.clone());
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunDocument {
        format: DOCUMENT_FORMAT.into(),
        version: DOCUMENT_VERSION,
        config_digest: digest,
        config: config.clone(),
        target_size: target.len(),
        shadow_size: shadow.len(),
        reports,
    })
}

/// [`execute`] followed by writing the report files.
pub fn run(config: &RunConfig) -> Result<(RunDocument, OutputPaths)> {
    let doc = execute(config)?;
    let paths = report::write_outputs(&doc, &config.output_dir())?;
    Ok((doc, paths))
}
