//! Run configuration (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::data::SyntheticSpec;
use crate::engine::Estimator;
use crate::error::{Error, Result};
use crate::game::Alpha;
use crate::learners::{LearnerSpec, TrainConfig};
use crate::unlearners::UnlearnerSpec;

/// Overrides `output.dir` when set.
pub const OUTPUT_DIR_ENV: &str = "USI_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        num_classes: Option<usize>,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        keep_labels: BTreeSet<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryConfig {
    Correctness,
    Confidence,
    Mentropy,
    Shadow {
        #[serde(default = "default_num_shadow")]
        num_shadow: usize,
    },
    Constant {
        value: bool,
    },
}

fn default_num_shadow() -> usize {
    2
}

fn default_alpha() -> Alpha {
    Alpha::new(1, 10).expect("1/10 is a valid portion")
}

fn default_fraction() -> f64 {
    0.5
}

fn default_models() -> usize {
    3
}

fn default_sensitivity() -> String {
    "uniform".into()
}

fn default_roster() -> Vec<AdversaryConfig> {
    vec![
        AdversaryConfig::Correctness,
        AdversaryConfig::Confidence,
        AdversaryConfig::Mentropy,
        AdversaryConfig::Shadow { num_shadow: 2 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub dataset: DatasetSource,
    /// Uniform subsample of the loaded dataset before partitioning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
    #[serde(default = "default_fraction")]
    pub target_fraction: f64,
    /// Defaults to `master_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_seed: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: Alpha,
    /// `"uniform"` or a path to an `id,weight` CSV over target ids.
    #[serde(default = "default_sensitivity")]
    pub sensitivity: String,
    pub learner: LearnerSpec,
    pub train: TrainConfig,
    pub unlearners: Vec<UnlearnerSpec>,
    #[serde(default = "default_roster")]
    pub adversaries: Vec<AdversaryConfig>,
    pub estimator: Estimator,
    #[serde(default = "default_models")]
    pub models_per_split: usize,
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| text[s].trim().to_string()).unwrap_or_default();
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Makes relative input paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.dataset {
            DatasetSource::Synthetic(_) => {}
            DatasetSource::Csv { path, .. } => fix(path),
            DatasetSource::Idx { images, labels, .. } => {
                fix(images);
                fix(labels);
            }
        }
        if self.sensitivity != "uniform" {
            let mut p = PathBuf::from(&self.sensitivity);
            fix(&mut p);
            self.sensitivity = p.to_string_lossy().into_owned();
        }
        if let Some(dir) = &mut self.output.dir {
            fix(dir);
        }
    }

    pub fn check_files(&self) -> Result<()> {
        let exists = |field: &str, p: &Path| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::config(field, format!("file {} does not exist", p.display())))
            }
        };
        match &self.dataset {
            DatasetSource::Synthetic(_) => {}
            DatasetSource::Csv { path, .. } => exists("dataset.path", path)?,
            DatasetSource::Idx { images, labels, .. } => {
                exists("dataset.images", images)?;
                exists("dataset.labels", labels)?;
            }
        }
        if self.sensitivity != "uniform" {
            exists("sensitivity", Path::new(&self.sensitivity))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let DatasetSource::Synthetic(s) = &self.dataset {
            s.validate()?;
        }
        if let DatasetSource::Idx { keep_labels, .. } = &self.dataset {
            if keep_labels.is_empty() {
                return Err(Error::EmptySelection);
            }
        }
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return Err(Error::config("target_fraction", "must lie in (0, 1)"));
        }
        if self.unlearners.is_empty() {
            return Err(Error::config("unlearners", "list at least one unlearner"));
        }
        if self.adversaries.is_empty() {
            return Err(Error::config("adversaries", "list at least one adversary"));
        }
        if self.models_per_split == 0 {
            return Err(Error::config("models_per_split", "must be positive"));
        }
        if self.subsample == Some(0) {
            return Err(Error::config("subsample", "must be positive"));
        }
        for a in &self.adversaries {
            if let AdversaryConfig::Shadow { num_shadow: 0 } = a {
                return Err(Error::config("adversaries.num_shadow", "must be positive"));
            }
        }
        self.learner.validate()?;
        self.train.validate()?;
        for u in &self.unlearners {
            u.validate()?;
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("usi-output"))
    }

    /// Hex SHA-256 of the canonical JSON form. Output paths are excluded.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
master_seed = 7
alpha = "1/5"
estimator = "swap:4"

[dataset]
kind = "synthetic"
num_points = 40
dim = 2
num_classes = 2
cluster_separation = 2.0
noise_sigma = 1.0

[learner]
kind = "logistic_regression"
l2_lambda = 0.01

[train]
learning_rate = 0.5
epochs = 50

[[unlearners]]
kind = "retrain"
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.models_per_split, 3);
        assert_eq!(c.target_fraction, 0.5);
        assert_eq!(c.adversaries.len(), 4);
        assert_eq!(c.estimator, Estimator::Swap { num_pairs: 4 });
        assert_eq!(c.alpha, Alpha::new(1, 5).unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASE.replace("master_seed = 7", "master_seed = 7\nmaster_sed = 8");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config { .. })));
        let bad = BASE.replace("noise_sigma = 1.0", "noise_sigma = 1.0\nnoise = 2");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = BASE.replace("epochs = 50", "epochs = 50\nmomentum = 0.9");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn digest_tracks_semantics_not_whitespace() {
        let a = RunConfig::from_toml(BASE).unwrap();
        let spaced = BASE.replace("master_seed = 7", "master_seed    =    7\n\n# comment");
        assert_eq!(a.digest(), RunConfig::from_toml(&spaced).unwrap().digest());
        let explicit = BASE.replace("master_seed = 7", "master_seed = 7\nmodels_per_split = 3");
        assert_eq!(a.digest(), RunConfig::from_toml(&explicit).unwrap().digest());
        let changed = BASE.replace("epochs = 50", "epochs = 51");
        assert_ne!(a.digest(), RunConfig::from_toml(&changed).unwrap().digest());
        let out = BASE.to_string() + "\n[output]\ndir = \"elsewhere\"\n";
        assert_eq!(a.digest(), RunConfig::from_toml(&out).unwrap().digest());
    }

    #[test]
    fn bad_estimator_and_missing_files() {
        let bad = BASE.replace("swap:4", "swap:zero");
        assert!(RunConfig::from_toml(&bad).is_err());
        let csv = BASE.replace(
            "kind = \"synthetic\"\nnum_points = 40\ndim = 2\nnum_classes = 2\ncluster_separation = 2.0\nnoise_sigma = 1.0",
            "kind = \"csv\"\npath = \"missing.csv\"",
        );
        let c = RunConfig::from_toml(&csv).unwrap();
        assert!(matches!(c.check_files(), Err(Error::Config { .. })));
    }

    #[test]
    fn adversary_roster_parses() {
        let text = BASE.to_string()
            + "\n[[adversaries]]\nname = \"shadow\"\nnum_shadow = 3\n\n[[adversaries]]\nname = \"constant\"\nvalue = true\n";
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            c.adversaries,
            vec![
                AdversaryConfig::Shadow { num_shadow: 3 },
                AdversaryConfig::Constant { value: true }
            ]
        );
    }
}
