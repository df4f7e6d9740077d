//! Report documents: JSON, per-split CSV and the summary table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::engine::AdvantageReport;
use crate::error::{Error, Result};

pub const DOCUMENT_FORMAT: &str = "usi-report";
pub const DOCUMENT_VERSION: u32 = 1;

/// Everything a run emits, in one serializable document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub format: String,
    pub version: u32,
    pub config_digest: String,
    pub config: RunConfig,
    pub target_size: usize,
    pub shadow_size: usize,
    pub reports: Vec<AdvantageReport>,
}

impl RunDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RunDocument = serde_json::from_str(text)?;
        if doc.format != DOCUMENT_FORMAT || doc.version != DOCUMENT_VERSION {
            return Err(Error::config(
                "format",
                format!(
                    "expected {DOCUMENT_FORMAT} version {DOCUMENT_VERSION}, found {} version {}",
                    doc.format, doc.version
                ),
            ));
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// One row per (method, adversary, split).
pub fn splits_csv(doc: &RunDocument) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "adversary",
        "estimator",
        "index",
        "role",
        "forget",
        "test",
        "signed_value",
        "accept_rate_b0",
        "accept_rate_b1",
        "num_models",
        "num_plays",
    ])?;
    for report in &doc.reports {
        for adv in &report.adversaries {
            for row in &adv.splits {
                w.write_record([
                    report.method.clone(),
                    adv.adversary.clone(),
                    adv.estimator.clone(),
                    row.index.to_string(),
                    row.role.clone(),
                    join_ids(&row.forget),
                    join_ids(&row.test),
                    row.signed_value.to_string(),
                    row.accept_rate_b0.to_string(),
                    row.accept_rate_b1.to_string(),
                    row.num_models.to_string(),
                    row.num_plays.map(|p| p.to_string()).unwrap_or_default(),
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Precondition(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Methods as rows, adversaries as columns, then `Q` and the certified bound.
pub fn render_summary(doc: &RunDocument) -> String {
    let mut out = String::new();
    let c = &doc.config;
    let _ = writeln!(out, "config digest  {}", doc.config_digest);
    let _ = writeln!(
        out,
        "target {} / shadow {} points, alpha {}, estimator {}, {} models per split, seed {}",
        doc.target_size, doc.shadow_size, c.alpha, c.estimator, c.models_per_split, c.master_seed
    );
    out.push('\n');
    let names: Vec<String> = doc
        .reports
        .first()
        .map(|r| r.adversaries.iter().map(|a| a.adversary.clone()).collect())
        .unwrap_or_default();
    let method_width = doc.reports.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
    let col = 17;
    let _ = write!(out, "{:<method_width$}", "method");
    for n in &names {
        let _ = write!(out, "  {n:>col$}");
    }
    let _ = writeln!(out, "  {:>7}  {:>7}", "Q", "bound");
    for r in &doc.reports {
        let _ = write!(out, "{:<method_width$}", r.method);
        for a in &r.adversaries {
            let cell = match a.standard_error {
                Some(se) => format!("{:.4} ± {:.4}", a.value, se),
                None => format!("{:.4}", a.value),
            };
            let _ = write!(out, "  {cell:>col$}");
        }
        let bound = r
            .certified_bound
            .map(|b| format!("{b:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "  {:>7.3}  {:>7}", r.unlearning_quality, bound);
    }
    for r in &doc.reports {
        if let Some(l) = &r.ledger {
            let eps = l
                .max_epsilon_consumed
                .map(|e| format!("{e:.4}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "\n{}: {} removals, {} fell back to retraining, max residual {:.3e} (budget {:.3e}), max epsilon consumed {}",
                r.method, l.models, l.retrain_triggered, l.max_residual_norm, l.budget, eps
            );
        }
    }
    out
}

/// Paths of the files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub report: PathBuf,
    pub splits: PathBuf,
    pub summary: PathBuf,
}

pub fn write_outputs(doc: &RunDocument, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = OutputPaths {
        report: dir.join("report.json"),
        splits: dir.join("splits.csv"),
        summary: dir.join("summary.txt"),
    };
    let write = |p: &Path, body: String| std::fs::write(p, body).map_err(|e| Error::io(p, e));
    write(&paths.report, doc.to_json())?;
    write(&paths.splits, splits_csv(doc)?)?;
    write(&paths.summary, render_summary(doc))?;
    Ok(paths)
}
