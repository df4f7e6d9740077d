//! Dataset generation, ingestion and target/shadow partitioning.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{DataPoint, Dataset, SensitivityDistribution};
use crate::seed;

/// Gaussian blobs, one per class, centred on the vertices of a scaled simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_points: usize,
    pub dim: usize,
    pub num_classes: usize,
    pub cluster_separation: f64,
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::invalid("num_classes", "need at least two classes"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if self.num_classes > self.dim + 1 {
            return Err(Error::invalid(
                "num_classes",
                "simplex vertices need num_classes <= dim + 1",
            ));
        }
        if self.num_points < 3 * self.num_classes {
            return Err(Error::invalid(
                "num_points",
                format!("need at least 3 * num_classes = {} points", 3 * self.num_classes),
            ));
        }
        if !(self.cluster_separation > 0.0) || !self.cluster_separation.is_finite() {
            return Err(Error::invalid("cluster_separation", "must be positive"));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::invalid("noise_sigma", "must be positive"));
        }
        Ok(())
    }
}

/// Class `k` is centred at the origin for `k = 0` and at `separation * e_{k-1}`
/// otherwise. Point `i` has label `i mod C`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed);
    let rows = (0..spec.num_points)
        .map(|i| {
            let label = i % spec.num_classes;
            let features = (0..spec.dim)
                .map(|j| {
                    let centre = if label > 0 && j == label - 1 {
                        spec.cluster_separation
                    } else {
                        0.0
                    };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    centre + spec.noise_sigma * z
                })
                .collect();
            (features, label)
        })
        .collect();
    Dataset::from_rows(rows, spec.num_classes)
}

/// Writes `label,x0,..,x{d-1}` with a header row.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["label".to_string()];
    header.extend((0..dataset.dim()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for p in dataset.points() {
        let mut row = vec![p.label.to_string()];
        row.extend(p.features.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Csv(e)
    }
}

/// Reads the format of [`write_csv`]: first column `label`, then features.
/// Ids follow row order; the class count is the largest label plus one
/// unless `num_classes` is given.
pub fn load_csv(path: &Path, num_classes: Option<usize>) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("label") {
        return Err(Error::config("dataset.path", "first CSV column must be `label`"));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::config("dataset.path", format!("row {}: {what}", line + 1));
        let label: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| bad("label is not a non-negative integer"))?;
        let features = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("feature is not a number")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((features, label));
    }
    let classes = num_classes.unwrap_or_else(|| rows.iter().map(|r| r.1 + 1).max().unwrap_or(0));
    Dataset::from_rows(rows, classes)
}

/// Reads `id,weight` rows and normalizes nothing: weights must already sum to 1.
pub fn load_sensitivity_csv(path: &Path, n: usize) -> Result<SensitivityDistribution> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut pairs = Vec::new();
    for record in r.records() {
        let record = record?;
        let bad = || Error::config("sensitivity", "rows must be `id,weight`");
        if record.len() != 2 {
            return Err(bad());
        }
        let id: usize = record[0].trim().parse().map_err(|_| bad())?;
        let w: f64 = record[1].trim().parse().map_err(|_| bad())?;
        pairs.push((id, w));
    }
    SensitivityDistribution::from_pairs(n, &pairs)
}

const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::MalformedIdx(format!("{what}: header truncated")))
}

/// Parses an IDX image file into `(rows * cols)`-length pixel vectors in `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let magic = read_u32(bytes, 0, "images")?;
    if magic != IDX_IMAGES {
        return Err(Error::MalformedIdx(format!("images: bad magic {magic:#010x}")));
    }
    let count = read_u32(bytes, 4, "images")? as usize;
    let rows = read_u32(bytes, 8, "images")? as usize;
    let cols = read_u32(bytes, 12, "images")? as usize;
    let width = rows * cols;
    let body = &bytes[16..];
    if body.len() != count * width {
        return Err(Error::MalformedIdx(format!(
            "images: expected {} pixel bytes, found {}",
            count * width,
            body.len()
        )));
    }
    if width == 0 {
        return Err(Error::MalformedIdx("images: zero-sized image".into()));
    }
    Ok(body
        .chunks(width)
        .map(|c| c.iter().map(|&b| b as f64 / 255.0).collect())
        .collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0, "labels")?;
    if magic != IDX_LABELS {
        return Err(Error::MalformedIdx(format!("labels: bad magic {magic:#010x}")));
    }
    let count = read_u32(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::MalformedIdx(format!(
            "labels: expected {count} bytes, found {}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

/// Keeps the points whose label is in `keep_labels`, remapping labels to
/// `0..k` in ascending order of the original label.
pub fn idx_dataset(images: &[u8], labels: &[u8], keep_labels: &BTreeSet<u8>) -> Result<Dataset> {
    if keep_labels.is_empty() {
        return Err(Error::EmptySelection);
    }
    let pixels = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    if pixels.len() != labels.len() {
        return Err(Error::MalformedIdx(format!(
            "{} images but {} labels",
            pixels.len(),
            labels.len()
        )));
    }
    let remap: Vec<u8> = keep_labels.iter().copied().collect();
    let rows: Vec<(Vec<f64>, usize)> = pixels
        .into_iter()
        .zip(labels)
        .filter_map(|(x, l)| remap.binary_search(&l).ok().map(|k| (x, k)))
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptySelection);
    }
    Dataset::from_rows(rows, remap.len())
}

pub fn load_idx_pair(images_path: &Path, labels_path: &Path, keep_labels: &BTreeSet<u8>) -> Result<Dataset> {
    if keep_labels.is_empty() {
        return Err(Error::EmptySelection);
    }
    let images = std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    idx_dataset(&images, &labels, keep_labels)
}

/// Target and shadow parts with their ids in the source dataset.
#[derive(Debug, Clone)]
pub struct Partition {
    pub target: Dataset,
    pub shadow: Dataset,
    /// `target_origin[i]` is the source id of target point `i`.
    pub target_origin: Vec<usize>,
    pub shadow_origin: Vec<usize>,
}

fn reindex(dataset: &Dataset, ids: &[usize]) -> Result<Dataset> {
    let points = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| DataPoint {
            id: i,
            ..dataset.point(id).clone()
        })
        .collect();
    Dataset::new(points, dataset.num_classes())
}

/// Seeded disjoint split; the target part gets `round(fraction * n)` points.
pub fn partition_target_shadow(dataset: &Dataset, fraction: f64, seed_value: u64) -> Result<Partition> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("target_fraction", "must lie in (0, 1)"));
    }
    let n = dataset.len();
    let k = (fraction * n as f64).round() as usize;
    if k == 0 || k == n {
        return Err(Error::invalid(
            "target_fraction",
            format!("leaves an empty part for {n} points"),
        ));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut seed::rng(seed_value));
    let mut target_origin = ids[..k].to_vec();
    let mut shadow_origin = ids[k..].to_vec();
    target_origin.sort_unstable();
    shadow_origin.sort_unstable();
    Ok(Partition {
        target: reindex(dataset, &target_origin)?,
        shadow: reindex(dataset, &shadow_origin)?,
        target_origin,
        shadow_origin,
    })
}

/// Uniform seeded subsample of `size` points, ids re-canonicalized.
pub fn subsample(dataset: &Dataset, size: usize, seed_value: u64) -> Result<Dataset> {
    if size == 0 || size > dataset.len() {
        return Err(Error::invalid(
            "subsample",
            format!("size must lie in 1..={}", dataset.len()),
        ));
    }
    let mut ids: Vec<usize> = (0..dataset.len()).collect();
    ids.shuffle(&mut seed::rng(seed_value));
    let mut keep = ids[..size].to_vec();
    keep.sort_unstable();
    reindex(dataset, &keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{self, LearnerSpec, TrainConfig};

    pub(crate) fn spec(n: usize, sep: f64, noise: f64) -> SyntheticSpec {
        SyntheticSpec {
            num_points: n,
            dim: 2,
            num_classes: 2,
            cluster_separation: sep,
            noise_sigma: noise,
            seed: 3,
        }
    }

    #[test]
    fn separated_blobs_are_learnable() {
        let data = generate_synthetic(&spec(200, 10.0, 0.1)).unwrap();
        let part = partition_target_shadow(&data, 0.5, 1).unwrap();
        let model = learners::train(
            &LearnerSpec::logistic(1e-3),
            part.target.points(),
            2,
            &TrainConfig::full_batch(0.5, 200),
        )
        .unwrap();
        assert!(learners::accuracy(&model, part.shadow.points()).unwrap() >= 0.99);
    }

    #[test]
    fn deterministic_and_balanced() {
        let s = SyntheticSpec {
            num_classes: 3,
            num_points: 31,
            ..spec(31, 2.0, 1.0)
        };
        let a = generate_synthetic(&s).unwrap();
        assert_eq!(a, generate_synthetic(&s).unwrap());
        let counts: Vec<usize> = (0..3)
            .map(|c| a.points().iter().filter(|p| p.label == c).count())
            .collect();
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            generate_synthetic(&spec(4, 1.0, 1.0)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn partition_halves_and_provenance() {
        let data = generate_synthetic(&spec(100, 1.0, 1.0)).unwrap();
        let p = partition_target_shadow(&data, 0.5, 9).unwrap();
        assert_eq!((p.target.len(), p.shadow.len()), (50, 50));
        let mut all: Vec<usize> = p.target_origin.iter().chain(&p.shadow_origin).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        for (i, &o) in p.target_origin.iter().enumerate() {
            assert_eq!(p.target.point(i).features, data.point(o).features);
        }
        let q = partition_target_shadow(&data, 0.5, 9).unwrap();
        assert_eq!(p.target_origin, q.target_origin);
        assert!(partition_target_shadow(&data, 1.0, 9).is_err());
    }

    fn idx_images(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = IDX_IMAGES.to_be_bytes().to_vec();
        for v in [count, rows, cols] {
            b.extend(v.to_be_bytes());
        }
        b.extend(pixels);
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = IDX_LABELS.to_be_bytes().to_vec();
        b.extend((labels.len() as u32).to_be_bytes());
        b.extend(labels);
        b
    }

    #[test]
    fn idx_filter_and_remap() {
        let images = idx_images(4, 1, 2, &[0, 255, 10, 20, 30, 40, 255, 0]);
        let labels = idx_labels(&[8, 1, 3, 8]);
        let keep: BTreeSet<u8> = [3, 8].into_iter().collect();
        let d = idx_dataset(&images, &labels, &keep).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.point(0).label, 1);
        assert_eq!(d.point(0).features, vec![0.0, 1.0]);
        assert_eq!(d.point(1).label, 0);
        assert_eq!(d.point(2).label, 1);
    }

    #[test]
    fn idx_errors() {
        let images = idx_images(2, 1, 2, &[0, 1, 2]);
        let labels = idx_labels(&[3, 8]);
        let keep: BTreeSet<u8> = [3].into_iter().collect();
        assert!(matches!(
            idx_dataset(&images, &labels, &keep),
            Err(Error::MalformedIdx(_))
        ));
        let good = idx_images(2, 1, 2, &[0, 1, 2, 3]);
        assert!(matches!(
            idx_dataset(&good, &labels, &BTreeSet::new()),
            Err(Error::EmptySelection)
        ));
        assert!(matches!(
            idx_dataset(&labels, &good, &keep),
            Err(Error::MalformedIdx(_))
        ));
        let none: BTreeSet<u8> = [5].into_iter().collect();
        assert!(matches!(idx_dataset(&good, &labels, &none), Err(Error::EmptySelection)));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let data = generate_synthetic(&spec(12, 2.0, 0.5)).unwrap();
        write_csv(&data, &path).unwrap();
        assert_eq!(load_csv(&path, None).unwrap(), data);
    }
}
