//! The combinatorial substrate of the game: datasets, sensitivity
//! distributions, the split space for a given unlearning portion, swap
//! pairing and the random oracle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;

/// A labeled feature vector with a stable id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub id: usize,
    pub features: Vec<f64>,
    pub label: usize,
}

/// The finite universe of the game. Ids are exactly `0..len()` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<DataPoint>,
    num_classes: usize,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset from `(features, label)` rows, assigning ids in order.
    pub fn from_rows(rows: Vec<(Vec<f64>, usize)>, num_classes: usize) -> Result<Self> {
        let points = rows
            .into_iter()
            .enumerate()
            .map(|(id, (features, label))| DataPoint { id, features, label })
            .collect();
        Self::new(points, num_classes)
    }

    pub fn new(points: Vec<DataPoint>, num_classes: usize) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Precondition("dataset must be nonempty".into()))?;
        if num_classes == 0 {
            return Err(Error::invalid("num_classes", "must be positive"));
        }
        let dim = first.features.len();
        for (i, p) in points.iter().enumerate() {
            if p.id != i {
                return Err(Error::invalid("id", format!("expected id {i}, found {}", p.id)));
            }
            if p.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.features.len(),
                });
            }
            if p.label >= num_classes {
                return Err(Error::invalid(
                    "label",
                    format!("label {} out of range for {num_classes} classes", p.label),
                ));
            }
            if p.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("features", format!("non-finite value at id {i}")));
            }
        }
        Ok(Dataset {
            points,
            num_classes,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> &DataPoint {
        &self.points[id]
    }

    /// Clones the points with the given ids, in the given order.
    pub fn subset(&self, ids: &[usize]) -> Vec<DataPoint> {
        ids.iter().map(|&id| self.points[id].clone()).collect()
    }
}

/// Unlearning portion `|F| / |R ∪ F|`, kept as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alpha(Ratio<u64>);

impl Alpha {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer >= denom {
            return Err(Error::invalid("alpha", format!("{numer}/{denom} is not in (0, 1)")));
        }
        Ok(Alpha(Ratio::new(numer, denom)))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn as_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q` or a finite decimal such as `0.1`, both read exactly.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid("alpha", format!("cannot parse `{s}`"));
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|_| bad())?;
            let q = q.trim().parse::<u64>().map_err(|_| bad())?;
            return Alpha::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10u64.pow(frac.len() as u32);
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let numer = int
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        Alpha::new(numer, scale)
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Solves `r + 2t = n`, `t / (r + t) = alpha` in integers.
pub fn split_sizes(n: usize, alpha: Alpha) -> Result<(usize, usize)> {
    let non_integral = || Error::NonIntegralSplit {
        n,
        alpha: alpha.to_string(),
    };
    if n < 3 {
        return Err(non_integral());
    }
    // t = p n / (p + q), r = n - 2t
    let (p, q) = (alpha.numer() as u128, alpha.denom() as u128);
    let num = p * n as u128;
    let den = p + q;
    if !num.is_multiple_of(den) {
        return Err(non_integral());
    }
    let t = (num / den) as usize;
    if t == 0 || 2 * t >= n {
        return Err(non_integral());
    }
    Ok((n - 2 * t, t))
}

/// `n! / (r! t! t!)`, the size of the split space.
pub fn split_space_size(n: usize, alpha: Alpha) -> Result<BigUint> {
    let (_, t) = split_sizes(n, alpha)?;
    Ok(binomial(n, t) * binomial(n - t, t))
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// An ordered `(retain, forget, test)` triple. Each set is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Split {
    retain: Vec<usize>,
    forget: Vec<usize>,
    test: Vec<usize>,
    alpha: Alpha,
}

impl Split {
    /// Validates the sets against a universe of `n` ids.
    pub fn new(n: usize, retain: Vec<usize>, forget: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        let mut retain = retain;
        let mut forget = forget;
        let mut test = test;
        retain.sort_unstable();
        forget.sort_unstable();
        test.sort_unstable();
        if forget.len() != test.len() {
            return Err(Error::invalid("split", "|F| must equal |T|"));
        }
        if forget.is_empty() || retain.is_empty() {
            return Err(Error::invalid("split", "retain and forget sets must be nonempty"));
        }
        let mut seen = vec![false; n];
        for &id in retain.iter().chain(&forget).chain(&test) {
            if id >= n || seen[id] {
                return Err(Error::invalid("split", format!("id {id} out of range or repeated")));
            }
            seen[id] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("split", "sets do not cover the dataset"));
        }
        let alpha = Alpha::new(forget.len() as u64, (retain.len() + forget.len()) as u64)?;
        Ok(Split {
            retain,
            forget,
            test,
            alpha,
        })
    }

    fn from_parts_unchecked(retain: Vec<usize>, forget: Vec<usize>, test: Vec<usize>, alpha: Alpha) -> Self {
        Split {
            retain,
            forget,
            test,
            alpha,
        }
    }

    pub fn retain(&self) -> &[usize] {
        &self.retain
    }

    pub fn forget(&self) -> &[usize] {
        &self.forget
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.retain.len() + 2 * self.forget.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The set the oracle samples from for `bit` (F for 0, T for 1).
    pub fn selected(&self, bit: Bit) -> &[usize] {
        match bit {
            Bit::Zero => &self.forget,
            Bit::One => &self.test,
        }
    }

    /// Sorted `R ∪ F`, the original training set.
    pub fn train_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.retain.iter().chain(&self.forget).copied().collect();
        ids.sort_unstable();
        ids
    }

    /// Stable 64-bit identifier of the split (depends on F and T).
    pub fn digest(&self) -> u64 {
        let mut ids = Vec::with_capacity(2 * self.forget.len() + 1);
        ids.extend_from_slice(&self.forget);
        ids.push(usize::MAX);
        ids.extend_from_slice(&self.test);
        seed::id_set_digest("split", &ids)
    }

    /// `(R, T, F)`.
    pub fn swap(&self) -> Split {
        Split::from_parts_unchecked(self.retain.clone(), self.test.clone(), self.forget.clone(), self.alpha)
    }
}

pub fn swap(split: &Split) -> Split {
    split.swap()
}

/// Lexicographic successor of a sorted k-combination of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Iterator over the whole split space, lexicographic in (sorted F, sorted T).
pub struct SplitIter {
    n: usize,
    t: usize,
    alpha: Alpha,
    forget: Vec<usize>,
    // positions into `rest` (the complement of `forget`)
    test_pos: Vec<usize>,
    rest: Vec<usize>,
    done: bool,
}

impl SplitIter {
    fn rest_of(n: usize, forget: &[usize]) -> Vec<usize> {
        let mut in_f = vec![false; n];
        for &id in forget {
            in_f[id] = true;
        }
        (0..n).filter(|&i| !in_f[i]).collect()
    }
}

impl Iterator for SplitIter {
    type Item = Split;

    fn next(&mut self) -> Option<Split> {
        if self.done {
            return None;
        }
        let test: Vec<usize> = self.test_pos.iter().map(|&p| self.rest[p]).collect();
        let mut in_t = vec![false; self.n];
        for &id in &test {
            in_t[id] = true;
        }
        let retain: Vec<usize> = self.rest.iter().copied().filter(|&id| !in_t[id]).collect();
        let split = Split::from_parts_unchecked(retain, self.forget.clone(), test, self.alpha);

        if !next_combination(&mut self.test_pos, self.rest.len()) {
            if next_combination(&mut self.forget, self.n) {
                self.rest = Self::rest_of(self.n, &self.forget);
                self.test_pos = (0..self.t).collect();
            } else {
                self.done = true;
            }
        }
        Some(split)
    }
}

/// Every element of the split space exactly once, in canonical order.
pub fn enumerate_splits(n: usize, alpha: Alpha) -> Result<SplitIter> {
    let (_, t) = split_sizes(n, alpha)?;
    let forget: Vec<usize> = (0..t).collect();
    let rest = SplitIter::rest_of(n, &forget);
    Ok(SplitIter {
        n,
        t,
        alpha,
        forget,
        test_pos: (0..t).collect(),
        rest,
        done: false,
    })
}

/// Uniform draw from the split space: shuffle ids, then slice F, T, R.
pub fn sample_split(n: usize, alpha: Alpha, seed: u64) -> Result<Split> {
    let (_, t) = split_sizes(n, alpha)?;
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut seed::rng(seed));
    let mut forget = ids[..t].to_vec();
    let mut test = ids[t..2 * t].to_vec();
    let mut retain = ids[2 * t..].to_vec();
    forget.sort_unstable();
    test.sort_unstable();
    retain.sort_unstable();
    Ok(Split::from_parts_unchecked(retain, forget, test, alpha))
}

/// The oracle's secret bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_bool(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

/// Non-negative weights over dataset ids, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityDistribution {
    weights: Vec<f64>,
}

impl SensitivityDistribution {
    pub fn uniform(n: usize) -> Self {
        SensitivityDistribution {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Dense weights indexed by id.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("sensitivity", "no weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("sensitivity", "weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("sensitivity", format!("weights sum to {total}, not 1")));
        }
        Ok(SensitivityDistribution { weights })
    }

    /// Sparse `(id, weight)` pairs; missing ids get weight zero.
    pub fn from_pairs(n: usize, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut weights = vec![0.0; n];
        for &(id, w) in pairs {
            if id >= n {
                return Err(Error::invalid("sensitivity", format!("id {id} not in dataset")));
            }
            weights[id] += w;
        }
        Self::new(weights)
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.weights[id]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The random oracle `O_s(b)`.
#[derive(Debug, Clone, Copy)]
pub struct Oracle<'a> {
    pub split: &'a Split,
    pub bit: Bit,
    pub sensitivity: &'a SensitivityDistribution,
}

impl<'a> Oracle<'a> {
    pub fn new(split: &'a Split, bit: Bit, sensitivity: &'a SensitivityDistribution) -> Self {
        Oracle {
            split,
            bit,
            sensitivity,
        }
    }

    /// The sensitivity distribution restricted to the selected set and
    /// renormalized. Entries are `(id, probability)` in ascending id order.
    pub fn mass(&self) -> Result<Vec<(usize, f64)>> {
        let ids = self.split.selected(self.bit);
        let total: f64 = ids.iter().map(|&id| self.sensitivity.weight(id)).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateOracle);
        }
        Ok(ids
            .iter()
            .map(|&id| (id, self.sensitivity.weight(id) / total))
            .collect())
    }

    /// One draw, deterministic given the rng state. Draws are i.i.d.
    pub fn draw_id(&self, rng: &mut seed::Rng) -> Result<usize> {
        let mass = self.mass()?;
        Ok(draw_from_mass(&mass, rng))
    }
}

pub(crate) fn draw_from_mass(mass: &[(usize, f64)], rng: &mut seed::Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = mass[0].0;
    for &(id, p) in mass {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = id;
        if u < acc {
            return id;
        }
    }
    last
}

pub fn oracle_mass(oracle: &Oracle<'_>) -> Result<Vec<(usize, f64)>> {
    oracle.mass()
}

pub fn oracle_draw<'d>(oracle: &Oracle<'_>, dataset: &'d Dataset, seed: u64) -> Result<&'d DataPoint> {
    let id = oracle.draw_id(&mut seed::rng(seed))?;
    Ok(dataset.point(id))
}
