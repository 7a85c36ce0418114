//! Local outlier factor in novelty mode.
//!
//! The model is fitted on recognized fingerprints only. A query is compared
//! against the training points and never joins the reference set, so scoring
//! is a read-only operation on an immutable model.
//!
//! Definitions, for training points `p, o` and distance `d`:
//!
//! * `kdist(p)`: distance from `p` to its k-th nearest other training point.
//! * `N_k(p)`: every other training point within `kdist(p)`; ties can make
//!   this larger than `k`.
//! * `reach(p, o) = max(kdist(o), d(p, o))`.
//! * `lrd(p) = 1 / (mean_{o ∈ N_k(p)} reach(p, o) + ε)` with `ε = 1e-10`.
//! * `LOF(x) = mean_{o ∈ N_k(x)} lrd(o) / lrd(x)`.
//!
//! Neighbor search is exact brute force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Added to the mean reachability distance so duplicate-heavy data keeps a
/// finite density.
pub const LRD_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Manhattan,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(self.distance_unchecked(a, b))
    }

    #[inline]
    fn distance_unchecked(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "manhattan" => Ok(Metric::Manhattan),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Manhattan => "manhattan",
            Metric::Euclidean => "euclidean",
        })
    }
}

/// Sum of absolute coordinate differences.
pub fn manhattan(a: &[f64], b: &[f64]) -> Result<f64> {
    Metric::Manhattan.distance(a, b)
}

/// Inlier/outlier decision. `Outlier` is the positive (UAV) class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detection {
    Inlier,
    Outlier,
}

impl Detection {
    pub fn as_str(self) -> &'static str {
        match self {
            Detection::Inlier => "inlier",
            Detection::Outlier => "outlier",
        }
    }
}

/// Hyperparameters for [`LofModel::fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LofConfig {
    pub k: usize,
    pub metric: Metric,
    /// Scores strictly above this are outliers.
    pub threshold: f64,
    /// z-score every column with the training mean and standard deviation.
    pub standardize: bool,
}

impl Default for LofConfig {
    fn default() -> Self {
        LofConfig {
            k: 100,
            metric: Metric::Manhattan,
            threshold: 1.5,
            standardize: true,
        }
    }
}

/// Per-column affine map `x ↦ (x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn identity(dim: usize) -> Self {
        Scaler {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Population mean and standard deviation per column. Constant columns
    /// get scale 1.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut scale = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scale {
            *s = (*s / n).sqrt();
            if !(*s > 0.0 && s.is_finite()) {
                *s = 1.0;
            }
        }
        Scaler { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// A fitted, immutable LOF novelty detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofModel {
    k: usize,
    metric: Metric,
    threshold: f64,
    scaler: Scaler,
    /// Training rows after scaling.
    train: Vec<Vec<f64>>,
    kdist: Vec<f64>,
    lrd: Vec<f64>,
}

/// Distances from one point to every training row, plus the k-distance
/// neighborhood they induce.
struct Neighborhood {
    kdist: f64,
    /// (training index, distance)
    members: Vec<(usize, f64)>,
}

/// `skip` excludes a training point from its own neighborhood.
fn neighborhood(
    metric: Metric,
    train: &[Vec<f64>],
    x: &[f64],
    k: usize,
    skip: Option<usize>,
) -> Neighborhood {
    let dists: Vec<(usize, f64)> = train
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, row)| (j, metric.distance_unchecked(x, row)))
        .collect();
    let mut sorted: Vec<f64> = dists.iter().map(|&(_, d)| d).collect();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    let kdist = *kth;
    let members = dists.into_iter().filter(|&(_, d)| d <= kdist).collect();
    Neighborhood { kdist, members }
}

fn local_density(members: &[(usize, f64)], kdist: &[f64]) -> f64 {
    let total: f64 = members.iter().map(|&(j, d)| d.max(kdist[j])).sum();
    1.0 / (total / members.len() as f64 + LRD_EPSILON)
}

fn check_row(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    Ok(())
}

impl LofModel {
    /// Fits on `train`, which must contain recognized fingerprints only.
    pub fn fit(train: &[Vec<f64>], cfg: &LofConfig) -> Result<Self> {
        Self::fit_with(train, cfg, Exec::Sequential)
    }

    pub fn fit_with(train: &[Vec<f64>], cfg: &LofConfig, exec: Exec) -> Result<Self> {
        let k = cfg.k;
        if k == 0 || train.len() <= k {
            return Err(Error::NotEnoughTrainingData {
                rows: train.len(),
                k,
            });
        }
        if !cfg.threshold.is_finite() {
            return Err(Error::Config(format!("threshold must be finite, got {}", cfg.threshold)));
        }
        let dim = train[0].len();
        if dim == 0 {
            return Err(Error::Shape("zero-dimensional features".into()));
        }
        for row in train {
            check_row(row, dim)?;
        }
        let scaler = if cfg.standardize {
            Scaler::fit(train)
        } else {
            Scaler::identity(dim)
        };
        let scaled: Vec<Vec<f64>> = train.iter().map(|r| scaler.transform(r)).collect();

        let hoods: Vec<Neighborhood> = exec.map_indexed(scaled.len(), |i| {
            neighborhood(cfg.metric, &scaled, &scaled[i], k, Some(i))
        });
        let kdist: Vec<f64> = hoods.iter().map(|h| h.kdist).collect();
        let lrd: Vec<f64> = exec.map(&hoods, |h| local_density(&h.members, &kdist));

        Ok(LofModel {
            k,
            metric: cfg.metric,
            threshold: cfg.threshold,
            scaler,
            train: scaled,
            kdist,
            lrd,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    pub fn n_train(&self) -> usize {
        self.train.len()
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn kdist(&self) -> &[f64] {
        &self.kdist
    }

    pub fn lrd(&self) -> &[f64] {
        &self.lrd
    }

    /// Same fitted state with a different decision threshold.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Local outlier factor of `x` against the training set.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_row(x, self.dim())?;
        let q = self.scaler.transform(x);
        let hood = neighborhood(self.metric, &self.train, &q, self.k, None);
        let lrd_x = local_density(&hood.members, &self.kdist);
        let mean_lrd = hood.members.iter().map(|&(j, _)| self.lrd[j]).sum::<f64>()
            / hood.members.len() as f64;
        Ok(mean_lrd / lrd_x)
    }

    /// `Outlier` iff the score is strictly above the threshold.
    pub fn classify(&self, x: &[f64]) -> Result<Detection> {
        Ok(self.decide(self.score(x)?))
    }

    pub fn decide(&self, score: f64) -> Detection {
        if score > self.threshold {
            Detection::Outlier
        } else {
            Detection::Inlier
        }
    }

    pub fn score_batch(&self, xs: &[Vec<f64>], exec: Exec) -> Result<Vec<f64>> {
        exec.try_map(xs, |x| self.score(x))
    }

    pub fn classify_batch(&self, xs: &[Vec<f64>], exec: Exec) -> Result<Vec<Detection>> {
        Ok(self
            .score_batch(xs, exec)?
            .into_iter()
            .map(|s| self.decide(s))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PersistedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: PersistedModel = serde_json::from_str(text)?;
        if p.format != MODEL_FORMAT || p.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model document {} v{}",
                p.format, p.version
            )));
        }
        p.model.validate()?;
        Ok(p.model)
    }

    fn validate(&self) -> Result<()> {
        let n = self.train.len();
        let dim = self.scaler.mean.len();
        if self.scaler.scale.len() != dim || self.kdist.len() != n || self.lrd.len() != n {
            return Err(Error::Shape("model arrays have inconsistent lengths".into()));
        }
        if self.k == 0 || n <= self.k {
            return Err(Error::NotEnoughTrainingData { rows: n, k: self.k });
        }
        for row in &self.train {
            check_row(row, dim)?;
        }
        if self.lrd.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NonFiniteFeature);
        }
        Ok(())
    }
}

const MODEL_FORMAT: &str = "uavsense-lof";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PersistedModel {
    format: String,
    version: u32,
    model: LofModel,
}
