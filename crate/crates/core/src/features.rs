//! Per-packet statistics and the packet-variance fingerprint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wpt::PacketSet;

/// Eleven descriptive statistics of one packet's coefficients.
///
/// Moment conventions: `variance` uses the `n - 1` denominator (0 for a
/// single coefficient); `skewness = m3 / m2^1.5` and `kurtosis = m4 / m2^2`
/// (non-excess) use population central moments and are 0 when `m2 = 0`.
/// `mean_root` is the square mean root `(Σ√|x| / n)²`. `entropy` is the
/// base-2 Shannon entropy of the normalized coefficient energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketStats {
    pub mean: f64,
    pub std_dev: f64,
    pub mean_root: f64,
    pub abs_mean: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub variance: f64,
    pub entropy: f64,
    pub peak: f64,
    pub range: f64,
    pub abs_peak: f64,
}

impl PacketStats {
    pub const NAMES: [&'static str; 11] = [
        "mean",
        "std_dev",
        "mean_root",
        "abs_mean",
        "skewness",
        "kurtosis",
        "variance",
        "entropy",
        "peak",
        "range",
        "abs_peak",
    ];

    /// Position of `variance` within [`PacketStats::NAMES`].
    pub const VARIANCE_INDEX: usize = 6;

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.mean,
            self.std_dev,
            self.mean_root,
            self.abs_mean,
            self.skewness,
            self.kurtosis,
            self.variance,
            self.entropy,
            self.peak,
            self.range,
            self.abs_peak,
        ]
    }
}

/// Number of columns in a full statistics row: 11 statistics × 4 packets.
pub const STAT_COLUMNS: usize = 44;

/// Column names for the 44-statistic row, packet-major then statistic-minor:
/// `a1_mean, a1_std_dev, …, a1_abs_peak, d1_mean, …, d2_abs_peak`.
pub fn stat_column_names() -> Vec<String> {
    PacketSet::NAMES
        .iter()
        .flat_map(|p| PacketStats::NAMES.iter().map(move |s| format!("{p}_{s}")))
        .collect()
}

/// Column indices of the four packet variances in the 44-statistic row.
pub fn variance_columns() -> [usize; 4] {
    [0, 1, 2, 3].map(|p| p * PacketStats::NAMES.len() + PacketStats::VARIANCE_INDEX)
}

/// Sample variance with the `n - 1` denominator; 0 for a single value.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

pub fn packet_stats(packet: &[f64]) -> Result<PacketStats> {
    if packet.is_empty() {
        return Err(Error::EmptyPacket);
    }
    let n = packet.len() as f64;
    let mean = packet.iter().sum::<f64>() / n;
    let variance = sample_variance(packet);

    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in packet {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };

    let abs_mean = packet.iter().map(|x| x.abs()).sum::<f64>() / n;
    let mean_root = (packet.iter().map(|x| x.abs().sqrt()).sum::<f64>() / n).powi(2);

    let energy: f64 = packet.iter().map(|x| x * x).sum();
    let entropy = if energy > 0.0 {
        let h = -packet
            .iter()
            .map(|x| x * x / energy)
            .filter(|&p| p > 0.0)
            .map(|p| p * p.log2())
            .sum::<f64>();
        h.max(0.0)
    } else {
        0.0
    };

    let max = packet.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = packet.iter().copied().fold(f64::INFINITY, f64::min);
    let abs_peak = packet.iter().map(|x| x.abs()).fold(0.0, f64::max);

    Ok(PacketStats {
        mean,
        std_dev: variance.sqrt(),
        mean_root,
        abs_mean,
        skewness,
        kurtosis,
        variance,
        entropy,
        peak: max,
        range: max - min,
        abs_peak,
    })
}

/// The four-packet fingerprint: sample variances of `a1, d1, a2, d2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
}

impl FeatureVector {
    pub const DIM: usize = 4;
    pub const NAMES: [&'static str; 4] = ["sigma1", "sigma2", "sigma3", "sigma4"];

    pub fn new(sigma: [f64; 4]) -> Result<Self> {
        if sigma.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFiniteFeature);
        }
        Ok(Self::from_array_unchecked(sigma))
    }

    fn from_array_unchecked([sigma1, sigma2, sigma3, sigma4]: [f64; 4]) -> Self {
        FeatureVector {
            sigma1,
            sigma2,
            sigma3,
            sigma4,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.sigma1, self.sigma2, self.sigma3, self.sigma4]
    }
}

pub fn feature_vector(p: &PacketSet) -> Result<FeatureVector> {
    let mut sigma = [0.0; 4];
    for (s, packet) in sigma.iter_mut().zip(p.packets()) {
        if packet.is_empty() {
            return Err(Error::EmptyPacket);
        }
        *s = sample_variance(packet);
    }
    FeatureVector::new(sigma)
}

/// All 44 statistics of a packet set, in [`stat_column_names`] order.
pub fn stat_row(p: &PacketSet) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(STAT_COLUMNS);
    for packet in p.packets() {
        row.extend(packet_stats(packet)?.to_array());
    }
    Ok(row)
}

/// Ranks the 44 statistic columns by their across-signal sample variance,
/// largest first; ties go to the lower column index.
pub fn rank_features(matrix: &[Vec<f64>]) -> Result<Vec<usize>> {
    if matrix.len() < 2 {
        return Err(Error::Shape(format!(
            "ranking needs at least 2 rows, got {}",
            matrix.len()
        )));
    }
    if let Some((i, row)) = matrix.iter().enumerate().find(|(_, r)| r.len() != STAT_COLUMNS) {
        return Err(Error::Shape(format!(
            "row {i} has {} columns, expected {STAT_COLUMNS}",
            row.len()
        )));
    }
    let spread: Vec<f64> = (0..STAT_COLUMNS)
        .map(|c| {
            let column: Vec<f64> = matrix.iter().map(|r| r[c]).collect();
            sample_variance(&column)
        })
        .collect();
    if spread.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFiniteFeature);
    }
    let mut order: Vec<usize> = (0..STAT_COLUMNS).collect();
    order.sort_by(|&a, &b| spread[b].total_cmp(&spread[a]).then(a.cmp(&b)));
    Ok(order)
}
