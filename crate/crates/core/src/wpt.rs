//! Two-level orthonormal Haar wavelet packet decomposition.
//!
//! ```text
//!                 y[n]
//!             /          \
//!        g, ↓2            h, ↓2
//!        /    \          /     \
//!    g,↓2    h,↓2     g,↓2    h,↓2
//!     a1      d1       a2      d2
//! ```
//!
//! Unlike a DWT, the detail branch is split again, so the level-2 result is
//! four equal-width packets. With the `1/√2` normalization the transform is
//! orthogonal and the packets carry the input energy exactly.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// The four level-2 packets. `a1`/`d1` come from the low-pass branch and
/// `a2`/`d2` from the high-pass branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSet {
    pub a1: Vec<f64>,
    pub d1: Vec<f64>,
    pub a2: Vec<f64>,
    pub d2: Vec<f64>,
}

impl PacketSet {
    pub const NAMES: [&'static str; 4] = ["a1", "d1", "a2", "d2"];

    /// Packets in `a1, d1, a2, d2` order.
    pub fn packets(&self) -> [&[f64]; 4] {
        [&self.a1, &self.d1, &self.a2, &self.d2]
    }

    pub fn packet_len(&self) -> usize {
        self.a1.len()
    }

    pub fn energy(&self) -> f64 {
        self.packets()
            .iter()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>())
            .sum()
    }
}

/// One analysis step: pairwise scaled sum and difference, decimated by two.
/// A trailing odd sample is dropped.
pub fn haar_step(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() < 2 {
        return Err(Error::TooShort { len: x.len(), min: 2 });
    }
    let (approx, detail) = x
        .chunks_exact(2)
        .map(|p| ((p[0] + p[1]) * FRAC_1_SQRT_2, (p[0] - p[1]) * FRAC_1_SQRT_2))
        .unzip();
    Ok((approx, detail))
}

pub fn wpt2_samples(samples: &[f64]) -> Result<PacketSet> {
    if samples.len() < 4 {
        return Err(Error::TooShort {
            len: samples.len(),
            min: 4,
        });
    }
    let (low, high) = haar_step(samples)?;
    let (a1, d1) = haar_step(&low)?;
    let (a2, d2) = haar_step(&high)?;
    Ok(PacketSet { a1, d1, a2, d2 })
}

pub fn wpt2(signal: &Signal) -> Result<PacketSet> {
    wpt2_samples(signal.samples())
}
