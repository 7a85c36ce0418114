//! RF burst fingerprinting and semi-supervised UAV controller detection.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`signal`]: sampled bursts, AWGN injection and an energy-threshold
//!    trigger that cuts a fixed-length transient out of each capture.
//! 2. [`wpt`]: a two-level orthonormal Haar wavelet packet decomposition
//!    into the packets `a1, d1, a2, d2`.
//! 3. [`features`]: eleven statistics per packet, and the four packet
//!    variances used as the fingerprint.
//! 4. [`lof`]: a local outlier factor model fitted on recognized
//!    (WiFi/Bluetooth) fingerprints only; UAV controller bursts score as
//!    outliers.
//!
//! [`synth`] stands in for hardware captures with a seeded synthetic corpus,
//! and [`eval`] computes detection metrics and the neighbor-count and SNR
//! sweeps. Batch work goes through [`exec`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod error;
pub mod eval;
pub mod exec;
pub mod features;
pub mod io;
pub mod lof;
pub mod pipeline;
pub mod seed;
pub mod signal;
pub mod synth;
pub mod wpt;

pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, Metrics, SweepRow, SweepTable};
pub use exec::Exec;
pub use features::{FeatureVector, PacketStats};
pub use lof::{Detection, LofConfig, LofModel, Metric};
pub use signal::{Signal, SignalClass, TriggerConfig};
pub use synth::{CorpusConfig, DeviceKind, DeviceProfile};
pub use wpt::PacketSet;
