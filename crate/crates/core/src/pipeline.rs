//! Burst → transient → packets → fingerprint.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::features::{feature_vector, stat_row, FeatureVector};
use crate::signal::{extract_transient, Signal, SignalClass, TriggerConfig};
use crate::synth::Labeled;
use crate::wpt::wpt2;

/// A fingerprint with the metadata of the burst it came from. One row of the
/// feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub device_id: String,
    pub class: SignalClass,
    pub snr_db: Option<f64>,
    pub x: FeatureVector,
}

impl FeatureRecord {
    pub fn row(&self) -> Vec<f64> {
        self.x.to_array().to_vec()
    }
}

impl Labeled for FeatureRecord {
    fn label(&self) -> SignalClass {
        self.class
    }
}

pub fn fingerprint(signal: &Signal, trigger: &TriggerConfig) -> Result<FeatureVector> {
    let transient = extract_transient(signal, trigger)?;
    feature_vector(&wpt2(&transient)?)
}

pub fn record(signal: &Signal, trigger: &TriggerConfig) -> Result<FeatureRecord> {
    Ok(FeatureRecord {
        device_id: signal.device_id().to_string(),
        class: signal.class(),
        snr_db: signal.snr_db(),
        x: fingerprint(signal, trigger)?,
    })
}

/// All 44 packet statistics of a burst's transient.
pub fn full_stats(signal: &Signal, trigger: &TriggerConfig) -> Result<Vec<f64>> {
    let transient = extract_transient(signal, trigger)?;
    stat_row(&wpt2(&transient)?)
}

pub fn records(signals: &[Signal], trigger: &TriggerConfig, exec: Exec) -> Result<Vec<FeatureRecord>> {
    exec.try_map(signals, |s| record(s, trigger))
}

/// Feature rows for fitting. Refuses any UAV-labelled record.
pub fn training_rows(records: &[FeatureRecord]) -> Result<Vec<Vec<f64>>> {
    let count = records.iter().filter(|r| r.class == SignalClass::Uav).count();
    if count > 0 {
        return Err(Error::UavInTraining { count });
    }
    Ok(records.iter().map(FeatureRecord::row).collect())
}
