//! Seeded synthetic burst corpus.
//!
//! Each device profile produces bursts made of a quiet lead-in, an amplitude
//! ramp (the transient onset) and a steady-state modulated carrier:
//!
//! * `BluetoothLike`: narrowband, phase-continuous FSK that hops between a
//!   few channels around the carrier.
//! * `WifiLike`: wideband multi-tone bursts whose tone phases change every
//!   symbol.
//! * `UavControllerLike`: hopped FSK with faster hops, its own band plan and a
//!   much sharper ramp.
//!
//! Frequencies are normalized to the sample rate (cycles per sample, below
//! 0.5). Every random choice is drawn from a generator seeded by
//! `(master_seed, device_seed, index)`, so any burst can be regenerated on its
//! own and corpus generation can run in parallel.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::seed::{derive, fnv1a};
use crate::signal::{add_awgn, Signal, SignalClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    BluetoothLike,
    WifiLike,
    UavControllerLike,
}

impl DeviceKind {
    pub fn class(self) -> SignalClass {
        match self {
            DeviceKind::UavControllerLike => SignalClass::Uav,
            _ => SignalClass::Recognized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    /// Used as the signal `device_id`.
    pub name: String,
    pub kind: DeviceKind,
    /// Band center, cycles per sample.
    pub carrier_frac: f64,
    /// Occupied bandwidth, cycles per sample.
    pub bandwidth_frac: f64,
    /// Samples between frequency hops; `None` for a fixed carrier.
    pub hop_period: Option<usize>,
    /// Length of the transient amplitude ramp in samples.
    pub envelope_rise: usize,
    /// FSK deviation as a fraction of a quarter of the bandwidth.
    pub modulation_index: f64,
    pub device_seed: u64,
}

impl DeviceProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        kind: DeviceKind,
        carrier_frac: f64,
        bandwidth_frac: f64,
        hop_period: Option<usize>,
        envelope_rise: usize,
        modulation_index: f64,
    ) -> Self {
        DeviceProfile {
            name: name.to_string(),
            kind,
            carrier_frac,
            bandwidth_frac,
            hop_period,
            envelope_rise,
            modulation_index,
            device_seed: fnv1a(name.as_bytes()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("profile {}: {msg}", self.name)));
        if !(self.carrier_frac > 0.0 && self.carrier_frac < 0.5) {
            return bad(format!("carrier_frac {} outside (0, 0.5)", self.carrier_frac));
        }
        if !(self.bandwidth_frac > 0.0 && self.bandwidth_frac < 0.5) {
            return bad(format!("bandwidth_frac {} outside (0, 0.5)", self.bandwidth_frac));
        }
        if self.carrier_frac + self.bandwidth_frac / 2.0 >= 0.5
            || self.carrier_frac - self.bandwidth_frac / 2.0 <= 0.0
        {
            return bad("band crosses 0 or the Nyquist frequency".into());
        }
        if self.hop_period == Some(0) {
            return bad("hop period must be > 0".into());
        }
        if self.envelope_rise == 0 {
            return bad("envelope rise must be > 0".into());
        }
        if !(self.modulation_index > 0.0 && self.modulation_index.is_finite()) {
            return bad(format!("modulation index {} must be > 0", self.modulation_index));
        }
        Ok(())
    }
}

/// Two Bluetooth-like, two WiFi-like and six UAV-controller-like profiles.
pub fn default_profiles() -> Vec<DeviceProfile> {
    use DeviceKind::*;
    vec![
        DeviceProfile::new("bt-0", BluetoothLike, 0.050, 0.040, Some(512), 96, 1.0),
        DeviceProfile::new("bt-1", BluetoothLike, 0.085, 0.050, Some(768), 128, 0.8),
        DeviceProfile::new("wifi-0", WifiLike, 0.160, 0.100, None, 160, 1.0),
        DeviceProfile::new("wifi-1", WifiLike, 0.200, 0.120, None, 192, 1.0),
        DeviceProfile::new("uav-0", UavControllerLike, 0.300, 0.080, Some(256), 16, 1.2),
        DeviceProfile::new("uav-1", UavControllerLike, 0.360, 0.100, Some(320), 12, 1.0),
        DeviceProfile::new("uav-2", UavControllerLike, 0.420, 0.080, Some(192), 8, 1.2),
        DeviceProfile::new("uav-3", UavControllerLike, 0.260, 0.120, Some(384), 20, 1.0),
        DeviceProfile::new("uav-4", UavControllerLike, 0.120, 0.200, Some(128), 10, 1.5),
        DeviceProfile::new("uav-5", UavControllerLike, 0.330, 0.300, Some(160), 6, 1.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub profiles: Vec<DeviceProfile>,
    pub signals_per_device: usize,
    /// Share of each recognized device's bursts that go to training.
    pub train_fraction: f64,
    /// `None` generates clean bursts.
    pub snr_db: Option<f64>,
    pub capture_len: usize,
    pub sample_rate: f64,
    pub master_seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            profiles: default_profiles(),
            signals_per_device: 300,
            train_fraction: 2.0 / 3.0,
            snr_db: Some(30.0),
            capture_len: 4096,
            sample_rate: 20e9,
            master_seed: 0,
        }
    }
}

/// Quiet lead-in before the burst starts: `[LEAD_MIN, LEAD_MAX)` samples.
const LEAD_MIN: usize = 512;
const LEAD_MAX: usize = 1024;
/// Samples after the capture window so late triggers still fit.
const TAIL: usize = 256;
/// FSK symbol length in samples.
const SYMBOL_LEN: usize = 32;
/// Multi-tone symbol length in samples.
const OFDM_SYMBOL_LEN: usize = 80;
const TONES: usize = 16;
const HOP_CHANNELS: usize = 8;

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return Err(Error::Config("no device profiles".into()));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        if self.signals_per_device == 0 {
            return Err(Error::Config("signals_per_device must be > 0".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::Config(format!("snr {snr} is not finite")));
            }
        }
        if self.capture_len < 4 {
            return Err(Error::Config("capture_len must be >= 4".into()));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config("sample rate must be > 0".into()));
        }
        Ok(())
    }

    /// Total samples in every generated burst.
    pub fn burst_len(&self) -> usize {
        LEAD_MAX + self.capture_len + TAIL
    }

    pub fn train_per_device(&self) -> usize {
        (self.signals_per_device as f64 * self.train_fraction).round() as usize
    }
}

/// Seed for the AWGN added to burst `index` of a device.
pub fn noise_seed(master_seed: u64, device_seed: u64, index: usize) -> u64 {
    derive(master_seed, &[device_seed, index as u64, fnv1a(b"awgn")])
}

/// The noise-free burst.
pub fn gen_clean_burst(profile: &DeviceProfile, index: usize, cfg: &CorpusConfig) -> Result<Signal> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.master_seed, &[profile.device_seed, index as u64]));
    let len = cfg.burst_len();
    let lead = rng.gen_range(LEAD_MIN..LEAD_MAX);
    let amplitude = 1.0 + rng.gen_range(-0.1..0.1);

    let carrier = match profile.kind {
        DeviceKind::WifiLike => multitone(profile, len - lead, &mut rng),
        _ => hopped_fsk(profile, len - lead, &mut rng),
    };

    let rise = profile.envelope_rise as f64;
    let mut samples = vec![0.0; len];
    for (i, (s, c)) in samples[lead..].iter_mut().zip(carrier).enumerate() {
        let t = i as f64;
        let env = if t < rise {
            0.5 * (1.0 - (PI * t / rise).cos())
        } else {
            1.0
        };
        *s = amplitude * env * c;
    }
    Signal::new(samples, cfg.sample_rate, &profile.name, profile.kind.class(), None)
}

/// Burst `index` of `profile` with AWGN at `cfg.snr_db` (clean when `None`).
pub fn gen_burst(profile: &DeviceProfile, index: usize, cfg: &CorpusConfig) -> Result<Signal> {
    let clean = gen_clean_burst(profile, index, cfg)?;
    match cfg.snr_db {
        Some(snr) => add_awgn(&clean, snr, noise_seed(cfg.master_seed, profile.device_seed, index)),
        None => Ok(clean),
    }
}

/// Unit-amplitude phase-continuous FSK, hopping every `hop_period` samples.
fn hopped_fsk(p: &DeviceProfile, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half_bw = p.bandwidth_frac / 2.0;
    let deviation = (p.modulation_index * p.bandwidth_frac / 4.0).min(half_bw * 0.9);
    let span = (half_bw - deviation).max(0.0);
    let channel = |rng: &mut ChaCha8Rng| {
        if HOP_CHANNELS < 2 || span == 0.0 {
            return p.carrier_frac;
        }
        let c = rng.gen_range(0..HOP_CHANNELS) as f64 / (HOP_CHANNELS - 1) as f64;
        p.carrier_frac - span + 2.0 * span * c
    };
    let hop = p.hop_period.unwrap_or(usize::MAX);
    let mut until_hop = rng.gen_range(0..hop.min(1 << 20)).max(1);
    let mut center = channel(rng);
    let mut until_symbol = rng.gen_range(1..=SYMBOL_LEN);
    let mut bit: f64 = if rng.gen() { 1.0 } else { -1.0 };
    let mut phase = rng.gen_range(0.0..TAU);

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(phase.cos());
        phase = (phase + TAU * (center + bit * deviation)) % TAU;
        until_symbol -= 1;
        if until_symbol == 0 {
            until_symbol = SYMBOL_LEN;
            bit = if rng.gen() { 1.0 } else { -1.0 };
        }
        until_hop -= 1;
        if until_hop == 0 {
            until_hop = hop;
            center = channel(rng);
        }
    }
    out
}

/// Evenly spaced tones across the band with per-symbol QPSK phases, scaled to
/// the same mean power as a unit cosine.
fn multitone(p: &DeviceProfile, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lo = p.carrier_frac - p.bandwidth_frac / 2.0;
    let step = p.bandwidth_frac / (TONES - 1) as f64;
    let freqs: Vec<f64> = (0..TONES).map(|m| lo + step * m as f64).collect();
    let gain = 1.0 / (TONES as f64).sqrt();
    let offset = rng.gen_range(0..OFDM_SYMBOL_LEN);
    let mut phases = vec![0.0; TONES];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 || (i + offset) % OFDM_SYMBOL_LEN == 0 {
            for ph in &mut phases {
                *ph = (rng.gen_range(0..4) as f64 + 0.5) * PI / 2.0;
            }
        }
        let t = i as f64;
        let v: f64 = freqs
            .iter()
            .zip(&phases)
            .map(|(f, ph)| (TAU * f * t + ph).cos())
            .sum();
        out.push(gain * v);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<Signal>,
    pub eval: Vec<Signal>,
}

/// Generates every device's bursts and splits them: for recognized devices
/// the first `train_per_device` indices go to training and the rest to
/// evaluation; UAV bursts only ever go to evaluation.
pub fn build_corpus(cfg: &CorpusConfig, exec: Exec) -> Result<Corpus> {
    cfg.validate()?;
    let recognized = cfg
        .profiles
        .iter()
        .filter(|p| p.kind.class() == SignalClass::Recognized)
        .count();
    if recognized < 2 {
        return Err(Error::Config(format!(
            "need at least 2 recognized profiles, got {recognized}"
        )));
    }
    if recognized == cfg.profiles.len() {
        return Err(Error::Config("need at least 1 UAV profile".into()));
    }
    let n_train = cfg.train_per_device();
    if n_train == 0 || n_train >= cfg.signals_per_device {
        return Err(Error::Config(format!(
            "train split of {n_train} leaves no training or evaluation bursts"
        )));
    }
    let jobs: Vec<(&DeviceProfile, usize)> = cfg
        .profiles
        .iter()
        .flat_map(|p| (0..cfg.signals_per_device).map(move |i| (p, i)))
        .collect();
    let signals = exec.try_map(&jobs, |&(p, i)| gen_burst(p, i, cfg))?;

    let mut corpus = Corpus {
        train: Vec::new(),
        eval: Vec::new(),
    };
    for ((p, i), s) in jobs.into_iter().zip(signals) {
        if p.kind.class() == SignalClass::Recognized && i < n_train {
            corpus.train.push(s);
        } else {
            corpus.eval.push(s);
        }
    }
    Ok(corpus)
}

/// Anything carrying a ground-truth class.
pub trait Labeled {
    fn label(&self) -> SignalClass;
}

impl Labeled for Signal {
    fn label(&self) -> SignalClass {
        self.class()
    }
}

fn class_indices<T: Labeled>(items: &[T]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, it) in items.iter().enumerate() {
        match it.label() {
            SignalClass::Recognized => out[0].push(i),
            SignalClass::Uav => out[1].push(i),
        }
    }
    out
}

/// Stratified random split into `(test, validation)`. Each class contributes
/// `round(test_frac · n_class)` items to the test side; both sides keep the
/// input order.
pub fn split_eval<T: Labeled + Clone>(items: &[T], test_frac: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if items.is_empty() {
        return Err(Error::EmptyEval);
    }
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::Config(format!("test fraction {test_frac} outside (0, 1)")));
    }
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; items.len()];
    for mut idx in class_indices(items) {
        let take = (test_frac * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        for &i in &idx[..take] {
            in_test[i] = true;
        }
    }
    let mut test = Vec::new();
    let mut validation = Vec::new();
    for (it, t) in items.iter().zip(in_test) {
        if t {
            test.push(it.clone());
        } else {
            validation.push(it.clone());
        }
    }
    Ok((test, validation))
}

/// Random `per_class` items from each class, in input order.
pub fn balanced_subset<T: Labeled + Clone>(items: &[T], per_class: usize, seed: u64) -> Result<Vec<T>> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; items.len()];
    for mut idx in class_indices(items) {
        if idx.len() < per_class {
            return Err(Error::Config(format!(
                "balanced subset needs {per_class} items per class, a class has {}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..per_class] {
            keep[i] = true;
        }
    }
    Ok(items
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(it, _)| it.clone())
        .collect())
}
