//! Sampled RF bursts, SNR control and the energy-threshold trigger.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance class of a burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignalClass {
    /// WiFi or Bluetooth traffic that belongs in the monitored environment.
    Recognized,
    /// A UAV flight-controller link.
    Uav,
}

impl SignalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalClass::Recognized => "recognized",
            SignalClass::Uav => "uav",
        }
    }
}

impl std::fmt::Display for SignalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SignalClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "recognized" => Ok(SignalClass::Recognized),
            "uav" => Ok(SignalClass::Uav),
            other => Err(Error::Record(format!("unknown class {other:?}"))),
        }
    }
}

/// A real-valued sampled burst. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
    device_id: String,
    class: SignalClass,
    snr_db: Option<f64>,
    padded: bool,
}

impl Signal {
    /// Fails unless `samples` is non-empty and finite and `sample_rate > 0`.
    pub fn new(
        samples: Vec<f64>,
        sample_rate: f64,
        device_id: impl Into<String>,
        class: SignalClass,
        snr_db: Option<f64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Signal {
            samples,
            sample_rate,
            device_id: device_id.into(),
            class,
            snr_db,
            padded: false,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn class(&self) -> SignalClass {
        self.class
    }

    /// `None` marks a clean (noise-free) reference.
    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    /// True when the capture ran past the end of the burst and was zero-padded.
    pub fn padded(&self) -> bool {
        self.padded
    }

    /// Same metadata, new samples.
    fn with_samples(&self, samples: Vec<f64>) -> Signal {
        Signal {
            samples,
            sample_rate: self.sample_rate,
            device_id: self.device_id.clone(),
            class: self.class,
            snr_db: self.snr_db,
            padded: self.padded,
        }
    }
}

/// Oscilloscope-style trigger parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    /// Length of the sliding energy window in samples.
    pub window_len: usize,
    /// Mean-square energy per window at or above which capture starts.
    pub energy_threshold: f64,
    /// Number of samples captured from the trigger point.
    pub capture_len: usize,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            window_len: 64,
            energy_threshold: 0.1,
            capture_len: 4096,
        }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.capture_len == 0 {
            return Err(Error::Config("window and capture lengths must be > 0".into()));
        }
        if self.window_len > self.capture_len {
            return Err(Error::Config(format!(
                "window_len {} exceeds capture_len {}",
                self.window_len, self.capture_len
            )));
        }
        if !(self.energy_threshold.is_finite() && self.energy_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "energy threshold must be finite and >= 0, got {}",
                self.energy_threshold
            )));
        }
        Ok(())
    }
}

/// Mean of the squared samples.
pub fn mean_power(signal: &Signal) -> f64 {
    mean_square(signal.samples())
}

pub(crate) fn mean_square(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().map(|v| v * v).sum::<f64>() / xs.len() as f64
}

/// Adds zero-mean white Gaussian noise with variance
/// `mean_power(signal) / 10^(target_snr_db / 10)`.
///
/// `f64::INFINITY` means "no noise" and returns the input unchanged.
pub fn add_awgn(signal: &Signal, target_snr_db: f64, seed: u64) -> Result<Signal> {
    if target_snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    if !target_snr_db.is_finite() {
        return Err(Error::Config(format!("target SNR must be finite, got {target_snr_db}")));
    }
    let power = mean_power(signal);
    if power == 0.0 {
        return Err(Error::ZeroPowerSignal);
    }
    let sigma = (power / 10f64.powf(target_snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = signal
        .samples()
        .iter()
        .map(|&s| {
            let n: f64 = StandardNormal.sample(&mut rng);
            s + sigma * n
        })
        .collect();
    let mut out = signal.with_samples(samples);
    out.snr_db = Some(target_snr_db);
    Ok(out)
}

/// Index of the first window whose mean-square energy reaches the threshold.
pub fn trigger_index(samples: &[f64], window_len: usize, threshold: f64) -> Option<usize> {
    if window_len == 0 || samples.len() < window_len {
        return None;
    }
    let target = threshold * window_len as f64;
    let mut sum: f64 = samples[..window_len].iter().map(|v| v * v).sum();
    for i in 0..=samples.len() - window_len {
        if i > 0 {
            let out = samples[i - 1];
            let inn = samples[i + window_len - 1];
            sum += inn * inn - out * out;
        }
        // The running sum drifts; confirm candidates with an exact sum.
        if sum >= target * (1.0 - 1e-9) {
            let exact: f64 = samples[i..i + window_len].iter().map(|v| v * v).sum();
            if exact >= target {
                return Some(i);
            }
            sum = exact;
        }
    }
    None
}

/// Cuts `capture_len` samples starting at the first triggering window.
///
/// When fewer than `capture_len` samples remain after the trigger point the
/// tail is zero-padded and [`Signal::padded`] is set.
pub fn extract_transient(signal: &Signal, cfg: &TriggerConfig) -> Result<Signal> {
    cfg.validate()?;
    if signal.len() < cfg.capture_len {
        return Err(Error::InputTooShort {
            len: signal.len(),
            needed: cfg.capture_len,
        });
    }
    let start = trigger_index(signal.samples(), cfg.window_len, cfg.energy_threshold)
        .ok_or(Error::NoTrigger)?;
    let end = (start + cfg.capture_len).min(signal.len());
    let mut samples = signal.samples()[start..end].to_vec();
    let padded = samples.len() < cfg.capture_len;
    samples.resize(cfg.capture_len, 0.0);
    let mut out = signal.with_samples(samples);
    out.padded = padded;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(samples: Vec<f64>) -> Signal {
        Signal::new(samples, 1.0, "dev", SignalClass::Recognized, None).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(Signal::new(vec![], 1.0, "d", SignalClass::Uav, None).is_err());
        assert!(Signal::new(vec![f64::NAN], 1.0, "d", SignalClass::Uav, None).is_err());
        assert!(Signal::new(vec![1.0], 0.0, "d", SignalClass::Uav, None).is_err());
        assert!(Signal::new(vec![1.0], -5.0, "d", SignalClass::Uav, None).is_err());
    }

    #[test]
    fn mean_power_examples() {
        assert_eq!(mean_power(&sig(vec![0.0; 4])), 0.0);
        assert_eq!(mean_power(&sig(vec![1.0, -1.0, 1.0, -1.0])), 1.0);
        assert_eq!(mean_power(&sig(vec![1.0, 2.0, 3.0, 4.0])), 7.5);
    }

    #[test]
    fn awgn_infinite_snr_is_passthrough() {
        let s = sig(vec![0.5, -0.25, 1.0]);
        assert_eq!(add_awgn(&s, f64::INFINITY, 3).unwrap(), s);
    }

    #[test]
    fn awgn_zero_signal_is_rejected() {
        let s = sig(vec![0.0; 16]);
        assert!(matches!(add_awgn(&s, 30.0, 1), Err(Error::ZeroPowerSignal)));
    }

    #[test]
    fn awgn_noise_power_matches_target() {
        let n = 100_000;
        let s = sig((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
        let noisy = add_awgn(&s, 10.0, 42).unwrap();
        let noise: Vec<f64> = noisy
            .samples()
            .iter()
            .zip(s.samples())
            .map(|(a, b)| a - b)
            .collect();
        let p = mean_square(&noise);
        assert!((p - 0.1).abs() <= 0.005, "noise power {p}");
        assert_eq!(noisy.snr_db(), Some(10.0));
        assert_eq!(noisy.len(), n);
        assert_eq!(noisy, add_awgn(&s, 10.0, 42).unwrap());
    }

    #[test]
    fn idle_input_never_triggers() {
        let s = sig((0..5000).map(|i| 0.01 * ((i as f64) * 0.3).sin()).collect());
        let cfg = TriggerConfig {
            capture_len: 1024,
            ..TriggerConfig::default()
        };
        assert!(matches!(extract_transient(&s, &cfg), Err(Error::NoTrigger)));
    }

    #[test]
    fn trigger_on_burst_after_silence() {
        let mut x = vec![0.0; 10_000];
        x.extend(std::iter::repeat_n(1.0, 6000));
        let cfg = TriggerConfig {
            window_len: 64,
            energy_threshold: 0.25,
            capture_len: 4096,
        };
        // Direct scan: the first window holding >= 16 ones starts at 10_000 - 48.
        let brute = (0..=x.len() - 64)
            .find(|&i| x[i..i + 64].iter().map(|v| v * v).sum::<f64>() / 64.0 >= 0.25)
            .unwrap();
        assert_eq!(brute, 10_000 - 48);
        let idx = trigger_index(&x, 64, 0.25).unwrap();
        assert_eq!(idx, brute);
        assert!((10_000 - 63..=10_000).contains(&idx));
        let out = extract_transient(&sig(x), &cfg).unwrap();
        assert_eq!(out.len(), 4096);
        assert!(!out.padded());
        assert_eq!(out.samples()[47], 0.0);
        assert_eq!(out.samples()[48], 1.0);
    }

    #[test]
    fn immediate_trigger_starts_at_zero() {
        let x: Vec<f64> = (0..5000).map(|i| (i as f64 * 0.7).sin()).collect();
        let out = extract_transient(&sig(x.clone()), &TriggerConfig::default()).unwrap();
        assert_eq!(out.samples(), &x[..4096]);
    }

    #[test]
    fn late_trigger_is_padded() {
        let mut x = vec![0.0; 4096];
        x.extend(std::iter::repeat_n(1.0, 100));
        // 7 ones push a 64-sample window over 0.1 mean-square.
        let start = 4096 - 64 + 7;
        assert_eq!(trigger_index(&x, 64, 0.1), Some(start));
        let out = extract_transient(&sig(x), &TriggerConfig::default()).unwrap();
        assert!(out.padded());
        assert_eq!(out.len(), 4096);
        let burst_end = 4196 - start;
        assert!(out.samples()[burst_end - 100..burst_end].iter().all(|&v| v == 1.0));
        assert!(out.samples()[burst_end..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_input_is_rejected() {
        let s = sig(vec![1.0; 100]);
        assert!(matches!(
            extract_transient(&s, &TriggerConfig::default()),
            Err(Error::InputTooShort { len: 100, needed: 4096 })
        ));
    }

    #[test]
    fn bad_trigger_config() {
        let cfg = TriggerConfig {
            window_len: 128,
            energy_threshold: 0.1,
            capture_len: 64,
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn awgn_hits_target_snr(seed in any::<u64>(), target in -5.0f64..40.0) {
            let s = sig((0..100_000).map(|i| (i as f64 * 0.05).sin() * 0.7).collect());
            let noisy = add_awgn(&s, target, seed).unwrap();
            let noise: Vec<f64> = noisy.samples().iter().zip(s.samples()).map(|(a, b)| a - b).collect();
            let measured = 10.0 * (mean_power(&s) / mean_square(&noise)).log10();
            prop_assert!((measured - target).abs() <= 0.5, "measured {measured} target {target}");
        }
    }

    proptest! {
        #[test]
        fn trigger_window_reaches_threshold(
            lead in 0usize..600,
            amp in 0.2f64..2.0,
            threshold in 0.01f64..0.5,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..lead + 1200)
                .map(|i| {
                    let base = if i < lead { 0.05 } else { amp };
                    base * rng.gen_range(-1.0..1.0)
                })
                .collect();
            let cfg = TriggerConfig { window_len: 32, energy_threshold: threshold, capture_len: 512 };
            let s = sig(x);
            match extract_transient(&s, &cfg) {
                Ok(out) => {
                    let head = mean_square(&out.samples()[..32]);
                    prop_assert!(head >= threshold);
                    if !out.padded() {
                        let again = extract_transient(&out, &cfg).unwrap();
                        prop_assert_eq!(again.samples(), out.samples());
                    }
                }
                Err(Error::NoTrigger) => {
                    let best = s.samples().windows(32).map(mean_square).fold(0.0, f64::max);
                    prop_assert!(best < threshold);
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }

    #[test]
    fn class_parsing() {
        assert_eq!("UAV".parse::<SignalClass>().unwrap(), SignalClass::Uav);
        assert_eq!("recognized".parse::<SignalClass>().unwrap(), SignalClass::Recognized);
        assert!("wifi".parse::<SignalClass>().is_err());
    }
}
