//! Detection metrics and the neighbor-count and SNR sweeps.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lof::{Detection, LofConfig, LofModel};
use crate::pipeline::{fingerprint, FeatureRecord};
use crate::seed::derive;
use crate::signal::{add_awgn, Signal, SignalClass, TriggerConfig};

/// Counts with UAV / `Outlier` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, truth: SignalClass, pred: Detection) {
        match (truth, pred) {
            (SignalClass::Uav, Detection::Outlier) => self.tp += 1,
            (SignalClass::Uav, Detection::Inlier) => self.fn_ += 1,
            (SignalClass::Recognized, Detection::Outlier) => self.fp += 1,
            (SignalClass::Recognized, Detection::Inlier) => self.tn += 1,
        }
    }
}

pub fn confusion(truth: &[SignalClass], pred: &[Detection]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(pred) {
        cm.record(t, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut degenerate = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            degenerate = true;
            0.0
        } else {
            num / den
        }
    };
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let accuracy = ratio(tp + tn, total as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = 2.0 * ratio(precision * recall, precision + recall);
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        degenerate,
    })
}

pub fn evaluate(model: &LofModel, records: &[FeatureRecord], exec: Exec) -> Result<ConfusionMatrix> {
    let rows: Vec<Vec<f64>> = records.iter().map(FeatureRecord::row).collect();
    let pred = model.classify_batch(&rows, exec)?;
    let truth: Vec<SignalClass> = records.iter().map(|r| r.class).collect();
    confusion(&truth, &pred)
}

pub fn accuracy(model: &LofModel, records: &[FeatureRecord], exec: Exec) -> Result<f64> {
    Ok(metrics(&evaluate(model, records, exec)?)?.accuracy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: Option<f64>,
    pub k: usize,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Neighbor count with the best validation accuracy (test accuracy when
    /// no validation column exists); ties go to the smaller k.
    pub fn select_k(&self) -> Option<usize> {
        let key = |r: &SweepRow| r.validation_accuracy.unwrap_or(r.test_accuracy);
        self.rows
            .iter()
            .fold(None::<&SweepRow>, |best, r| match best {
                Some(b) if key(b) > key(r) || (key(b) == key(r) && b.k <= r.k) => Some(b),
                _ => Some(r),
            })
            .map(|r| r.k)
    }

    pub fn get(&self, snr_db: Option<f64>, k: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.snr_db == snr_db && r.k == k)
    }

    /// `k,val_acc,test_acc`
    pub fn write_neighbors_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,val_acc,test_acc")?;
        for r in &self.rows {
            let val = r.validation_accuracy.map(|v| v.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{}", r.k, val, r.test_accuracy)?;
        }
        Ok(())
    }

    /// `snr_db,k,accuracy`
    pub fn write_snr_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "snr_db,k,accuracy")?;
        for r in &self.rows {
            let snr = r.snr_db.map(|v| v.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{}", snr, r.k, r.test_accuracy)?;
        }
        Ok(())
    }

    /// Line chart of accuracy against SNR with one series per k.
    pub fn snr_svg(&self) -> String {
        render_snr_svg(self)
    }
}

fn check_grid(k_grid: &[usize]) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::Config("empty neighbor grid".into()));
    }
    Ok(())
}

/// Fits one model per k on `train` and reports validation and test accuracy.
/// Rows are sorted by k.
pub fn sweep_neighbors(
    train: &[Vec<f64>],
    validation: &[FeatureRecord],
    test: &[FeatureRecord],
    k_grid: &[usize],
    cfg: &LofConfig,
    exec: Exec,
) -> Result<SweepTable> {
    check_grid(k_grid)?;
    let mut grid = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let rows = exec.try_map(&grid, |&k| {
        let model = LofModel::fit(train, &LofConfig { k, ..*cfg })?;
        let validation_accuracy = if validation.is_empty() {
            None
        } else {
            Some(accuracy(&model, validation, Exec::Sequential)?)
        };
        Ok::<_, Error>(SweepRow {
            snr_db: None,
            k,
            validation_accuracy,
            test_accuracy: accuracy(&model, test, Exec::Sequential)?,
        })
    })?;
    Ok(SweepTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSweepConfig {
    /// `k` is taken from the grid.
    pub lof: LofConfig,
    pub trigger: TriggerConfig,
    /// Base for per-signal noise seeds.
    pub noise_seed: u64,
}

/// Noise seed for item `index` of an SNR sweep. It does not depend on the
/// SNR or k, so every cell sees the same noise shape at a different level.
pub fn sweep_noise_seed(base: u64, index: usize) -> u64 {
    derive(base, &[index as u64])
}

/// Re-noises each clean burst to every SNR in `snr_grid`, fingerprints it and
/// classifies it with models fitted once on `train` (one per k). Bursts that
/// no longer trigger count as `Inlier` (nothing captured, nothing flagged).
pub fn sweep_snr(
    train: &[Vec<f64>],
    clean: &[Signal],
    k_grid: &[usize],
    snr_grid: &[f64],
    cfg: &SnrSweepConfig,
    exec: Exec,
) -> Result<SweepTable> {
    check_grid(k_grid)?;
    if snr_grid.is_empty() {
        return Err(Error::Config("empty SNR grid".into()));
    }
    if clean.is_empty() {
        return Err(Error::EmptyEval);
    }
    let mut ks = k_grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut snrs = snr_grid.to_vec();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();

    let models = exec.try_map(&ks, |&k| LofModel::fit(train, &LofConfig { k, ..cfg.lof }))?;

    let jobs: Vec<(usize, usize)> = (0..snrs.len())
        .flat_map(|s| (0..clean.len()).map(move |i| (s, i)))
        .collect();
    let features = exec.try_map(&jobs, |&(s, i)| {
        let noisy = add_awgn(&clean[i], snrs[s], sweep_noise_seed(cfg.noise_seed, i))?;
        match fingerprint(&noisy, &cfg.trigger) {
            Ok(fv) => Ok(Some(fv.to_array().to_vec())),
            Err(Error::NoTrigger) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let truth: Vec<SignalClass> = clean.iter().map(Signal::class).collect();

    let cells: Vec<(usize, usize)> = (0..snrs.len())
        .flat_map(|s| (0..ks.len()).map(move |m| (s, m)))
        .collect();
    let rows = exec.try_map(&cells, |&(s, m)| {
        let model = &models[m];
        let feats = &features[s * clean.len()..(s + 1) * clean.len()];
        let pred = feats
            .iter()
            .map(|f| match f {
                Some(x) => model.classify(x),
                None => Ok(Detection::Inlier),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>(SweepRow {
            snr_db: Some(snrs[s]),
            k: ks[m],
            validation_accuracy: None,
            test_accuracy: metrics(&confusion(&truth, &pred)?)?.accuracy,
        })
    })?;
    Ok(SweepTable { rows })
}

pub fn write_confusion_csv<W: Write>(cm: &ConfusionMatrix, mut w: W) -> Result<()> {
    writeln!(w, "tp,fp,fn,tn")?;
    writeln!(w, "{},{},{},{}", cm.tp, cm.fp, cm.fn_, cm.tn)?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(m: &Metrics, mut w: W) -> Result<()> {
    writeln!(w, "accuracy,precision,recall,f1,degenerate")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        m.accuracy, m.precision, m.recall, m.f1, m.degenerate
    )?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn render_snr_svg(table: &SweepTable) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let snrs: Vec<f64> = table.rows.iter().filter_map(|r| r.snr_db).collect();
    let (lo, hi) = snrs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) };
    let x = |s: f64| left + (s - lo) / (hi - lo) * pw;
    let y = |a: f64| top + (1.0 - a) * ph;

    let mut ks: Vec<usize> = table.rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let a = i as f64 / 5.0;
        let yy = y(a);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{a:.1}</text>"##,
            left + pw,
            left - 6.0,
            yy + 4.0
        );
    }
    let mut ticks = snrs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for s in &ticks {
        let xx = x(*s);
        let _ = writeln!(
            svg,
            r#"<text x="{xx:.1}" y="{:.1}" text-anchor="middle">{s}</text>"#,
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">SNR (dB)</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18,{:.1}) rotate(-90)" text-anchor="middle">accuracy</text>"#,
        top + ph / 2.0
    );
    for (n, k) in ks.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r.k == *k)
            .filter_map(|r| r.snr_db.map(|s| (s, r.test_accuracy)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts
            .iter()
            .map(|&(s, a)| format!("{:.1},{:.1}", x(s), y(a)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 16.0 * n as f64 + 10.0;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">k = {k}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
