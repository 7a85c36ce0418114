use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::{info, warn};
use uavsense_core::eval::{
    evaluate, metrics, sweep_neighbors, sweep_snr, write_confusion_csv, write_metrics_csv,
    SnrSweepConfig,
};
use uavsense_core::features::{rank_features, sample_variance, stat_column_names};
use uavsense_core::io::{
    read_features, read_manifest, read_signal, read_stats, write_atomic, write_features,
    write_manifest, write_signal, write_stats, ManifestEntry, StatsRecord,
};
use uavsense_core::pipeline::{full_stats, record, training_rows, FeatureRecord};
use uavsense_core::seed::stage_seed;
use uavsense_core::synth::{balanced_subset, build_corpus, split_eval, CorpusConfig};
use uavsense_core::{Error, Exec, LofConfig, LofModel, Signal, TriggerConfig};

use crate::grid::{parse_f64_grid, parse_usize_grid};
use crate::{
    Cli, Command, EvalArgs, ExtractArgs, LofArgs, RankArgs, ScoreArgs, SweepNArgs, SweepSnrArgs,
    SynthArgs, TrainArgs, TriggerArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a, cli.seed),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a, cli.seed),
        Command::SweepN(a) => sweep_n(a, cli.seed),
        Command::SweepSnr(a) => sweep_snr_cmd(a, cli.seed),
        Command::Rank(a) => rank(a),
    }
}

fn check_capture_len(n: usize) -> Result<()> {
    ensure!(n >= 4 && n.is_multiple_of(4), "--capture-len must be a positive multiple of 4, got {n}");
    Ok(())
}

impl TriggerArgs {
    fn config(&self) -> Result<TriggerConfig> {
        check_capture_len(self.capture_len)?;
        let cfg = TriggerConfig {
            window_len: self.window_len,
            energy_threshold: self.trigger_threshold,
            capture_len: self.capture_len,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl LofArgs {
    fn config(&self, k: usize) -> LofConfig {
        LofConfig {
            k,
            metric: self.metric,
            threshold: self.threshold,
            standardize: !self.no_standardize,
        }
    }
}

fn parse_snr(text: &str) -> Result<Option<f64>> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "none" | "clean" => Ok(None),
        v => {
            let snr: f64 = v.parse().with_context(|| format!("bad --snr {text:?}"))?;
            ensure!(snr.is_finite(), "--snr must be finite or \"inf\"");
            Ok(Some(snr))
        }
    }
}

fn synth(a: &SynthArgs, seed: u64) -> Result<()> {
    check_capture_len(a.capture_len)?;
    let cfg = CorpusConfig {
        signals_per_device: a.per_device,
        train_fraction: a.train_fraction,
        snr_db: parse_snr(&a.snr)?,
        capture_len: a.capture_len,
        master_seed: stage_seed(seed, "synth"),
        ..CorpusConfig::default()
    };
    let corpus = build_corpus(&cfg, Exec::default())?;

    let mut manifests = Vec::new();
    for (split, signals) in [("train", &corpus.train), ("eval", &corpus.eval)] {
        let dir = a.out.join(split);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut counters: HashMap<&str, usize> = HashMap::new();
        let mut entries = Vec::with_capacity(signals.len());
        for s in signals.iter() {
            let n = counters.entry(s.device_id()).or_default();
            let rel = PathBuf::from(split).join(format!("{}_{:04}.rfsg", s.device_id(), n));
            *n += 1;
            let path = a.out.join(&rel);
            write_signal(&path, s).with_context(|| format!("writing {}", path.display()))?;
            entries.push(ManifestEntry {
                path: rel,
                device_id: s.device_id().to_string(),
                class: s.class(),
                snr_db: s.snr_db(),
            });
        }
        manifests.push((a.out.join(format!("{split}_manifest.csv")), entries));
    }
    for (path, entries) in &manifests {
        write_atomic(path, |w| write_manifest(entries, w))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    info!(
        "wrote {} train and {} eval bursts to {}",
        corpus.train.len(),
        corpus.eval.len(),
        a.out.display()
    );
    Ok(())
}

enum Loaded {
    Signal(Signal),
    Corrupt(String),
}

/// Loads every manifest entry. A missing file is fatal; an unreadable one is
/// reported and skipped.
fn load_signals(manifest: &Path) -> Result<Vec<Loaded>> {
    let entries = read_manifest(manifest)
        .with_context(|| format!("reading manifest {}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    Exec::default().try_map(&entries, |e| {
        let path = base.join(&e.path);
        if !path.is_file() {
            bail!("signal file {} is missing", path.display());
        }
        Ok(match read_signal(&path, e) {
            Ok(s) => Loaded::Signal(s),
            Err(err) => Loaded::Corrupt(err.to_string()),
        })
    })
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let trigger = a.trigger.config()?;
    let loaded = load_signals(&a.manifest)?;
    let want_stats = a.stats_out.is_some();
    let results = Exec::default().map(&loaded, |l| -> Result<(FeatureRecord, Option<Vec<f64>>), String> {
        let s = match l {
            Loaded::Signal(s) => s,
            Loaded::Corrupt(msg) => return Err(msg.clone()),
        };
        let rec = record(s, &trigger).map_err(|e| format!("{}: {e}", s.device_id()))?;
        let stats = if want_stats {
            Some(full_stats(s, &trigger).map_err(|e| e.to_string())?)
        } else {
            None
        };
        Ok((rec, stats))
    });

    let mut records = Vec::new();
    let mut stats = Vec::new();
    let mut skipped = 0usize;
    for r in results {
        match r {
            Ok((rec, st)) => {
                if let Some(st) = st {
                    stats.push(StatsRecord {
                        device_id: rec.device_id.clone(),
                        class: rec.class,
                        snr_db: rec.snr_db,
                        stats: st,
                    });
                }
                records.push(rec);
            }
            Err(msg) => {
                warn!("skipping burst: {msg}");
                skipped += 1;
            }
        }
    }
    write_atomic(&a.out, |w| write_features(&records, w))
        .with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(path) = &a.stats_out {
        write_atomic(path, |w| write_stats(&stats, w))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if skipped > 0 {
        warn!("extracted {} feature rows, skipped {skipped} bursts", records.len());
    } else {
        info!("extracted {} feature rows", records.len());
    }
    Ok(())
}

fn load_features(path: &Path) -> Result<Vec<FeatureRecord>> {
    read_features(path).with_context(|| format!("reading features {}", path.display()))
}

fn train_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let records = load_features(path)?;
    training_rows(&records).with_context(|| format!("refusing to train on {}", path.display()))
}

fn train(a: &TrainArgs) -> Result<()> {
    let rows = train_rows(&a.features)?;
    let model = LofModel::fit_with(&rows, &a.lof.config(a.k), Exec::default())?;
    let json = model.to_json()?;
    write_atomic(&a.out, |w| Ok(w.write_all(json.as_bytes())?))
        .with_context(|| format!("writing {}", a.out.display()))?;
    info!(
        "fitted k={} {} model on {} recognized rows",
        model.k(),
        model.metric(),
        rows.len()
    );
    Ok(())
}

fn load_model(path: &Path) -> Result<LofModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LofModel::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

fn score(a: &ScoreArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let records = load_features(&a.features)?;
    let rows: Vec<Vec<f64>> = records.iter().map(FeatureRecord::row).collect();
    let scores = model.score_batch(&rows, Exec::default())?;
    let write = |w: &mut dyn Write| -> Result<(), Error> {
        writeln!(w, "device_id,class,score,prediction")?;
        for (r, s) in records.iter().zip(&scores) {
            writeln!(w, "{},{},{},{}", r.device_id, r.class, s, model.decide(*s).as_str())?;
        }
        Ok(())
    };
    match &a.out {
        Some(path) => write_atomic(path, write)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn eval(a: &EvalArgs, seed: u64) -> Result<()> {
    let mut model = load_model(&a.model)?;
    if let Some(t) = a.threshold {
        model = model.with_threshold(t);
    }
    let records = load_features(&a.features)?;
    let test = if a.all {
        records
    } else {
        split_eval(&records, a.test_frac, stage_seed(seed, "split"))?.0
    };
    let cm = evaluate(&model, &test, Exec::default())?;
    let m = metrics(&cm)?;
    fs::create_dir_all(&a.out)?;
    write_atomic(&a.out.join("confusion.csv"), |w| write_confusion_csv(&cm, w))?;
    write_atomic(&a.out.join("metrics.csv"), |w| write_metrics_csv(&m, w))?;
    info!(
        "{} rows: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}{}",
        test.len(),
        m.accuracy,
        m.precision,
        m.recall,
        m.f1,
        if m.degenerate { " (degenerate)" } else { "" }
    );
    Ok(())
}

fn sweep_n(a: &SweepNArgs, seed: u64) -> Result<()> {
    let rows = train_rows(&a.train)?;
    let records = load_features(&a.eval)?;
    let (test, validation) = split_eval(&records, a.test_frac, stage_seed(seed, "split"))?;
    let grid = parse_usize_grid(&a.k_grid)?;
    let table = sweep_neighbors(&rows, &validation, &test, &grid, &a.lof.config(1), Exec::default())?;
    fs::create_dir_all(&a.out)?;
    write_atomic(&a.out.join("neighbors_sweep.csv"), |w| table.write_neighbors_csv(w))?;
    if let Some(k) = table.select_k() {
        info!("best validation accuracy at k = {k}");
    }
    Ok(())
}

fn sweep_snr_cmd(a: &SweepSnrArgs, seed: u64) -> Result<()> {
    let trigger = a.trigger.config()?;
    let rows = train_rows(&a.train)?;
    let mut clean = Vec::new();
    for l in load_signals(&a.manifest)? {
        match l {
            Loaded::Signal(s) => clean.push(s),
            Loaded::Corrupt(msg) => bail!("corrupt burst in clean set: {msg}"),
        }
    }
    let balanced = balanced_subset(&clean, a.per_class, stage_seed(seed, "balance"))?;
    let cfg = SnrSweepConfig {
        lof: a.lof.config(1),
        trigger,
        noise_seed: stage_seed(seed, "sweep-snr"),
    };
    let table = sweep_snr(
        &rows,
        &balanced,
        &parse_usize_grid(&a.k_grid)?,
        &parse_f64_grid(&a.snr_grid)?,
        &cfg,
        Exec::default(),
    )?;
    fs::create_dir_all(&a.out)?;
    write_atomic(&a.out.join("snr_sweep.csv"), |w| table.write_snr_csv(w))?;
    let svg_path = a.svg.clone().unwrap_or_else(|| a.out.join("snr_sweep.svg"));
    let svg = table.snr_svg();
    write_atomic(&svg_path, |w| Ok(w.write_all(svg.as_bytes())?))?;
    info!("{} sweep cells written", table.rows.len());
    Ok(())
}

fn rank(a: &RankArgs) -> Result<()> {
    let records = read_stats(&a.stats).with_context(|| format!("reading {}", a.stats.display()))?;
    let matrix: Vec<Vec<f64>> = records.into_iter().map(|r| r.stats).collect();
    let order = rank_features(&matrix)?;
    let names = stat_column_names();
    let stdout = io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "rank,column,variance")?;
    for (i, &c) in order.iter().take(a.top).enumerate() {
        let col: Vec<f64> = matrix.iter().map(|r| r[c]).collect();
        writeln!(w, "{},{},{}", i + 1, names[c], sample_variance(&col))?;
    }
    Ok(())
}
