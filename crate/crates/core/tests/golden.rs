use std::path::PathBuf;

use uavsense_core::eval::{accuracy, sweep_neighbors, sweep_snr, SnrSweepConfig};
use uavsense_core::pipeline::{record, records, training_rows};
use uavsense_core::signal::add_awgn;
use uavsense_core::synth::{balanced_subset, build_corpus, split_eval};
use uavsense_core::eval::sweep_noise_seed;
use uavsense_core::{CorpusConfig, Exec, LofConfig, LofModel, TriggerConfig};

fn mini_config(snr_db: Option<f64>) -> CorpusConfig {
    CorpusConfig {
        signals_per_device: 30,
        capture_len: 1024,
        snr_db,
        master_seed: 7,
        ..CorpusConfig::default()
    }
}

fn trigger() -> TriggerConfig {
    TriggerConfig {
        capture_len: 1024,
        ..TriggerConfig::default()
    }
}

fn neighbors_csv(exec: Exec) -> String {
    let corpus = build_corpus(&mini_config(Some(14.0)), exec).unwrap();
    let train = training_rows(&records(&corpus.train, &trigger(), exec).unwrap()).unwrap();
    let eval = records(&corpus.eval, &trigger(), exec).unwrap();
    let (test, validation) = split_eval(&eval, 0.7, 11).unwrap();
    let table = sweep_neighbors(&train, &validation, &test, &[5, 10], &LofConfig::default(), exec).unwrap();
    let mut buf = Vec::new();
    table.write_neighbors_csv(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn mini_sweep_matches_golden_file() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/mini_neighbors_sweep.csv");
    let got = neighbors_csv(Exec::Sequential);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file missing; rerun with UPDATE_GOLDEN=1");
    assert_eq!(got, want);
}

#[test]
fn sweep_is_independent_of_execution_mode() {
    assert_eq!(neighbors_csv(Exec::Sequential), neighbors_csv(Exec::Parallel));
}

#[test]
fn snr_sweep_at_training_snr_agrees_with_direct_scoring() {
    let cfg = mini_config(Some(30.0));
    let corpus = build_corpus(&cfg, Exec::default()).unwrap();
    let train = training_rows(&records(&corpus.train, &trigger(), Exec::default()).unwrap()).unwrap();
    let clean = build_corpus(&mini_config(None), Exec::default()).unwrap();
    let balanced = balanced_subset(&clean.eval, 20, 3).unwrap();

    let sc = SnrSweepConfig {
        lof: LofConfig::default(),
        trigger: trigger(),
        noise_seed: 99,
    };
    let table = sweep_snr(&train, &balanced, &[10], &[30.0], &sc, Exec::default()).unwrap();

    let noisy: Vec<_> = balanced
        .iter()
        .enumerate()
        .map(|(i, s)| record(&add_awgn(s, 30.0, sweep_noise_seed(99, i)).unwrap(), &trigger()).unwrap())
        .collect();
    let model = LofModel::fit(&train, &LofConfig { k: 10, ..LofConfig::default() }).unwrap();
    let direct = accuracy(&model, &noisy, Exec::Sequential).unwrap();
    let via_neighbors = sweep_neighbors(&train, &[], &noisy, &[10], &LofConfig::default(), Exec::default()).unwrap();

    let swept = table.get(Some(30.0), 10).unwrap().test_accuracy;
    assert_eq!(swept, direct);
    assert_eq!(swept, via_neighbors.rows[0].test_accuracy);
}

#[test]
fn snr_sweep_is_deterministic() {
    let corpus = build_corpus(&mini_config(Some(30.0)), Exec::default()).unwrap();
    let train = training_rows(&records(&corpus.train, &trigger(), Exec::default()).unwrap()).unwrap();
    let clean = build_corpus(&mini_config(None), Exec::default()).unwrap();
    let balanced = balanced_subset(&clean.eval, 20, 3).unwrap();
    let sc = SnrSweepConfig {
        lof: LofConfig::default(),
        trigger: trigger(),
        noise_seed: 5,
    };
    let a = sweep_snr(&train, &balanced, &[5, 10], &[10.0, 20.0], &sc, Exec::Sequential).unwrap();
    let b = sweep_snr(&train, &balanced, &[5, 10], &[10.0, 20.0], &sc, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}
