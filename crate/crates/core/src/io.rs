//! On-disk formats.
//!
//! Signal file (`.rfsg`), all little-endian:
//!
//! | bytes | field                          |
//! |-------|--------------------------------|
//! | 4     | magic `RFSG`                   |
//! | 2     | format version, `u16` (= 1)    |
//! | 8     | sample rate, `f64`             |
//! | 4     | sample count, `u32`            |
//! | 4·n   | samples, `f32`                 |
//!
//! Corpus manifest: CSV `path,device_id,class,snr_db`, with `path` relative
//! to the manifest's directory and an empty `snr_db` for clean bursts.
//!
//! Feature CSV: `device_id,class,snr_db,sigma1,sigma2,sigma3,sigma4`.
//! Statistics CSV: `device_id,class,snr_db` followed by the 44 columns of
//! [`stat_column_names`].

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::features::{stat_column_names, FeatureVector, STAT_COLUMNS};
use crate::pipeline::FeatureRecord;
use crate::signal::{Signal, SignalClass};

pub const SIGNAL_MAGIC: &[u8; 4] = b"RFSG";
pub const SIGNAL_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 4;

pub fn encode_signal(signal: &Signal) -> Result<Vec<u8>> {
    let n = u32::try_from(signal.len())
        .map_err(|_| Error::InvalidSignal(format!("{} samples do not fit a u32 count", signal.len())))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * signal.len());
    out.extend_from_slice(SIGNAL_MAGIC);
    out.extend_from_slice(&SIGNAL_VERSION.to_le_bytes());
    out.extend_from_slice(&signal.sample_rate().to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for &s in signal.samples() {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    Ok(out)
}

/// Decodes samples and sample rate; provenance comes from the manifest.
pub fn decode_signal(
    bytes: &[u8],
    path: &Path,
    device_id: &str,
    class: SignalClass,
    snr_db: Option<f64>,
) -> Result<Signal> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != SIGNAL_MAGIC {
        return Err(bad("missing RFSG magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != SIGNAL_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let rate = f64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let n = u32::from_le_bytes(bytes[14..18].try_into().expect("4 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * n {
        return Err(bad(format!("header says {n} samples, body holds {} bytes", body.len())));
    }
    let samples = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Signal::new(samples, rate, device_id, class, snr_db).map_err(|e| bad(e.to_string()))
}

pub fn write_signal(path: &Path, signal: &Signal) -> Result<()> {
    fs::write(path, encode_signal(signal)?)?;
    Ok(())
}

pub fn read_signal(path: &Path, entry: &ManifestEntry) -> Result<Signal> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_signal(&bytes, path, &entry.device_id, entry.class, entry.snr_db)
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn fmt_snr(snr: Option<f64>) -> String {
    snr.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_snr(field: &str) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Record(format!("bad snr_db {field:?}")))
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Record(format!("bad {what} {field:?}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub device_id: String,
    pub class: SignalClass,
    pub snr_db: Option<f64>,
}

pub const MANIFEST_HEADER: [&str; 4] = ["path", "device_id", "class", "snr_db"];

pub fn write_manifest<W: Write>(entries: &[ManifestEntry], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(MANIFEST_HEADER)?;
    for e in entries {
        csv.write_record([
            e.path.to_string_lossy().as_ref(),
            e.device_id.as_str(),
            e.class.as_str(),
            fmt_snr(e.snr_db).as_str(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn check_header(got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if got.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(Error::Record(format!(
            "expected header {}, found {}",
            want.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut csv = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    check_header(csv.headers()?, &MANIFEST_HEADER)?;
    csv.records()
        .map(|r| {
            let r = r?;
            if r.len() != 4 {
                return Err(Error::Record(format!("manifest row has {} fields", r.len())));
            }
            Ok(ManifestEntry {
                path: PathBuf::from(&r[0]),
                device_id: r[1].to_string(),
                class: r[2].parse()?,
                snr_db: parse_snr(&r[3])?,
            })
        })
        .collect()
}

pub fn feature_header() -> Vec<&'static str> {
    let mut h = vec!["device_id", "class", "snr_db"];
    h.extend(FeatureVector::NAMES);
    h
}

pub fn write_features<W: Write>(records: &[FeatureRecord], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(feature_header())?;
    for r in records {
        let mut row = vec![r.device_id.clone(), r.class.to_string(), fmt_snr(r.snr_db)];
        row.extend(r.x.to_array().iter().map(f64::to_string));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRecord>> {
    read_features_from(BufReader::new(File::open(path)?))
}

pub fn read_features_from<R: Read>(r: R) -> Result<Vec<FeatureRecord>> {
    let mut csv = csv::Reader::from_reader(r);
    check_header(csv.headers()?, &feature_header())?;
    csv.records()
        .map(|r| {
            let r = r?;
            if r.len() != 7 {
                return Err(Error::Record(format!("feature row has {} fields", r.len())));
            }
            let mut x = [0.0; 4];
            for (i, v) in x.iter_mut().enumerate() {
                *v = parse_f64(&r[3 + i], FeatureVector::NAMES[i])?;
            }
            Ok(FeatureRecord {
                device_id: r[0].to_string(),
                class: r[1].parse()?,
                snr_db: parse_snr(&r[2])?,
                x: FeatureVector::new(x)?,
            })
        })
        .collect()
}

/// One row of the 44-statistic CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRecord {
    pub device_id: String,
    pub class: SignalClass,
    pub snr_db: Option<f64>,
    pub stats: Vec<f64>,
}

pub fn write_stats<W: Write>(records: &[StatsRecord], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["device_id".to_string(), "class".into(), "snr_db".into()];
    header.extend(stat_column_names());
    csv.write_record(&header)?;
    for r in records {
        let mut row = vec![r.device_id.clone(), r.class.to_string(), fmt_snr(r.snr_db)];
        row.extend(r.stats.iter().map(f64::to_string));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRecord>> {
    let mut csv = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let names = stat_column_names();
    let mut want: Vec<&str> = vec!["device_id", "class", "snr_db"];
    want.extend(names.iter().map(String::as_str));
    check_header(csv.headers()?, &want)?;
    csv.records()
        .map(|r| {
            let r = r?;
            if r.len() != 3 + STAT_COLUMNS {
                return Err(Error::Record(format!("stats row has {} fields", r.len())));
            }
            Ok(StatsRecord {
                device_id: r[0].to_string(),
                class: r[1].parse()?,
                snr_db: parse_snr(&r[2])?,
                stats: (0..STAT_COLUMNS)
                    .map(|i| parse_f64(&r[3 + i], &names[i]))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}
