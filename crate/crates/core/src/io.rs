//! Sample files and result export.
//!
//! * `<name>.cf32`: interleaved little-endian IEEE-754 binary32 pairs (I then
//!   Q), no header. Always little-endian regardless of host.
//! * `<name>.cf32.meta.json`: flat JSON object; `sample_rate_hz` is required,
//!   unknown keys are carried through untouched.
//! * CSV: one header row; numbers printed with 17 significant digits so every
//!   double round-trips.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::{full_bin_to_alpha, EstimatorConfig, Mode};
use crate::error::{Error, Result};
use crate::estimator::{AveragedFrame, AveragedValues};
use crate::frame::{CyclicFrame, FrameLayout};
use crate::reference::OracleTable;
use crate::Sample;

/// Writes samples as cf32; returns the number of bytes written.
pub fn write_cf32(path: impl AsRef<Path>, samples: &[Sample]) -> Result<u64> {
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index: i as u64 });
    }
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn read_cf32(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(format!(
            "{}: length {} is not a multiple of 8 bytes",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Sample::new(re as f64, im as f64)
        })
        .collect())
}

/// Recording metadata stored next to a sample file.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingMeta {
    pub sample_rate_hz: f64,
    pub description: String,
    pub seed: Option<u64>,
    pub center_freq_hz: Option<f64>,
    /// Keys this version does not know about.
    pub extra: Map<String, Value>,
}

impl RecordingMeta {
    pub fn new(sample_rate_hz: f64, description: impl Into<String>) -> Self {
        Self {
            sample_rate_hz,
            description: description.into(),
            seed: None,
            center_freq_hz: None,
            extra: Map::new(),
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("sample_rate_hz".into(), Value::from(self.sample_rate_hz));
        m.insert("description".into(), Value::from(self.description.clone()));
        if let Some(s) = self.seed {
            m.insert("seed".into(), Value::from(s));
        }
        if let Some(f) = self.center_freq_hz {
            m.insert("center_freq_hz".into(), Value::from(f));
        }
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }

    fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::format(format!("metadata is not valid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(Error::format("metadata must be a JSON object"));
        };
        let sample_rate_hz = match map.remove("sample_rate_hz") {
            None => return Err(Error::format("missing key sample_rate_hz")),
            Some(v) => v
                .as_f64()
                .filter(|r| r.is_finite() && *r > 0.0)
                .ok_or_else(|| Error::format(format!("key sample_rate_hz: expected positive number, got {v}")))?,
        };
        let description = match map.remove("description") {
            None => String::new(),
            Some(Value::String(s)) => s,
            Some(v) => return Err(Error::format(format!("key description: expected string, got {v}"))),
        };
        let seed = match map.remove("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| Error::format(format!("key seed: expected unsigned integer, got {v}")))?,
            ),
        };
        let center_freq_hz = match map.remove("center_freq_hz") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_f64()
                    .ok_or_else(|| Error::format(format!("key center_freq_hz: expected number, got {v}")))?,
            ),
        };
        Ok(Self {
            sample_rate_hz,
            description,
            seed,
            center_freq_hz,
            extra: map,
        })
    }
}

/// Sidecar path for a sample file: `<path>.meta.json`.
pub fn meta_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `meta` to the sidecar of `path`.
pub fn write_meta(path: impl AsRef<Path>, meta: &RecordingMeta) -> Result<()> {
    if !(meta.sample_rate_hz.is_finite() && meta.sample_rate_hz > 0.0) {
        return Err(Error::usage(format!(
            "sample_rate_hz must be positive, got {}",
            meta.sample_rate_hz
        )));
    }
    let text = serde_json::to_string_pretty(&meta.to_json()).expect("JSON values always serialize");
    fs::write(meta_path(path), text + "\n")?;
    Ok(())
}

/// Reads the sidecar of `path`.
pub fn read_meta(path: impl AsRef<Path>) -> Result<RecordingMeta> {
    RecordingMeta::from_json(&fs::read_to_string(meta_path(path))?)
}

/// Formats like C's `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp) as usize;
    trim_fraction(&format!("{v:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Labels of a layout's major/minor axes as (alpha, lag) pairs.
fn axis_labels(layout: FrameLayout, config: &EstimatorConfig) -> Result<Vec<(f64, i64)>> {
    if FrameLayout::for_config(config) != layout {
        return Err(Error::usage(format!(
            "frame layout {layout:?} does not match the configuration"
        )));
    }
    let mut out = Vec::with_capacity(layout.len());
    match config.mode {
        Mode::Set => {
            let lags = config.lag_spec.lags();
            for a in &config.alphas {
                for &m in &lags {
                    out.push((a.value(), m));
                }
            }
        }
        Mode::Full => {
            for m in config.lag_spec.lags() {
                for k in 0..config.win_len {
                    out.push((full_bin_to_alpha(k, config.win_len)?.value(), m));
                }
            }
        }
    }
    Ok(out)
}

/// Raw frames: `frame_index,alpha,lag,re,im,mag`. Returns the data row count.
pub fn export_frames_csv(path: impl AsRef<Path>, frames: &[CyclicFrame], config: &EstimatorConfig) -> Result<usize> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = write_frames_csv(&mut w, frames, config)?;
    w.flush()?;
    Ok(n)
}

pub fn write_frames_csv(w: &mut impl Write, frames: &[CyclicFrame], config: &EstimatorConfig) -> Result<usize> {
    let first = frames.first().ok_or_else(|| Error::usage("no frames to export"))?;
    let labels = axis_labels(first.layout, config)?;
    if let Some(f) = frames.iter().find(|f| f.layout != first.layout) {
        return Err(Error::usage(format!("frame {} has a different layout", f.frame_index)));
    }
    writeln!(w, "frame_index,alpha,lag,re,im,mag")?;
    let mut rows = 0;
    for f in frames {
        for (&(alpha, lag), v) in labels.iter().zip(&f.values) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                f.frame_index,
                fmt_g17(alpha),
                lag,
                fmt_g17(v.re),
                fmt_g17(v.im),
                fmt_g17(v.norm())
            )?;
            rows += 1;
        }
    }
    Ok(rows)
}

/// Averaged frame: `alpha,lag,mean_mag` for magnitude averages,
/// `alpha,lag,mean_re,mean_im,mean_mag` for coherent ones.
pub fn export_average_csv(path: impl AsRef<Path>, avg: &AveragedFrame, config: &EstimatorConfig) -> Result<usize> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = write_average_csv(&mut w, avg, config)?;
    w.flush()?;
    Ok(n)
}

pub fn write_average_csv(w: &mut impl Write, avg: &AveragedFrame, config: &EstimatorConfig) -> Result<usize> {
    let labels = axis_labels(avg.layout, config)?;
    match &avg.values {
        AveragedValues::Magnitude(v) => {
            writeln!(w, "alpha,lag,mean_mag")?;
            for (&(alpha, lag), m) in labels.iter().zip(v) {
                writeln!(w, "{},{},{}", fmt_g17(alpha), lag, fmt_g17(*m))?;
            }
        }
        AveragedValues::Coherent(v) => {
            writeln!(w, "alpha,lag,mean_re,mean_im,mean_mag")?;
            for (&(alpha, lag), c) in labels.iter().zip(v) {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_g17(alpha),
                    lag,
                    fmt_g17(c.re),
                    fmt_g17(c.im),
                    fmt_g17(c.norm())
                )?;
            }
        }
    }
    Ok(labels.len())
}

/// Oracle table: `alpha,lag,mean_mag,trials`.
pub fn export_oracle_csv(path: impl AsRef<Path>, table: &OracleTable) -> Result<usize> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = write_oracle_csv(&mut w, table)?;
    w.flush()?;
    Ok(n)
}

pub fn write_oracle_csv(w: &mut impl Write, table: &OracleTable) -> Result<usize> {
    writeln!(w, "alpha,lag,mean_mag,trials")?;
    let mut rows = 0;
    for (alpha, row) in table.alphas.iter().zip(&table.mean_magnitude) {
        for (lag, m) in table.lags.iter().zip(row) {
            writeln!(w, "{},{},{},{}", fmt_g17(*alpha), lag, fmt_g17(*m), table.trials)?;
            rows += 1;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{average_frames, AverageMode};
    use crate::siggen::awgn;
    use crate::{CyclicCorrelator, NormalizedCycleFrequency};

    #[test]
    fn cf32_byte_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.cf32");
        assert_eq!(write_cf32(&p, &[Sample::new(1.0, -0.5)]).unwrap(), 8);
        assert_eq!(
            fs::read(&p).unwrap(),
            vec![0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0xBF]
        );
    }

    #[test]
    fn empty_and_truncated_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.cf32");
        assert_eq!(write_cf32(&p, &[]).unwrap(), 0);
        assert!(read_cf32(&p).unwrap().is_empty());
        fs::write(&p, [0u8; 12]).unwrap();
        assert!(matches!(read_cf32(&p), Err(Error::Format(_))));
        assert!(matches!(read_cf32(dir.path().join("missing")), Err(Error::Io(_))));
    }

    #[test]
    fn non_finite_samples_are_not_written() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.cf32");
        let r = write_cf32(&p, &[Sample::new(0.0, 0.0), Sample::new(f64::INFINITY, 0.0)]);
        assert!(matches!(r, Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn meta_round_trip_keeps_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rec.cf32");
        let mut meta = RecordingMeta::new(400_000.0, "gmsk");
        meta.seed = Some(7);
        meta.extra.insert("hardware".into(), Value::from("USRP"));
        write_meta(&p, &meta).unwrap();
        assert!(dir.path().join("rec.cf32.meta.json").exists());
        assert_eq!(read_meta(&p).unwrap(), meta);

        let minimal = RecordingMeta::new(400_000.0, "");
        write_meta(&p, &minimal).unwrap();
        assert_eq!(read_meta(&p).unwrap(), minimal);
    }

    #[test]
    fn meta_format_errors_name_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rec.cf32");
        fs::write(meta_path(&p), r#"{"description": "x"}"#).unwrap();
        match read_meta(&p) {
            Err(Error::Format(m)) => assert!(m.contains("sample_rate_hz")),
            other => panic!("{other:?}"),
        }
        fs::write(meta_path(&p), r#"{"sample_rate_hz": 1, "seed": "abc"}"#).unwrap();
        match read_meta(&p) {
            Err(Error::Format(m)) => assert!(m.contains("seed")),
            other => panic!("{other:?}"),
        }
        fs::write(meta_path(&p), "[1, 2").unwrap();
        assert!(matches!(read_meta(&p), Err(Error::Format(_))));
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(0.5f64.sqrt()), "0.70710678118654757");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(-0.125), "-0.125");
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(3.0), "3");
        assert_eq!(fmt_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt_g17(1e20), "1e+20");
        for v in [0.1, 1.0 / 3.0, -2.5e-5, 123456.789, 6.02e23, 1.5e-300] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    fn set_config() -> EstimatorConfig {
        EstimatorConfig::set(8, 1, vec![NormalizedCycleFrequency::new(0.125).unwrap()], false)
    }

    #[test]
    fn frame_csv_rows() {
        let cfg = set_config();
        let mut est = CyclicCorrelator::new(cfg.clone()).unwrap();
        let x = awgn(10, 1.0, 1).unwrap();
        let frames = est.push(&x, &x).unwrap();
        assert_eq!(frames.len(), 1);
        let mut buf = Vec::new();
        assert_eq!(write_frames_csv(&mut buf, &frames, &cfg).unwrap(), 3);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "frame_index,alpha,lag,re,im,mag");
        assert!(lines[1].starts_with("0,0.125,-1,"));
        assert!(lines[3].starts_with("0,0.125,1,"));
    }

    #[test]
    fn magnitude_column_of_a_known_value() {
        let cfg = EstimatorConfig::set(8, 0, vec![NormalizedCycleFrequency::new(0.0).unwrap()], false);
        let frame = CyclicFrame {
            frame_index: 0,
            start_abs: 0,
            layout: FrameLayout::for_config(&cfg),
            values: vec![Sample::new(0.5, -0.5)],
        };
        let mut buf = Vec::new();
        write_frames_csv(&mut buf, &[frame], &cfg).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,0,0.5,-0.5,0.70710678118654757");
    }

    #[test]
    fn average_csv_rows() {
        let cfg = EstimatorConfig::set(
            8,
            2,
            vec![
                NormalizedCycleFrequency::new(0.1).unwrap(),
                NormalizedCycleFrequency::new(0.2).unwrap(),
            ],
            false,
        );
        let mut est = CyclicCorrelator::new(cfg.clone()).unwrap();
        let x = awgn(40, 1.0, 2).unwrap();
        let frames = est.push(&x, &x).unwrap();
        let avg = average_frames(&frames, AverageMode::Magnitude).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_average_csv(&mut buf, &avg, &cfg).unwrap(), 10);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert_eq!(text.lines().next().unwrap(), "alpha,lag,mean_mag");

        let coh = average_frames(&frames, AverageMode::Coherent).unwrap();
        let mut buf = Vec::new();
        write_average_csv(&mut buf, &coh, &cfg).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("alpha,lag,mean_re,mean_im,mean_mag\n"));
    }

    #[test]
    fn layout_mismatch_is_usage_error() {
        let cfg = set_config();
        let frame = CyclicFrame {
            frame_index: 0,
            start_abs: 0,
            layout: FrameLayout::Full {
                num_lags: 1,
                win_len: 8,
            },
            values: vec![Sample::default(); 8],
        };
        let mut buf = Vec::new();
        assert!(matches!(
            write_frames_csv(&mut buf, &[frame], &cfg),
            Err(Error::Usage(_))
        ));
        assert!(matches!(write_frames_csv(&mut buf, &[], &cfg), Err(Error::Usage(_))));
    }
}
