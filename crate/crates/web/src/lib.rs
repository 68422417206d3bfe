//! wasm-bindgen exports for the browser demo in `www/`.
//!
//! Every export has a plain Rust counterpart returning [`cyclocorr::Result`]
//! so the numerics can be tested natively.

use cyclocorr::impair::{apply_cfo, CfoSpec};
use cyclocorr::siggen::{cpm_record, gaussian_freq_pulse, CpmParams};
use cyclocorr::{average_frames, AverageMode, CyclicCorrelator, EstimatorConfig, Result};
use wasm_bindgen::prelude::*;

/// Parameters shared by the GMSK views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub h: f64,
    pub bt: f64,
    pub win_len: usize,
    pub frames: usize,
    pub seed: u64,
}

impl Record {
    fn params(&self) -> CpmParams {
        CpmParams {
            bt: self.bt,
            ..CpmParams::gmsk_reference().with_h(self.h)
        }
    }

    fn samples(&self, span: usize) -> Result<Vec<cyclocorr::Sample>> {
        cpm_record(
            &self.params(),
            span + (self.frames.max(1) - 1) * self.win_len,
            self.seed,
        )
    }
}

/// `|R|` against lag `-max_lag..=max_lag` at one (conjugate) cycle frequency.
pub fn profile(rec: Record, alpha: f64, conj: bool, max_lag: usize, coherent: bool) -> Result<Vec<f64>> {
    let cfg = EstimatorConfig::set_from_values(rec.win_len, max_lag, &[alpha], conj)?;
    let mut est = CyclicCorrelator::new(cfg)?;
    let x = rec.samples(est.buffer_need())?;
    let frames = est.push(&x, &x)?;
    let mode = if coherent {
        AverageMode::Coherent
    } else {
        AverageMode::Magnitude
    };
    Ok(average_frames(&frames, mode)?.magnitudes())
}

/// Magnitude-averaged sweep over all `win_len` cycle-frequency bins at one
/// lag, after a CFO of `cfo` cycles/sample. Bins are returned in ascending
/// frequency order, starting at -1/2.
pub fn scan(rec: Record, lag: i64, conj: bool, cfo: f64) -> Result<Vec<f64>> {
    let cfg = EstimatorConfig::full(rec.win_len, vec![lag], conj);
    let mut est = CyclicCorrelator::new(cfg)?;
    let x = apply_cfo(&rec.samples(est.buffer_need())?, CfoSpec::new(cfo, 0.0)?);
    let frames = est.push(&x, &x)?;
    let mut mags = average_frames(&frames, AverageMode::Magnitude)?.magnitudes();
    mags.rotate_left(rec.win_len.div_ceil(2));
    Ok(mags)
}

/// Sampled frequency pulse followed by its running sum, `2 L sps` values.
pub fn pulse(bt: f64, pulse_len: usize, sps: usize) -> Result<Vec<f64>> {
    let t = gaussian_freq_pulse(bt, pulse_len, sps)?;
    Ok(t.f.iter().chain(&t.g).copied().collect())
}

fn js(e: cyclocorr::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cyclic_profile(
    h: f64,
    bt: f64,
    alpha: f64,
    conj: bool,
    win_len: usize,
    max_lag: usize,
    frames: usize,
    seed: u64,
    coherent: bool,
) -> Result<Vec<f64>, JsError> {
    let rec = Record {
        h,
        bt,
        win_len,
        frames,
        seed,
    };
    profile(rec, alpha, conj, max_lag, coherent).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cycle_scan(
    h: f64,
    bt: f64,
    lag: i32,
    conj: bool,
    cfo: f64,
    win_len: usize,
    frames: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let rec = Record {
        h,
        bt,
        win_len,
        frames,
        seed,
    };
    scan(rec, lag as i64, conj, cfo).map_err(js)
}

#[wasm_bindgen]
pub fn gmsk_pulse(bt: f64, pulse_len: usize, sps: usize) -> Result<Vec<f64>, JsError> {
    pulse(bt, pulse_len, sps).map_err(js)
}
