//! Carrier frequency offset, additive noise, and CFO estimation from a
//! conjugate cyclic feature.
//!
//! A CFO of `eps` cycles/sample multiplies the record by `exp(j 2 pi eps n)`.
//! Ordinary correlations `x[n+m] x*[n]` only pick up the constant factor
//! `exp(j 2 pi eps m)`, while conjugate correlations `x[n+m] x[n]` rotate at
//! `2 eps`, which moves every conjugate cycle frequency by `2 eps`.

use crate::config::{full_bin_to_alpha, EstimatorConfig, NormalizedCycleFrequency};
use crate::error::{Error, Result};
use crate::estimator::{average_frames, AverageMode, CyclicCorrelator};
use crate::phase::oscillator;
use crate::siggen::awgn;
use crate::Sample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoSpec {
    pub eps: NormalizedCycleFrequency,
    pub phi0: f64,
}

impl CfoSpec {
    pub fn new(eps: f64, phi0: f64) -> Result<Self> {
        if !phi0.is_finite() {
            return Err(Error::usage("CFO phase offset must be finite"));
        }
        Ok(Self {
            eps: NormalizedCycleFrequency::new(eps)?,
            phi0,
        })
    }

    /// The offset that undoes this one.
    pub fn inverse(self) -> Result<Self> {
        Ok(Self {
            eps: NormalizedCycleFrequency::wrapped(-self.eps.value())?,
            phi0: -self.phi0,
        })
    }
}

/// `x[n] exp(j (2 pi eps n + phi0))`, with `n` counted from the record start.
pub fn apply_cfo(x: &[Sample], cfo: CfoSpec) -> Vec<Sample> {
    x.iter()
        .enumerate()
        .map(|(n, &v)| v * oscillator(cfo.eps.value(), n as i64, cfo.phi0))
        .collect()
}

pub fn mean_power(x: &[Sample]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Adds white Gaussian noise at `snr_db` relative to the mean power of `x`.
pub fn add_noise_snr(x: &[Sample], snr_db: f64, seed: u64) -> Result<Vec<Sample>> {
    if !snr_db.is_finite() {
        return Err(Error::usage(format!("SNR must be finite, got {snr_db}")));
    }
    let p = mean_power(x);
    if p == 0.0 {
        return Err(Error::usage("SNR undefined for an empty or all-zero record"));
    }
    let sigma = (p * 10f64.powf(-snr_db / 10.0)).sqrt();
    let w = awgn(x.len(), sigma, seed)?;
    Ok(x.iter().zip(w).map(|(a, b)| a + b).collect())
}

/// Magnitude-averaged conjugate cycle-frequency scan at lag 0, natural bin
/// order. Uses the first `num_frames` windows of `x`.
pub fn conj_scan(x: &[Sample], win_len: usize, num_frames: usize) -> Result<Vec<f64>> {
    if num_frames == 0 {
        return Err(Error::usage("scan needs at least one frame"));
    }
    let mut est = CyclicCorrelator::new(EstimatorConfig::full(win_len, vec![0], true))?;
    let needed = est.buffer_need() + (num_frames - 1) * win_len;
    if x.len() < needed {
        return Err(Error::usage(format!(
            "{num_frames} frames of length {win_len} need {needed} samples, record has {}",
            x.len()
        )));
    }
    let frames = est.push(&x[..needed], &x[..needed])?;
    Ok(average_frames(&frames, AverageMode::Magnitude)?.magnitudes())
}

/// Result of a conjugate-feature CFO estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoEstimate {
    pub eps_hat: f64,
    /// Refined location of the conjugate feature, cycles/sample.
    pub beta_peak: f64,
    /// Peak magnitude over the median magnitude of the search window.
    pub peak_to_median: f64,
}

/// Minimum peak-to-median ratio accepted as a genuine conjugate feature.
pub const FEATURE_THRESHOLD: f64 = 3.0;

/// Default half-width of the peak search around the expected feature,
/// cycles/sample. Conjugate features of CPM repeat every `1/T`, so the search
/// must stay inside `+-1/(2T)`; 1/16 is that bound at 8 samples/symbol.
pub const DEFAULT_SEARCH_HALFWIDTH: f64 = 1.0 / 16.0;

/// Estimates a CFO from the displacement of a known conjugate cycle
/// frequency: the conjugate feature expected at `expected_beta` appears at
/// `expected_beta + 2 eps`.
///
/// Searches bins within [`DEFAULT_SEARCH_HALFWIDTH`] of `expected_beta`, refines the peak with a
/// parabola through the log-magnitudes of the peak and its neighbours, and
/// returns half the offset. Fails with [`Error::NoFeature`] when the peak does
/// not clear [`FEATURE_THRESHOLD`] times the median of the search window.
pub fn estimate_cfo_ccf(
    x: &[Sample],
    expected_beta: NormalizedCycleFrequency,
    win_len: usize,
    num_frames: usize,
) -> Result<f64> {
    estimate_cfo_ccf_detailed(x, expected_beta, win_len, num_frames, DEFAULT_SEARCH_HALFWIDTH).map(|e| e.eps_hat)
}

/// [`estimate_cfo_ccf`] with an explicit search half-width (cycles/sample),
/// returning the peak diagnostics as well.
pub fn estimate_cfo_ccf_detailed(
    x: &[Sample],
    expected_beta: NormalizedCycleFrequency,
    win_len: usize,
    num_frames: usize,
    search_halfwidth: f64,
) -> Result<CfoEstimate> {
    if !(search_halfwidth > 0.0 && search_halfwidth <= 0.5) {
        return Err(Error::usage(format!(
            "search half-width must be in (0, 0.5], got {search_halfwidth}"
        )));
    }
    let scan = conj_scan(x, win_len, num_frames)?;
    let n = win_len;
    let beta0 = expected_beta.value();
    let reach = search_halfwidth * n as f64;

    // signed bin distance from the expected feature, wrapped onto the circle
    let offset = |k: usize| -> Result<f64> {
        let d = (full_bin_to_alpha(k, n)?.value() - beta0) * n as f64;
        Ok(d - (d / n as f64).round() * n as f64)
    };
    let mut window = Vec::new();
    for k in 0..n {
        let d = offset(k)?;
        if d.abs() < reach {
            window.push((k, d));
        }
    }
    if window.len() < 3 {
        return Err(Error::usage(format!("window length {n} too short for a CFO scan")));
    }
    let &(peak_bin, peak_offset) = window
        .iter()
        .max_by(|a, b| scan[a.0].total_cmp(&scan[b.0]))
        .expect("window is non-empty");

    let mut mags: Vec<f64> = window.iter().map(|&(k, _)| scan[k]).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    let peak = scan[peak_bin];
    let ratio = if median > 0.0 { peak / median } else { f64::INFINITY };
    if ratio.is_nan() || ratio <= FEATURE_THRESHOLD {
        return Err(Error::NoFeature(format!(
            "conjugate peak near {beta0} only {ratio:.2}x the median scan magnitude"
        )));
    }

    let left = scan[(peak_bin + n - 1) % n].max(f64::MIN_POSITIVE).ln();
    let centre = peak.ln();
    let right = scan[(peak_bin + 1) % n].max(f64::MIN_POSITIVE).ln();
    let denom = left - 2.0 * centre + right;
    let delta = if denom < 0.0 {
        (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let shift = (peak_offset + delta) / n as f64;
    Ok(CfoEstimate {
        eps_hat: shift / 2.0,
        beta_peak: beta0 + shift,
        peak_to_median: ratio,
    })
}
