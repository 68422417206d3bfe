//! Deterministic test-signal generators.
//!
//! All randomness comes from [`SampleRng`]: ChaCha8 seeded through
//! `seed_from_u64`, uniform doubles from the top 53 bits of each 64-bit word,
//! and Gaussian pairs from the Box-Muller transform. Streams are reproducible
//! for a given seed within this implementation.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::config::NormalizedCycleFrequency;
use crate::error::{Error, Result};
use crate::phase::oscillator;
use crate::Sample;

pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (multiply-shift reduction).
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.0.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Two independent standard normal variates.
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// Gaussian-filtered rectangular frequency pulse (GMSK family).
    GaussianGmsk,
    /// Rectangular frequency pulse over `L` symbols (LREC).
    Rectangular,
}

/// Parameters of a single-h CPM signal. The symbol period is `sps` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpmParams {
    /// Modulation index.
    pub h: f64,
    /// Even alphabet size; symbols are drawn from {±1, ±3, …, ±(M-1)}.
    pub alphabet_size: u32,
    /// Frequency-pulse length in symbols.
    pub pulse_len: usize,
    /// Bandwidth-time product (Gaussian pulse only).
    pub bt: f64,
    /// Samples per symbol.
    pub sps: usize,
    pub pulse: PulseKind,
}

impl CpmParams {
    /// Binary GMSK, h = 0.5, L = 4, BT = 0.25, 8 samples per symbol.
    pub fn gmsk_reference() -> Self {
        Self {
            h: 0.5,
            alphabet_size: 2,
            pulse_len: 4,
            bt: 0.25,
            sps: 8,
            pulse: PulseKind::GaussianGmsk,
        }
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::usage(format!("modulation index must be > 0, got {}", self.h)));
        }
        check_alphabet(self.alphabet_size)?;
        if self.pulse_len == 0 {
            return Err(Error::usage("pulse length must be at least one symbol"));
        }
        if self.sps == 0 {
            return Err(Error::usage("samples per symbol must be at least 1"));
        }
        if self.pulse == PulseKind::GaussianGmsk && !(self.bt.is_finite() && self.bt > 0.0) {
            return Err(Error::usage(format!("BT product must be > 0, got {}", self.bt)));
        }
        Ok(())
    }

    pub fn pulse_table(&self) -> Result<PulseTable> {
        match self.pulse {
            PulseKind::GaussianGmsk => gaussian_freq_pulse(self.bt, self.pulse_len, self.sps),
            PulseKind::Rectangular => rectangular_freq_pulse(self.pulse_len, self.sps),
        }
    }
}

fn check_alphabet(m: u32) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::usage(format!("alphabet size must be even and >= 2, got {m}")));
    }
    Ok(())
}

/// Frequency pulse `f` and phase response `g` sampled once per sample over
/// `L` symbols. Units: `f` in 1/samples, so `sum(f) = g[last] = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTable {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl PulseTable {
    fn from_shape(mut f: Vec<f64>) -> Self {
        let total: f64 = f.iter().sum();
        for v in &mut f {
            *v *= 0.5 / total;
        }
        let g = f
            .iter()
            .scan(0.0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        Self { f, g }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// Gaussian tail probability `Q(x)`.
fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// GMSK frequency pulse truncated to `L` symbols.
///
/// The continuous pulse, with `t` in symbols and centered at `L/2`, is
/// `Q(c (t - L/2 - 1/2)) - Q(c (t - L/2 + 1/2))` with
/// `c = 2 pi BT / sqrt(ln 2)`. It is sampled at sample midpoints
/// `t = (i + 1/2) / sps`, which keeps the table symmetric, and then scaled so
/// the samples sum to exactly one half.
pub fn gaussian_freq_pulse(bt: f64, pulse_len: usize, sps: usize) -> Result<PulseTable> {
    if !(bt.is_finite() && bt > 0.0) {
        return Err(Error::usage(format!("BT product must be > 0, got {bt}")));
    }
    if pulse_len == 0 || sps == 0 {
        return Err(Error::usage("pulse length and samples per symbol must be >= 1"));
    }
    let c = TAU * bt / std::f64::consts::LN_2.sqrt();
    let n = pulse_len * sps;
    let center = pulse_len as f64 / 2.0;
    let half = n / 2;
    // Evaluate one half and mirror it so f[i] == f[n-1-i] holds bit-for-bit.
    let mut f = vec![0.0; n];
    for i in 0..n - half {
        let t = (i as f64 + 0.5) / sps as f64 - center;
        f[i] = q_func(c * (t - 0.5)) - q_func(c * (t + 0.5));
        f[n - 1 - i] = f[i];
    }
    Ok(PulseTable::from_shape(f))
}

/// Rectangular (LREC) frequency pulse.
pub fn rectangular_freq_pulse(pulse_len: usize, sps: usize) -> Result<PulseTable> {
    if pulse_len == 0 || sps == 0 {
        return Err(Error::usage("pulse length and samples per symbol must be >= 1"));
    }
    Ok(PulseTable::from_shape(vec![1.0; pulse_len * sps]))
}

/// CPM complex envelope, `sps` samples per symbol, starting at phase zero.
///
/// Sample `n` has phase `2 pi h (sum_{finished k} a_k / 2 + sum_{active k}
/// a_k g[n - k sps])`, where a symbol is finished once its pulse has fully
/// elapsed.
pub fn cpm_modulate(params: &CpmParams, symbols: &[i32]) -> Result<Vec<Sample>> {
    params.validate()?;
    if symbols.is_empty() {
        return Err(Error::usage("no symbols to modulate"));
    }
    let m = params.alphabet_size as i32;
    if let Some(i) = symbols.iter().position(|&a| a % 2 == 0 || a.abs() > m - 1) {
        return Err(Error::data(format!(
            "symbol {} at index {i} not in the {m}-ary alphabet",
            symbols[i]
        )));
    }
    let pulse = params.pulse_table()?;
    let sps = params.sps;
    let span = pulse.len();
    let total = symbols.len() * sps;
    let mut out = Vec::with_capacity(total);
    // Sum of finished symbols; the finished phase is h * finished / 2 cycles.
    let mut finished: i64 = 0;
    let mut next_to_finish = 0usize;
    for n in 0..total {
        while next_to_finish < symbols.len() && n >= next_to_finish * sps + span {
            finished += symbols[next_to_finish] as i64;
            next_to_finish += 1;
        }
        let newest = n / sps;
        let mut active = 0.0;
        for (k, &a) in symbols.iter().enumerate().take(newest + 1).skip(next_to_finish) {
            active += a as f64 * pulse.g[n - k * sps];
        }
        let phase = TAU * params.h * (0.5 * finished as f64 + active);
        out.push(Sample::cis(phase));
    }
    Ok(out)
}

/// `count` i.i.d. symbols, uniform over {±1, ±3, …, ±(M-1)}.
pub fn random_symbols(alphabet_size: u32, count: usize, seed: u64) -> Result<Vec<i32>> {
    check_alphabet(alphabet_size)?;
    let mut rng = SampleRng::new(seed);
    let m = alphabet_size as i64;
    Ok((0..count)
        .map(|_| (2 * rng.below(alphabet_size as u64) as i64 - (m - 1)) as i32)
        .collect())
}

/// Complex exponential `exp(j (2 pi f0 n + phi0))`.
pub fn tone(f0: NormalizedCycleFrequency, phi0: f64, count: usize) -> Vec<Sample> {
    (0..count as i64).map(|n| oscillator(f0.value(), n, phi0)).collect()
}

/// Circular complex white Gaussian noise with total variance `sigma^2`.
pub fn awgn(count: usize, sigma: f64, seed: u64) -> Result<Vec<Sample>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::usage(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut rng = SampleRng::new(seed);
    let s = sigma / std::f64::consts::SQRT_2;
    Ok((0..count)
        .map(|_| {
            let (a, b) = rng.gaussian_pair();
            Sample::new(a * s, b * s)
        })
        .collect())
}

/// A GMSK/CPM record of exactly `len` samples with symbols drawn from `seed`.
pub fn cpm_record(params: &CpmParams, len: usize, seed: u64) -> Result<Vec<Sample>> {
    params.validate()?;
    let count = len.div_ceil(params.sps).max(1);
    let symbols = random_symbols(params.alphabet_size, count, seed)?;
    let mut x = cpm_modulate(params, &symbols)?;
    x.truncate(len);
    Ok(x)
}
