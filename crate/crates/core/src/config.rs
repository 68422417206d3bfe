//! Estimator configuration and its validation.

use std::fmt;

use crate::error::{Error, Result};

/// A cycle frequency (or conjugate cycle frequency) normalized to the sample
/// rate, in cycles/sample. Always lies in `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedCycleFrequency(f64);

impl NormalizedCycleFrequency {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (-0.5..0.5).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::range(format!(
                "normalized cycle frequency {value} outside [-0.5, 0.5)"
            )))
        }
    }

    /// Folds any finite frequency onto the principal interval `[-1/2, 1/2)`.
    pub fn wrapped(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::range(format!("non-finite frequency {value}")));
        }
        let w = value - (value + 0.5).floor();
        // (value + 0.5).floor() can round so that w lands exactly on 0.5
        Self::new(if w >= 0.5 { w - 1.0 } else { w })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for NormalizedCycleFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for NormalizedCycleFrequency {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

/// Which lags an estimator evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LagSpec {
    /// Every lag in `-max_lag..=max_lag`.
    Symmetric { max_lag: usize },
    /// A strictly increasing list of lags.
    Explicit(Vec<i64>),
}

impl LagSpec {
    /// The lags in ascending order.
    pub fn lags(&self) -> Vec<i64> {
        match self {
            LagSpec::Symmetric { max_lag } => {
                let m = *max_lag as i64;
                (-m..=m).collect()
            }
            LagSpec::Explicit(l) => l.clone(),
        }
    }

    /// Largest positive lag, or zero.
    pub fn m_plus(&self) -> usize {
        match self {
            LagSpec::Symmetric { max_lag } => *max_lag,
            LagSpec::Explicit(l) => l.iter().copied().max().unwrap_or(0).max(0) as usize,
        }
    }

    /// Magnitude of the most negative lag, or zero.
    pub fn m_minus(&self) -> usize {
        match self {
            LagSpec::Symmetric { max_lag } => *max_lag,
            LagSpec::Explicit(l) => l.iter().copied().min().unwrap_or(0).min(0).unsigned_abs() as usize,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LagSpec::Symmetric { max_lag } => 2 * max_lag + 1,
            LagSpec::Explicit(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fixed cycle-frequency list, symmetric lag range.
    Set,
    /// All `N` DFT cycle-frequency bins, explicit lag list.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub mode: Mode,
    /// `true` evaluates the conjugate correlation `x[n+m] y[n]`; `false` the
    /// ordinary correlation `x[n+m] y*[n]`.
    pub conj: bool,
    /// Observation window length `N`.
    pub win_len: usize,
    /// Cycle frequencies (Set mode only).
    pub alphas: Vec<NormalizedCycleFrequency>,
    pub lag_spec: LagSpec,
}

impl EstimatorConfig {
    pub fn set(win_len: usize, max_lag: usize, alphas: Vec<NormalizedCycleFrequency>, conj: bool) -> Self {
        Self {
            mode: Mode::Set,
            conj,
            win_len,
            alphas,
            lag_spec: LagSpec::Symmetric { max_lag },
        }
    }

    pub fn full(win_len: usize, lags: Vec<i64>, conj: bool) -> Self {
        Self {
            mode: Mode::Full,
            conj,
            win_len,
            alphas: Vec::new(),
            lag_spec: LagSpec::Explicit(lags),
        }
    }

    /// Convenience constructor taking raw cycle frequencies.
    pub fn set_from_values(win_len: usize, max_lag: usize, alphas: &[f64], conj: bool) -> Result<Self> {
        let alphas = alphas
            .iter()
            .map(|&a| NormalizedCycleFrequency::new(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::set(win_len, max_lag, alphas, conj))
    }

    pub fn m_plus(&self) -> usize {
        self.lag_spec.m_plus()
    }

    pub fn m_minus(&self) -> usize {
        self.lag_spec.m_minus()
    }

    /// Number of buffered samples needed before the first frame can be
    /// produced; this is also the output delay in samples.
    ///
    /// Every window needs `x` from `k0 - M-` through `k0 + N - 1 + M+`, so the
    /// requirement is `N + M+ + M-` in both modes (`N + 2 max_lag` in Set mode).
    pub fn buffer_need(&self) -> usize {
        self.win_len + self.m_plus() + self.m_minus()
    }

    /// Absolute index of sample `n = 0` of the first window.
    pub fn first_window_start(&self) -> usize {
        self.m_minus()
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_config(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigViolation {
    EmptyAlphas,
    AlphasInFullMode,
    EmptyLagList,
    LagsNotIncreasing,
    SetModeNeedsSymmetricLags,
    FullModeNeedsExplicitLags,
    WinLenTooShort { win_len: usize },
    WinLenTooSmallForLags { win_len: usize, max_lag: usize },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::EmptyAlphas => f.write_str("empty alpha list"),
            ConfigViolation::AlphasInFullMode => f.write_str("alpha list given in full mode"),
            ConfigViolation::EmptyLagList => f.write_str("empty lag list"),
            ConfigViolation::LagsNotIncreasing => f.write_str("lag list not strictly increasing"),
            ConfigViolation::SetModeNeedsSymmetricLags => f.write_str("set mode requires a symmetric max_lag range"),
            ConfigViolation::FullModeNeedsExplicitLags => f.write_str("full mode requires an explicit lag list"),
            ConfigViolation::WinLenTooShort { win_len } => {
                write!(f, "win_len {win_len} below minimum of 2")
            }
            ConfigViolation::WinLenTooSmallForLags { win_len, max_lag } => write!(
                f,
                "win_len too small vs max_lag (win_len {win_len} must exceed 2*{max_lag})"
            ),
        }
    }
}

/// Returns every invariant `config` violates; an empty list means valid.
pub fn validate_config(config: &EstimatorConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    match config.mode {
        Mode::Set => {
            if config.alphas.is_empty() {
                out.push(ConfigViolation::EmptyAlphas);
            }
            if !matches!(config.lag_spec, LagSpec::Symmetric { .. }) {
                out.push(ConfigViolation::SetModeNeedsSymmetricLags);
            }
        }
        Mode::Full => {
            if !config.alphas.is_empty() {
                out.push(ConfigViolation::AlphasInFullMode);
            }
            if !matches!(config.lag_spec, LagSpec::Explicit(_)) {
                out.push(ConfigViolation::FullModeNeedsExplicitLags);
            }
        }
    }
    if let LagSpec::Explicit(lags) = &config.lag_spec {
        if lags.is_empty() {
            out.push(ConfigViolation::EmptyLagList);
        } else if lags.windows(2).any(|w| w[0] >= w[1]) {
            out.push(ConfigViolation::LagsNotIncreasing);
        }
    }
    if config.win_len < 2 {
        out.push(ConfigViolation::WinLenTooShort {
            win_len: config.win_len,
        });
    }
    let max_lag = config.m_plus().max(config.m_minus());
    if config.win_len <= 2 * max_lag {
        out.push(ConfigViolation::WinLenTooSmallForLags {
            win_len: config.win_len,
            max_lag,
        });
    }
    out
}

/// Maps DFT bin `k` of an `n`-point transform to its cycle frequency:
/// `k/n` for `k < n/2`, otherwise `k/n - 1`.
pub fn full_bin_to_alpha(k: usize, n: usize) -> Result<NormalizedCycleFrequency> {
    if k >= n {
        return Err(Error::range(format!("bin {k} out of range for {n}-point grid")));
    }
    let a = if 2 * k < n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    };
    NormalizedCycleFrequency::new(a)
}
