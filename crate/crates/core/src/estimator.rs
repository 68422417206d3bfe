//! Streaming cyclic (conjugate) cross-correlation.
//!
//! For a window starting at absolute sample `k0` the estimator produces
//!
//! ```text
//! R[a, m] = exp(-j 2 pi a k0) / N * sum_{n=0}^{N-1} x[k0+n+m] y'[k0+n] exp(-j 2 pi a n)
//! ```
//!
//! where `y'` is `conj(y)` for the ordinary correlation and `y` itself for the
//! conjugate correlation. The leading factor references every window to
//! absolute time, so frames from consecutive windows share one phase origin
//! and can be averaged coherently. Windows do not overlap: frame `f` starts at
//! `k0 = M- + f N`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::config::{EstimatorConfig, Mode, NormalizedCycleFrequency};
use crate::error::{Error, Result};
use crate::frame::{CyclicFrame, FrameLayout};
use crate::phase::rotor;
use crate::Sample;

/// How Set mode evaluates the lag sums. All strategies compute the same exact
/// sum; they differ only in cost and rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetStrategy {
    /// Pick per configuration from a rough operation count.
    #[default]
    Auto,
    /// `(2M+1) N` multiply-accumulates per cycle frequency.
    Direct,
    /// Zero-padded FFT cross-correlation.
    FftCorrelation,
}

/// Streaming estimator state for one pair of input streams.
///
/// Not meant for concurrent mutation; it is `Send`, so it can move between
/// threads between calls to [`push`](Self::push).
#[derive(Clone)]
pub struct CyclicCorrelator {
    config: EstimatorConfig,
    layout: FrameLayout,
    need: usize,
    // Pending samples; index `head` holds absolute sample `frames_emitted * N`.
    x: Vec<Sample>,
    y: Vec<Sample>,
    head: usize,
    consumed: u64,
    frames_emitted: u64,
    kernel: Kernel,
}

#[derive(Clone)]
enum Kernel {
    Set(SetKernel),
    Full(FullKernel),
}

#[derive(Clone)]
struct SetKernel {
    max_lag: usize,
    conj: bool,
    // exp(-j 2 pi a n) for n in 0..N, one row per cycle frequency
    twiddles: Vec<Vec<Sample>>,
    // exp(-j 2 pi a k0) of the next window
    acc: Vec<Sample>,
    // exp(-j 2 pi a N)
    step: Vec<Sample>,
    engine: SetEngine,
}

#[derive(Clone)]
struct FullKernel {
    lags: Vec<i64>,
    m_minus: usize,
    conj: bool,
    // exp(-j 2 pi k k0 / N); constant across frames because the hop is N
    compensation: Vec<Sample>,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Sample>,
}

impl CyclicCorrelator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        Self::with_strategy(config, SetStrategy::Auto)
    }

    /// Like [`new`](Self::new) but pins the Set-mode summation strategy.
    pub fn with_strategy(config: EstimatorConfig, strategy: SetStrategy) -> Result<Self> {
        config.validate()?;
        let n = config.win_len;
        let kernel = match config.mode {
            Mode::Set => {
                let alphas: Vec<f64> = config.alphas.iter().map(|a| a.value()).collect();
                let max_lag = config.m_plus();
                let k0 = config.first_window_start() as i64;
                Kernel::Set(SetKernel {
                    max_lag,
                    conj: config.conj,
                    twiddles: twiddle_rows(&alphas, n),
                    acc: alphas.iter().map(|&a| rotor(a, k0)).collect(),
                    step: alphas.iter().map(|&a| rotor(a, n as i64)).collect(),
                    engine: SetEngine::new(strategy, n, max_lag),
                })
            }
            Mode::Full => {
                let m_minus = config.m_minus();
                Kernel::Full(FullKernel {
                    lags: config.lag_spec.lags(),
                    m_minus,
                    conj: config.conj,
                    compensation: bin_compensation(n, m_minus as i64),
                    fft: FftPlanner::new().plan_fft_forward(n),
                    buf: vec![Sample::default(); n],
                })
            }
        };
        Ok(Self {
            layout: FrameLayout::for_config(&config),
            need: config.buffer_need(),
            x: Vec::new(),
            y: Vec::new(),
            head: 0,
            consumed: 0,
            frames_emitted: 0,
            kernel,
            config,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    /// Samples required before the first frame; equals the output delay.
    pub fn buffer_need(&self) -> usize {
        self.need
    }

    /// Total samples accepted per input.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn frames_emitted(&self) -> u64 {
        self.frames_emitted
    }

    /// Per cycle frequency phasor `exp(-j 2 pi a k0)` of the next window.
    /// Empty in Full mode.
    pub fn phase_accumulators(&self) -> &[Sample] {
        match &self.kernel {
            Kernel::Set(k) => &k.acc,
            Kernel::Full(_) => &[],
        }
    }

    /// Number of frames that can be produced from `samples` inputs.
    pub fn frames_for(&self, samples: u64) -> u64 {
        let need = self.need as u64;
        if samples < need {
            0
        } else {
            (samples - need) / self.config.win_len as u64 + 1
        }
    }

    /// Consumes one chunk of each stream and returns every frame completed by
    /// it. The output depends only on the concatenated input, never on how it
    /// was split into chunks. A rejected chunk leaves the state untouched.
    pub fn push(&mut self, x: &[Sample], y: &[Sample]) -> Result<Vec<CyclicFrame>> {
        if x.len() != y.len() {
            return Err(Error::usage(format!(
                "chunk length mismatch: x has {}, y has {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(i) = x.iter().zip(y).position(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::NonFinite {
                index: self.consumed + i as u64,
            });
        }
        self.x.extend_from_slice(x);
        self.y.extend_from_slice(y);
        self.consumed += x.len() as u64;

        let n = self.config.win_len;
        let mut frames = Vec::new();
        while self.x.len() - self.head >= self.need {
            frames.push(self.emit());
            self.head += n;
        }
        if self.head > 0 {
            self.x.drain(..self.head);
            self.y.drain(..self.head);
            self.head = 0;
        }
        Ok(frames)
    }

    fn emit(&mut self) -> CyclicFrame {
        let n = self.config.win_len;
        let m_minus = self.config.m_minus();
        let xw = &self.x[self.head..self.head + self.need];
        let yw = &self.y[self.head + m_minus..self.head + m_minus + n];
        let mut values = vec![Sample::default(); self.layout.len()];
        match &mut self.kernel {
            Kernel::Set(k) => {
                set_window(
                    xw,
                    yw,
                    &k.twiddles,
                    &k.acc,
                    k.max_lag,
                    k.conj,
                    &mut k.engine,
                    &mut values,
                );
                for (acc, step) in k.acc.iter_mut().zip(&k.step) {
                    *acc *= step;
                    *acc /= acc.norm();
                }
            }
            Kernel::Full(k) => full_window(
                xw,
                yw,
                &k.lags,
                k.m_minus,
                k.conj,
                &k.compensation,
                k.fft.as_ref(),
                &mut k.buf,
                &mut values,
            ),
        }
        let frame = CyclicFrame {
            frame_index: self.frames_emitted,
            start_abs: m_minus as u64 + self.frames_emitted * n as u64,
            layout: self.layout,
            values,
        };
        self.frames_emitted += 1;
        frame
    }
}

fn twiddle_rows(alphas: &[f64], n: usize) -> Vec<Vec<Sample>> {
    alphas
        .iter()
        .map(|&a| (0..n as i64).map(|i| rotor(a, i)).collect())
        .collect()
}

fn bin_compensation(n: usize, k0: i64) -> Vec<Sample> {
    let k0 = k0.rem_euclid(n as i64) as usize;
    (0..n)
        .map(|k| {
            let r = (k * k0) % n;
            Sample::cis(-std::f64::consts::TAU * r as f64 / n as f64)
        })
        .collect()
}

#[inline]
fn maybe_conj(v: Sample, conj_flag: bool) -> Sample {
    // Ordinary correlation conjugates y; the conjugate correlation does not.
    if conj_flag {
        v
    } else {
        v.conj()
    }
}

#[derive(Clone)]
enum SetEngine {
    Direct {
        z: Vec<Sample>,
    },
    Fft {
        size: usize,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        xs: Vec<Sample>,
        ws: Vec<Sample>,
        z: Vec<Sample>,
    },
}

impl SetEngine {
    fn new(strategy: SetStrategy, n: usize, max_lag: usize) -> Self {
        let size = (n + 2 * max_lag).next_power_of_two();
        let use_fft = match strategy {
            SetStrategy::Direct => false,
            SetStrategy::FftCorrelation => true,
            SetStrategy::Auto => {
                let direct = (2 * max_lag + 1) * n;
                let fft = 6 * size * (size.trailing_zeros() as usize).max(1);
                direct > fft
            }
        };
        if use_fft {
            let mut planner = FftPlanner::new();
            SetEngine::Fft {
                size,
                fwd: planner.plan_fft_forward(size),
                inv: planner.plan_fft_inverse(size),
                xs: vec![Sample::default(); size],
                ws: vec![Sample::default(); size],
                z: vec![Sample::default(); n],
            }
        } else {
            SetEngine::Direct {
                z: vec![Sample::default(); n],
            }
        }
    }
}

// xw: N + 2M samples starting at absolute k0 - M; yw: N samples starting at k0.
#[allow(clippy::too_many_arguments)]
fn set_window(
    xw: &[Sample],
    yw: &[Sample],
    twiddles: &[Vec<Sample>],
    leading: &[Sample],
    max_lag: usize,
    conj: bool,
    engine: &mut SetEngine,
    out: &mut [Sample],
) {
    let n = yw.len();
    let width = 2 * max_lag + 1;
    let inv_n = 1.0 / n as f64;
    match engine {
        SetEngine::Direct { z } => {
            for (a, tw) in twiddles.iter().enumerate() {
                for ((zi, &yi), &t) in z.iter_mut().zip(yw).zip(tw) {
                    *zi = maybe_conj(yi, conj) * t;
                }
                let scale = leading[a] * inv_n;
                let row = &mut out[a * width..(a + 1) * width];
                for (s, r) in row.iter_mut().enumerate() {
                    let acc: Sample = xw[s..s + n].iter().zip(z.iter()).map(|(&xv, &zv)| xv * zv).sum();
                    *r = acc * scale;
                }
            }
        }
        SetEngine::Fft {
            size,
            fwd,
            inv,
            xs,
            ws,
            z,
        } => {
            let size = *size;
            xs[..xw.len()].copy_from_slice(xw);
            xs[xw.len()..].fill(Sample::default());
            fwd.process(xs);
            for (a, tw) in twiddles.iter().enumerate() {
                for ((zi, &yi), &t) in z.iter_mut().zip(yw).zip(tw) {
                    *zi = maybe_conj(yi, conj) * t;
                }
                // time-reversed z so that the circular convolution with x
                // yields sum_n x[s+n] z[n] at index s
                ws.fill(Sample::default());
                ws[0] = z[0];
                for i in 1..n {
                    ws[size - i] = z[i];
                }
                fwd.process(ws);
                for (w, &xf) in ws.iter_mut().zip(xs.iter()) {
                    *w *= xf;
                }
                inv.process(ws);
                let scale = leading[a] * (inv_n / size as f64);
                let row = &mut out[a * width..(a + 1) * width];
                for (r, &c) in row.iter_mut().zip(ws.iter()) {
                    *r = c * scale;
                }
            }
        }
    }
}

// xw starts at absolute k0 - M-; yw holds N samples starting at k0.
#[allow(clippy::too_many_arguments)]
fn full_window(
    xw: &[Sample],
    yw: &[Sample],
    lags: &[i64],
    m_minus: usize,
    conj: bool,
    compensation: &[Sample],
    fft: &dyn Fft<f64>,
    buf: &mut [Sample],
    out: &mut [Sample],
) {
    let n = yw.len();
    let inv_n = 1.0 / n as f64;
    for (l, &m) in lags.iter().enumerate() {
        let off = (m_minus as i64 + m) as usize;
        for ((b, &xv), &yv) in buf.iter_mut().zip(&xw[off..off + n]).zip(yw) {
            *b = xv * maybe_conj(yv, conj);
        }
        fft.process(buf);
        for ((o, &b), &c) in out[l * n..(l + 1) * n].iter_mut().zip(buf.iter()).zip(compensation) {
            *o = b * c * inv_n;
        }
    }
}

/// Evaluates one Set-mode window.
///
/// `yw` holds the `N` samples starting at absolute index `k0`; `xw` holds the
/// `N + 2 max_lag` samples starting at `k0 - max_lag`. The result uses the
/// Set layout (cycle-frequency major, lags ascending).
pub fn compute_set_window(
    xw: &[Sample],
    yw: &[Sample],
    alphas: &[NormalizedCycleFrequency],
    max_lag: usize,
    conj: bool,
    k0: i64,
) -> Result<Vec<Sample>> {
    compute_set_window_with(xw, yw, alphas, max_lag, conj, k0, SetStrategy::Auto)
}

/// [`compute_set_window`] with an explicit summation strategy.
pub fn compute_set_window_with(
    xw: &[Sample],
    yw: &[Sample],
    alphas: &[NormalizedCycleFrequency],
    max_lag: usize,
    conj: bool,
    k0: i64,
    strategy: SetStrategy,
) -> Result<Vec<Sample>> {
    let n = yw.len();
    if n == 0 || xw.len() != n + 2 * max_lag {
        return Err(Error::contract(format!(
            "set window expects |y| = N > 0 and |x| = N + 2M, got |y| = {n}, |x| = {}, M = {max_lag}",
            xw.len()
        )));
    }
    let a: Vec<f64> = alphas.iter().map(|a| a.value()).collect();
    let leading: Vec<Sample> = a.iter().map(|&a| rotor(a, k0)).collect();
    let mut engine = SetEngine::new(strategy, n, max_lag);
    let mut out = vec![Sample::default(); a.len() * (2 * max_lag + 1)];
    set_window(
        xw,
        yw,
        &twiddle_rows(&a, n),
        &leading,
        max_lag,
        conj,
        &mut engine,
        &mut out,
    );
    Ok(out)
}

/// Evaluates one Full-mode window.
///
/// `yw` holds the `N` samples starting at absolute index `k0`; `xw` starts at
/// `k0 - M-` (with `M-` the magnitude of the most negative lag, or zero) and
/// must reach `k0 + N - 1 + M+`. The result uses the Full layout (lag major,
/// bins in natural DFT order).
pub fn compute_full_window(xw: &[Sample], yw: &[Sample], lags: &[i64], conj: bool, k0: i64) -> Result<Vec<Sample>> {
    let n = yw.len();
    if n == 0 || lags.is_empty() {
        return Err(Error::contract("full window needs N > 0 and at least one lag"));
    }
    let m_minus = lags.iter().copied().min().unwrap_or(0).min(0).unsigned_abs() as usize;
    let m_plus = lags.iter().copied().max().unwrap_or(0).max(0) as usize;
    if xw.len() < n + m_minus + m_plus {
        return Err(Error::contract(format!(
            "full window x covers {} samples, lags {m_minus}/{m_plus} need {}",
            xw.len(),
            n + m_minus + m_plus
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf = vec![Sample::default(); n];
    let mut out = vec![Sample::default(); lags.len() * n];
    full_window(
        xw,
        yw,
        lags,
        m_minus,
        conj,
        &bin_compensation(n, k0),
        fft.as_ref(),
        &mut buf,
        &mut out,
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AverageMode {
    /// Element-wise complex mean.
    Coherent,
    /// Element-wise mean of magnitudes.
    #[default]
    Magnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AveragedValues {
    Coherent(Vec<Sample>),
    Magnitude(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedFrame {
    pub layout: FrameLayout,
    pub frames: usize,
    pub values: AveragedValues,
}

impl AveragedFrame {
    /// Magnitude per element: `|mean|` for coherent averages, the mean
    /// magnitude otherwise.
    pub fn magnitudes(&self) -> Vec<f64> {
        match &self.values {
            AveragedValues::Coherent(v) => v.iter().map(|c| c.norm()).collect(),
            AveragedValues::Magnitude(v) => v.clone(),
        }
    }
}

pub fn average_frames(frames: &[CyclicFrame], mode: AverageMode) -> Result<AveragedFrame> {
    let first = frames
        .first()
        .ok_or_else(|| Error::usage("cannot average an empty frame list"))?;
    let layout = first.layout;
    if let Some(f) = frames.iter().find(|f| f.layout != layout) {
        return Err(Error::usage(format!(
            "frame {} has layout {:?}, expected {:?}",
            f.frame_index, f.layout, layout
        )));
    }
    let count = frames.len() as f64;
    let len = layout.len();
    let values = match mode {
        AverageMode::Coherent => {
            let mut acc = vec![Sample::default(); len];
            for f in frames {
                for (a, v) in acc.iter_mut().zip(&f.values) {
                    *a += v;
                }
            }
            AveragedValues::Coherent(acc.into_iter().map(|a| a / count).collect())
        }
        AverageMode::Magnitude => {
            let mut acc = vec![0.0; len];
            for f in frames {
                for (a, v) in acc.iter_mut().zip(&f.values) {
                    *a += v.norm();
                }
            }
            AveragedValues::Magnitude(acc.into_iter().map(|a| a / count).collect())
        }
    };
    Ok(AveragedFrame {
        layout,
        frames: frames.len(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LagSpec;
    use crate::reference::cyclic_xcorr_direct;
    use crate::siggen::{awgn, tone};

    fn ncf(v: f64) -> NormalizedCycleFrequency {
        NormalizedCycleFrequency::new(v).unwrap()
    }

    fn ones(n: usize) -> Vec<Sample> {
        vec![Sample::new(1.0, 0.0); n]
    }

    #[test]
    fn create_reports_buffer_need() {
        let s = CyclicCorrelator::new(EstimatorConfig::set(8, 2, vec![ncf(0.125)], false)).unwrap();
        assert_eq!(s.buffer_need(), 12);
        assert_eq!(s.consumed(), 0);
        assert_eq!(s.phase_accumulators().len(), 1);
        // Mixed-sign lags need both tails of x around the y window.
        let f = CyclicCorrelator::new(EstimatorConfig::full(16, vec![-3, 5], false)).unwrap();
        assert_eq!(f.buffer_need(), 24);
        let f = CyclicCorrelator::new(EstimatorConfig::full(16, vec![0, 5], false)).unwrap();
        assert_eq!(f.buffer_need(), 21);
        // lag 5 needs N > 10
        assert!(CyclicCorrelator::new(EstimatorConfig::full(8, vec![-3, 5], false)).is_err());
    }

    #[test]
    fn create_rejects_invalid_config() {
        let err = CyclicCorrelator::new(EstimatorConfig::set(8, 2, vec![], false))
            .err()
            .unwrap();
        match err {
            Error::Config(v) => assert!(v.contains(&crate::ConfigViolation::EmptyAlphas)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn push_rejects_mismatched_and_non_finite_chunks() {
        let mut s = CyclicCorrelator::new(EstimatorConfig::set(8, 1, vec![ncf(0.0)], false)).unwrap();
        assert!(matches!(s.push(&ones(3), &ones(2)), Err(Error::Usage(_))));
        s.push(&ones(5), &ones(5)).unwrap();
        let mut bad = ones(4);
        bad[2].im = f64::NAN;
        match s.push(&ones(4), &bad) {
            Err(Error::NonFinite { index }) => assert_eq!(index, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(s.consumed(), 5);
    }

    #[test]
    fn tone_acf_and_ccf_identities() {
        let f0 = 0.125;
        let x = tone(ncf(f0), 0.0, 200);
        let mut s = CyclicCorrelator::new(EstimatorConfig::set(64, 2, vec![ncf(0.0)], false)).unwrap();
        let frames = s.push(&x, &x).unwrap();
        assert!(!frames.is_empty());
        for f in &frames {
            let v = f.get(0, 2).unwrap();
            assert!((v - Sample::new(0.0, 1.0)).norm() < 1e-12);
        }
        let mut s = CyclicCorrelator::new(EstimatorConfig::set(64, 2, vec![ncf(0.25)], true)).unwrap();
        for f in s.push(&x, &x).unwrap() {
            let v = f.get(0, 1).unwrap();
            assert!((v - Sample::cis(std::f64::consts::FRAC_PI_4)).norm() < 1e-12);
        }
    }

    #[test]
    fn set_window_on_ones() {
        let v = compute_set_window(&ones(12), &ones(8), &[ncf(0.0), ncf(0.125)], 2, false, 0).unwrap();
        for m in 0..5 {
            assert!((v[m] - Sample::new(1.0, 0.0)).norm() < 1e-15);
            assert!(v[5 + m].norm() < 1e-12);
        }
        let bad = compute_set_window(&ones(11), &ones(8), &[ncf(0.0)], 2, false, 0);
        assert!(matches!(bad, Err(Error::Contract(_))));
    }

    #[test]
    fn full_window_on_ones() {
        let v = compute_full_window(&ones(9), &ones(8), &[0, 1], false, 0).unwrap();
        assert_eq!(v.len(), 16);
        assert!((v[0] - Sample::new(1.0, 0.0)).norm() < 1e-15);
        assert!(v[1..8].iter().all(|c| c.norm() < 1e-15));
        for k in 0..8 {
            assert!((v[k] - v[8 + k]).norm() < 1e-15);
        }
        let short = compute_full_window(&ones(8), &ones(8), &[0, 1], false, 0);
        assert!(matches!(short, Err(Error::Contract(_))));
    }

    #[test]
    fn set_window_matches_direct_oracle() {
        let (n, m, k0) = (64usize, 3usize, 17i64);
        let x = awgn(200, 1.0, 1).unwrap();
        let y = awgn(200, 1.0, 2).unwrap();
        let alpha = ncf(3.0 / 64.0);
        for conj in [false, true] {
            for strategy in [SetStrategy::Direct, SetStrategy::FftCorrelation] {
                let xw = &x[(k0 as usize - m)..(k0 as usize + n + m)];
                let yw = &y[k0 as usize..k0 as usize + n];
                let v = compute_set_window_with(xw, yw, &[alpha], m, conj, k0, strategy).unwrap();
                for (i, lag) in (-(m as i64)..=m as i64).enumerate() {
                    let r = cyclic_xcorr_direct(&x, &y, alpha.value(), lag, conj, k0, n).unwrap();
                    assert!((v[i] - r).norm() < 1e-12, "conj={conj} {strategy:?} lag={lag}");
                }
            }
        }
    }

    #[test]
    fn frames_are_chunking_invariant() {
        let x = awgn(128, 1.0, 3).unwrap();
        let y = awgn(128, 1.0, 4).unwrap();
        let cfg = EstimatorConfig::set(16, 3, vec![ncf(0.1), ncf(-0.2)], false);
        let mut whole = CyclicCorrelator::new(cfg.clone()).unwrap();
        let a = whole.push(&x, &y).unwrap();
        let mut split = CyclicCorrelator::new(cfg).unwrap();
        let mut b = Vec::new();
        let mut pos = 0;
        for len in [3, 5, 120] {
            b.extend(split.push(&x[pos..pos + len], &y[pos..pos + len]).unwrap());
            pos += len;
        }
        assert_eq!(a, b);
        assert_eq!(a.len() as u64, whole.frames_for(128));
    }

    #[test]
    fn first_frame_waits_for_buffer_need() {
        let cfg = EstimatorConfig::full(16, vec![-3, 5], true);
        let mut s = CyclicCorrelator::new(cfg).unwrap();
        let x = awgn(80, 1.0, 9).unwrap();
        let mut emitted = 0;
        for (i, c) in x.iter().enumerate() {
            let frames = s.push(&[*c], &[*c]).unwrap();
            emitted += frames.len();
            let expected = s.frames_for(i as u64 + 1);
            assert_eq!(emitted as u64, expected);
            assert_eq!(s.frames_emitted(), expected);
            if let Some(f) = frames.first() {
                assert_eq!(f.start_abs, 3 + 16 * f.frame_index);
            }
        }
        // (80 - 24) / 16 + 1
        assert_eq!(emitted, 4);
    }

    #[test]
    fn accumulators_stay_on_unit_circle() {
        let cfg = EstimatorConfig::set(32, 2, vec![ncf(0.0123456), ncf(-0.4)], false);
        let mut s = CyclicCorrelator::new(cfg).unwrap();
        let x = awgn(32 * 500, 1.0, 5).unwrap();
        s.push(&x, &x).unwrap();
        for a in s.phase_accumulators() {
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
        // and still aligned with absolute time
        let k0 = 2 + 32 * s.frames_emitted() as i64;
        let expected = rotor(0.0123456, k0);
        assert!((s.phase_accumulators()[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn averaging() {
        let layout = FrameLayout::Set {
            num_alphas: 1,
            max_lag: 0,
        };
        let f = |i, v: Sample| CyclicFrame {
            frame_index: i,
            start_abs: 0,
            layout,
            values: vec![v],
        };
        let v = Sample::new(0.3, -0.4);
        let one = average_frames(&[f(0, v)], AverageMode::Coherent).unwrap();
        assert_eq!(one.values, AveragedValues::Coherent(vec![v]));
        let pair = [f(0, v), f(1, -v)];
        let c = average_frames(&pair, AverageMode::Coherent).unwrap();
        assert_eq!(c.values, AveragedValues::Coherent(vec![Sample::default()]));
        let m = average_frames(&pair, AverageMode::Magnitude).unwrap();
        assert_eq!(m.magnitudes(), vec![0.5]);
        assert!(matches!(
            average_frames(&[], AverageMode::Coherent),
            Err(Error::Usage(_))
        ));
        let other = CyclicFrame {
            layout: FrameLayout::Full {
                num_lags: 1,
                win_len: 1,
            },
            ..f(2, v)
        };
        assert!(matches!(
            average_frames(&[f(0, v), other], AverageMode::Magnitude),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn noise_average_shrinks_coherently_but_not_in_magnitude() {
        // 64 frames of white noise at a = 0.125: each frame is O(1/sqrt(N)),
        // the coherent mean of 64 independent frames is about 8x smaller.
        let n = 256;
        let cfg = EstimatorConfig::set(n, 4, vec![ncf(0.125)], false);
        let mut ratios = Vec::new();
        for seed in 0..8 {
            let x = awgn(n * 64 + 8, 1.0, 100 + seed).unwrap();
            let mut s = CyclicCorrelator::new(cfg.clone()).unwrap();
            let frames = s.push(&x, &x).unwrap();
            assert_eq!(frames.len(), 64);
            let mag = average_frames(&frames, AverageMode::Magnitude).unwrap().magnitudes();
            let coh = average_frames(&frames, AverageMode::Coherent).unwrap().magnitudes();
            for (&mg, &ch) in mag.iter().zip(&coh) {
                assert!(mg <= 5.0 / (n as f64).sqrt());
                ratios.push(ch / mg);
            }
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        // coherent/magnitude ratio expected near 1/8
        assert!(mean_ratio > 1.0 / 16.0 && mean_ratio < 1.0 / 4.0, "ratio {mean_ratio}");
    }

    #[test]
    fn symmetric_lag_spec_in_full_mode_is_rejected() {
        let mut cfg = EstimatorConfig::full(8, vec![0], false);
        cfg.lag_spec = LagSpec::Symmetric { max_lag: 1 };
        assert!(CyclicCorrelator::new(cfg).is_err());
    }

    #[test]
    fn state_is_send() {
        fn assert_send<T: Send>() {}
        assert_send::<CyclicCorrelator>();
    }
}
