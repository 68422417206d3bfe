//! Slow reference implementations used to check the streaming estimator.
//!
//! Nothing here shares code with [`crate::estimator`]: sums are written out
//! term by term and phasors are evaluated independently.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::siggen::{cpm_record, CpmParams};
use crate::Sample;

// exp(-j 2 pi alpha k), reducing alpha*k to its fractional part through an
// exact FMA split before calling sin/cos.
fn kernel(alpha: f64, k: i64) -> Sample {
    let kf = k as f64;
    let hi = alpha * kf;
    let lo = alpha.mul_add(kf, -hi);
    let frac = (hi - hi.trunc()) + lo;
    Sample::cis(-TAU * frac)
}

/// Literal direct-sum estimate
/// `(1/N) sum_{n=0}^{N-1} x[k0+n+m] y'[k0+n] exp(-j 2 pi alpha (k0+n))`
/// with `y' = conj(y)` unless `conj` is set.
pub fn cyclic_xcorr_direct(
    x: &[Sample],
    y: &[Sample],
    alpha: f64,
    m: i64,
    conj: bool,
    k0: i64,
    n: usize,
) -> Result<Sample> {
    check_coverage(x.len(), y.len(), m, m, k0, n)?;
    let mut acc = Sample::default();
    for i in 0..n as i64 {
        let xv = x[(k0 + i + m) as usize];
        let yv = y[(k0 + i) as usize];
        let yv = if conj { yv } else { yv.conj() };
        acc += xv * yv * kernel(alpha, k0 + i);
    }
    Ok(acc / n as f64)
}

/// [`cyclic_xcorr_direct`] for several lags over one window; the phasors of
/// the window are evaluated once and reused across lags.
pub fn cyclic_xcorr_direct_lags(
    x: &[Sample],
    y: &[Sample],
    alpha: f64,
    lags: &[i64],
    conj: bool,
    k0: i64,
    n: usize,
) -> Result<Vec<Sample>> {
    let lo = lags.iter().copied().min().unwrap_or(0);
    let hi = lags.iter().copied().max().unwrap_or(0);
    check_coverage(x.len(), y.len(), lo, hi, k0, n)?;
    let weighted: Vec<Sample> = (0..n as i64)
        .map(|i| {
            let yv = y[(k0 + i) as usize];
            let yv = if conj { yv } else { yv.conj() };
            yv * kernel(alpha, k0 + i)
        })
        .collect();
    Ok(lags
        .iter()
        .map(|&m| {
            let mut acc = Sample::default();
            for (i, w) in weighted.iter().enumerate() {
                acc += x[(k0 + i as i64 + m) as usize] * w;
            }
            acc / n as f64
        })
        .collect())
}

fn check_coverage(x_len: usize, y_len: usize, lag_lo: i64, lag_hi: i64, k0: i64, n: usize) -> Result<()> {
    let n = n as i64;
    if n == 0 {
        return Err(Error::usage("window length must be positive"));
    }
    let ok = k0 >= 0
        && k0 + lag_lo.min(0) >= 0
        && k0 + n <= y_len as i64
        && k0 + n - 1 + lag_hi.max(lag_lo) < x_len as i64
        && k0 + lag_lo >= 0;
    if ok {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "window k0={k0}, N={n}, lags {lag_lo}..={lag_hi} not covered by |x|={x_len}, |y|={y_len}"
        )))
    }
}

/// Monte-Carlo oracle request: average `|R|` of CPM records over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRequest {
    pub params: CpmParams,
    pub alphas: Vec<f64>,
    pub lags: Vec<i64>,
    pub conj: bool,
    pub win_len: usize,
    pub trials: usize,
    pub record_len: usize,
    /// Trial `t` draws its symbols from seed `seed + t`.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    pub alphas: Vec<f64>,
    pub lags: Vec<i64>,
    /// `mean_magnitude[a][l]`: `|R|` averaged over all windows of all trials.
    pub mean_magnitude: Vec<Vec<f64>>,
    /// Sample standard deviation of the per-trial mean `|R|`, same shape.
    pub trial_std: Vec<Vec<f64>>,
    pub trials: usize,
    pub windows_per_trial: usize,
    pub record_len: usize,
    pub seed: u64,
}

impl OracleTable {
    pub fn get(&self, alpha_index: usize, lag: i64) -> Option<f64> {
        let l = self.lags.iter().position(|&m| m == lag)?;
        self.mean_magnitude.get(alpha_index).map(|row| row[l])
    }

    /// Standard error of a cell, `trial_std / sqrt(trials)`.
    pub fn standard_error(&self, alpha_index: usize, lag_index: usize) -> f64 {
        self.trial_std[alpha_index][lag_index] / (self.trials as f64).sqrt()
    }
}

/// Averages `|R|` of freshly generated CPM records over non-overlapping
/// windows and trials, evaluating every window with the direct sum.
pub fn gmsk_mc_oracle(req: &OracleRequest) -> Result<OracleTable> {
    req.params.validate()?;
    if req.trials == 0 {
        return Err(Error::usage("oracle needs at least one trial"));
    }
    if req.alphas.is_empty() || req.lags.is_empty() {
        return Err(Error::usage("oracle needs at least one cycle frequency and one lag"));
    }
    if req.win_len < 2 {
        return Err(Error::usage("oracle window length must be >= 2"));
    }
    let m_minus = (-req.lags.iter().copied().min().unwrap_or(0)).max(0) as usize;
    let m_plus = req.lags.iter().copied().max().unwrap_or(0).max(0) as usize;
    let span = req.win_len + m_minus + m_plus;
    if req.record_len < span {
        return Err(Error::usage(format!(
            "record of {} samples shorter than one window span of {span}",
            req.record_len
        )));
    }
    let windows = (req.record_len - span) / req.win_len + 1;

    let run_trial = |t: usize| -> Result<Vec<Vec<f64>>> {
        let x = cpm_record(&req.params, req.record_len, req.seed.wrapping_add(t as u64))?;
        let mut sums = vec![vec![0.0; req.lags.len()]; req.alphas.len()];
        for w in 0..windows {
            let k0 = (m_minus + w * req.win_len) as i64;
            for (a, &alpha) in req.alphas.iter().enumerate() {
                let r = cyclic_xcorr_direct_lags(&x, &x, alpha, &req.lags, req.conj, k0, req.win_len)?;
                for (s, v) in sums[a].iter_mut().zip(r) {
                    *s += v.norm();
                }
            }
        }
        for row in &mut sums {
            for s in row.iter_mut() {
                *s /= windows as f64;
            }
        }
        Ok(sums)
    };

    #[cfg(feature = "parallel")]
    let per_trial: Vec<Vec<Vec<f64>>> = {
        use rayon::prelude::*;
        (0..req.trials).into_par_iter().map(run_trial).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_trial: Vec<Vec<Vec<f64>>> = (0..req.trials).map(run_trial).collect::<Result<_>>()?;

    // Reduce in trial order so results do not depend on scheduling.
    let t = req.trials as f64;
    let mut mean = vec![vec![0.0; req.lags.len()]; req.alphas.len()];
    for trial in &per_trial {
        for (mrow, trow) in mean.iter_mut().zip(trial) {
            for (m, v) in mrow.iter_mut().zip(trow) {
                *m += v;
            }
        }
    }
    for row in &mut mean {
        for m in row.iter_mut() {
            *m /= t;
        }
    }
    let mut std = vec![vec![0.0; req.lags.len()]; req.alphas.len()];
    if req.trials > 1 {
        for trial in &per_trial {
            for ((srow, trow), mrow) in std.iter_mut().zip(trial).zip(&mean) {
                for ((s, v), m) in srow.iter_mut().zip(trow).zip(mrow) {
                    *s += (v - m) * (v - m);
                }
            }
        }
        for row in &mut std {
            for s in row.iter_mut() {
                *s = (*s / (t - 1.0)).sqrt();
            }
        }
    }

    Ok(OracleTable {
        alphas: req.alphas.clone(),
        lags: req.lags.clone(),
        mean_magnitude: mean,
        trial_std: std,
        trials: req.trials,
        windows_per_trial: windows,
        record_len: req.record_len,
        seed: req.seed,
    })
}
