//! Unnormalized forward DFT, `V[k] = sum_n v[n] exp(-j 2 pi k n / N)`.
//!
//! Backed by `rustfft`, which handles every length (mixed radix, Rader and
//! Bluestein for awkward sizes), so there is no separate direct fallback.

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::Sample;

pub fn dft(v: &[Sample]) -> Result<Vec<Sample>> {
    if v.is_empty() {
        return Err(Error::usage("dft of an empty vector"));
    }
    let mut out = v.to_vec();
    FftPlanner::new().plan_fft_forward(v.len()).process(&mut out);
    Ok(out)
}
