//! Streaming cyclostationary analysis.
//!
//! The centerpiece is [`CyclicCorrelator`], a streaming estimator of the
//! cyclic cross-correlation `R_xy^a[m]` (or its conjugate counterpart
//! `R_xy*^b[m]`) between two synchronized complex sample streams. It accepts
//! input in chunks of any size and emits one [`CyclicFrame`] per `N` consumed
//! samples, phase-aligned to absolute sample time so that consecutive frames
//! can be averaged coherently.
//!
//! Two operating modes are supported:
//!
//! * **Set** mode evaluates a fixed list of cycle frequencies over the
//!   symmetric lag range `-max_lag..=max_lag`.
//! * **Full** mode sweeps every DFT cycle-frequency bin `k/N` for a fixed list
//!   of lags.
//!
//! Around the estimator sit the pieces needed to exercise it end to end:
//! CPM/GMSK, tone and noise generators ([`siggen`]), carrier frequency offset
//! models and a conjugate-feature CFO estimator ([`impair`]), slow direct-sum
//! and Monte-Carlo oracles ([`reference`]) and cf32/CSV interchange ([`io`]).

pub mod config;
pub mod dft;
pub mod error;
pub mod estimator;
pub mod frame;
pub mod impair;
pub mod io;
mod phase;
pub mod reference;
pub mod siggen;

pub use config::{
    full_bin_to_alpha, validate_config, ConfigViolation, EstimatorConfig, LagSpec, Mode, NormalizedCycleFrequency,
};
pub use dft::dft;
pub use error::{Error, Result};
pub use estimator::{
    average_frames, compute_full_window, compute_set_window, AverageMode, AveragedFrame, AveragedValues,
    CyclicCorrelator, SetStrategy,
};
pub use frame::{CyclicFrame, FrameLayout};

/// Complex baseband sample, double precision.
pub type Sample = num_complex::Complex64;
