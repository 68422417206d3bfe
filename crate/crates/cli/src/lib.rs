//! The `cyclocorr` command line: generators, impairments, estimation and
//! oracle runs over cf32 recordings.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O or format
//! error, 3 data error (non-finite samples, no feature detected).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cyclocorr::impair::{add_noise_snr, apply_cfo, estimate_cfo_ccf_detailed, CfoSpec, DEFAULT_SEARCH_HALFWIDTH};
use cyclocorr::io::{
    export_average_csv, export_frames_csv, export_oracle_csv, fmt_g17, meta_path, read_cf32, read_meta, write_cf32,
    write_meta, RecordingMeta,
};
use cyclocorr::reference::{gmsk_mc_oracle, OracleRequest};
use cyclocorr::siggen::{awgn, cpm_record, tone, CpmParams, PulseKind};
use cyclocorr::{
    average_frames, AverageMode, CyclicCorrelator, Error, EstimatorConfig, NormalizedCycleFrequency, Result, Sample,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cyclocorr",
    version,
    about = "Cyclic correlation experiments on cf32 recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a CPM record (GMSK by default) with a metadata sidecar.
    GenCpm(GenCpm),
    /// Generate a complex tone.
    GenTone(GenTone),
    /// Generate white circular Gaussian noise.
    GenNoise(GenNoise),
    /// Apply a carrier frequency offset and/or noise, in flag order.
    Impair(Impair),
    /// Run the estimator over a recording and write frames or an average as CSV.
    Estimate(Estimate),
    /// Magnitude-averaged sweep over every cycle-frequency bin at fixed lags.
    Scan(Scan),
    /// Estimate a CFO from the displacement of a conjugate feature.
    CfoEst(CfoEst),
    /// Monte-Carlo table of mean |R| for CPM records.
    OracleGmsk(OracleGmsk),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Pulse {
    Gaussian,
    Rect,
}

#[derive(Debug, Args)]
struct CpmArgs {
    /// Modulation index.
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    #[arg(long, default_value_t = 2)]
    alphabet: u32,
    /// Frequency-pulse length in symbols.
    #[arg(long, default_value_t = 4)]
    pulse_len: usize,
    #[arg(long, default_value_t = 0.25)]
    bt: f64,
    /// Samples per symbol.
    #[arg(long, default_value_t = 8)]
    sps: usize,
    #[arg(long, value_enum, default_value_t = Pulse::Gaussian)]
    pulse: Pulse,
}

impl CpmArgs {
    fn params(&self) -> CpmParams {
        CpmParams {
            h: self.h,
            alphabet_size: self.alphabet,
            pulse_len: self.pulse_len,
            bt: self.bt,
            sps: self.sps,
            pulse: match self.pulse {
                Pulse::Gaussian => PulseKind::GaussianGmsk,
                Pulse::Rect => PulseKind::Rectangular,
            },
        }
    }
}

#[derive(Debug, Args)]
struct GenCpm {
    #[command(flatten)]
    cpm: CpmArgs,
    #[arg(long)]
    symbols: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sample_rate: f64,
}

#[derive(Debug, Args)]
struct GenTone {
    /// Normalized frequency, cycles/sample in [-0.5, 0.5).
    #[arg(long, allow_hyphen_values = true)]
    freq: f64,
    /// Initial phase, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phase: f64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sample_rate: f64,
}

#[derive(Debug, Args)]
struct GenNoise {
    /// Standard deviation of the complex noise; mean power is sigma^2.
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sample_rate: f64,
}

#[derive(Debug, Args)]
struct Impair {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Carrier frequency offset, cycles/sample.
    #[arg(long, allow_hyphen_values = true)]
    cfo: Option<f64>,
    /// Phase of the CFO rotation at sample 0, radians.
    #[arg(long, requires = "cfo", allow_hyphen_values = true)]
    phi0: Option<f64>,
    /// Signal-to-noise ratio relative to the mean input power, dB.
    #[arg(long, requires = "seed", allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long, requires = "snr_db")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Set,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AvgArg {
    Coherent,
    Magnitude,
    /// Write every frame.
    None,
}

#[derive(Debug, Args)]
struct Estimate {
    #[arg(long = "in")]
    input: PathBuf,
    /// Second input for a cross-correlation; defaults to the first.
    #[arg(long = "in2")]
    input2: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Set)]
    mode: ModeArg,
    #[arg(long)]
    win_len: usize,
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lags: Option<Vec<i64>>,
    #[arg(long)]
    conj: bool,
    #[arg(long, value_enum, default_value_t = AvgArg::Magnitude)]
    avg: AvgArg,
    /// Use only the first K frames.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Scan {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    win_len: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    lags: Vec<i64>,
    #[arg(long)]
    conj: bool,
    #[arg(long)]
    frames: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CfoEst {
    #[arg(long = "in")]
    input: PathBuf,
    /// Conjugate cycle frequency of the feature without offset.
    #[arg(long, allow_hyphen_values = true)]
    expected_beta: f64,
    #[arg(long)]
    win_len: usize,
    #[arg(long)]
    frames: usize,
    /// Half-width of the peak search, cycles/sample.
    #[arg(long, default_value_t = DEFAULT_SEARCH_HALFWIDTH)]
    search_halfwidth: f64,
}

#[derive(Debug, Args)]
struct OracleGmsk {
    #[command(flatten)]
    cpm: CpmArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "max_lag")]
    lags: Option<Vec<i64>>,
    /// Evaluate lags -M..=M; defaults to lag 0 alone.
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    conj: bool,
    #[arg(long)]
    win_len: usize,
    #[arg(long, default_value_t = 32)]
    trials: usize,
    /// Samples per trial; defaults to 16 windows plus the lag span.
    #[arg(long)]
    record_len: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = Cli::command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m).map(|cli| (cli, m)));
    let (cli, matches) = match parsed {
        Ok(v) => v,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command, &matches) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", single_line(&e.to_string()));
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::Range(_) | Error::Contract(_) => EXIT_USAGE,
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::Data(_) | Error::NonFinite { .. } | Error::NoFeature(_) => EXIT_DATA,
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn dispatch(command: Command, matches: &ArgMatches) -> Result<()> {
    match command {
        Command::GenCpm(a) => gen_cpm(a),
        Command::GenTone(a) => gen_tone(a),
        Command::GenNoise(a) => gen_noise(a),
        Command::Impair(a) => impair(a, matches.subcommand_matches("impair").expect("impair matches")),
        Command::Estimate(a) => estimate(a),
        Command::Scan(a) => scan(a),
        Command::CfoEst(a) => cfo_est(a),
        Command::OracleGmsk(a) => oracle_gmsk(a),
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn load(path: &Path) -> Result<Vec<Sample>> {
    read_cf32(path).map_err(|e| with_path(e, path))
}

fn save(path: &Path, x: &[Sample], meta: &RecordingMeta) -> Result<()> {
    write_cf32(path, x).map_err(|e| with_path(e, path))?;
    write_meta(path, meta).map_err(|e| with_path(e, path))
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::Usage(format!("--sample-rate must be positive, got {rate}")))
    }
}

fn gen_cpm(a: GenCpm) -> Result<()> {
    check_rate(a.sample_rate)?;
    let p = a.cpm.params();
    p.validate()?;
    let len = a
        .symbols
        .checked_mul(p.sps)
        .ok_or_else(|| Error::Usage("--symbols times --sps overflows".into()))?;
    let x = cpm_record(&p, len, a.seed)?;
    let mut meta = RecordingMeta::new(
        a.sample_rate,
        format!(
            "cpm h={} M={} L={} bt={} sps={} pulse={:?} symbols={}",
            p.h, p.alphabet_size, p.pulse_len, p.bt, p.sps, a.cpm.pulse, a.symbols
        ),
    );
    meta.seed = Some(a.seed);
    save(&a.out, &x, &meta)
}

fn gen_tone(a: GenTone) -> Result<()> {
    check_rate(a.sample_rate)?;
    if !a.phase.is_finite() {
        return Err(Error::Usage(format!("--phase must be finite, got {}", a.phase)));
    }
    let x = tone(NormalizedCycleFrequency::new(a.freq)?, a.phase, a.count);
    let meta = RecordingMeta::new(a.sample_rate, format!("tone freq={} phase={}", a.freq, a.phase));
    save(&a.out, &x, &meta)
}

fn gen_noise(a: GenNoise) -> Result<()> {
    check_rate(a.sample_rate)?;
    let x = awgn(a.count, a.sigma, a.seed)?;
    let mut meta = RecordingMeta::new(a.sample_rate, format!("awgn sigma={}", a.sigma));
    meta.seed = Some(a.seed);
    save(&a.out, &x, &meta)
}

enum Step {
    Cfo(CfoSpec),
    Noise { snr_db: f64, seed: u64 },
}

fn impair(a: Impair, m: &ArgMatches) -> Result<()> {
    let mut steps = Vec::new();
    if let Some(eps) = a.cfo {
        let at = m.index_of("cfo").unwrap_or(0);
        steps.push((at, Step::Cfo(CfoSpec::new(eps, a.phi0.unwrap_or(0.0))?)));
    }
    if let (Some(snr_db), Some(seed)) = (a.snr_db, a.seed) {
        let at = m.index_of("snr_db").unwrap_or(usize::MAX);
        steps.push((at, Step::Noise { snr_db, seed }));
    }
    if steps.is_empty() {
        return Err(Error::Usage("impair needs --cfo and/or --snr-db".into()));
    }
    steps.sort_by_key(|s| s.0);

    let mut x = load(&a.input)?;
    let mut notes = Vec::new();
    for (_, step) in steps {
        match step {
            Step::Cfo(c) => {
                x = apply_cfo(&x, c);
                notes.push(format!("cfo eps={} phi0={}", c.eps.value(), c.phi0));
            }
            Step::Noise { snr_db, seed } => {
                x = add_noise_snr(&x, snr_db, seed)?;
                notes.push(format!("awgn snr_db={snr_db} seed={seed}"));
            }
        }
    }
    let src = meta_path(&a.input);
    let mut meta = if src.exists() {
        read_meta(&a.input)?
    } else {
        RecordingMeta::new(1.0, "")
    };
    for n in notes {
        if meta.description.is_empty() {
            meta.description = n;
        } else {
            meta.description = format!("{}; {n}", meta.description);
        }
    }
    save(&a.out, &x, &meta)
}

fn estimate_config(a: &Estimate) -> Result<EstimatorConfig> {
    match a.mode {
        ModeArg::Set => {
            if a.lags.is_some() {
                return Err(Error::Usage(
                    "--lags conflicts with --mode set (Set mode takes --max-lag and --alphas)".into(),
                ));
            }
            let alphas = a
                .alphas
                .as_ref()
                .ok_or_else(|| Error::Usage("--mode set requires --alphas".into()))?;
            let max_lag = a
                .max_lag
                .ok_or_else(|| Error::Usage("--mode set requires --max-lag".into()))?;
            EstimatorConfig::set_from_values(a.win_len, max_lag, alphas, a.conj)
        }
        ModeArg::Full => {
            if a.alphas.is_some() || a.max_lag.is_some() {
                return Err(Error::Usage(
                    "--alphas and --max-lag conflict with --mode full (Full mode takes --lags)".into(),
                ));
            }
            let lags = a
                .lags
                .clone()
                .ok_or_else(|| Error::Usage("--mode full requires --lags".into()))?;
            Ok(EstimatorConfig::full(a.win_len, lags, a.conj))
        }
    }
}

/// Number of samples to feed for `frames` windows, or the whole record.
fn span_for(est: &CyclicCorrelator, frames: Option<usize>, available: usize) -> Result<usize> {
    let need = est.buffer_need();
    let win_len = est.config().win_len;
    match frames {
        Some(0) => Err(Error::Usage("--frames must be at least 1".into())),
        Some(k) => {
            let n = need + (k - 1) * win_len;
            if n > available {
                Err(Error::Usage(format!(
                    "{k} frames of length {win_len} need {n} samples, record has {available}"
                )))
            } else {
                Ok(n)
            }
        }
        None if available < need => Err(Error::Usage(format!(
            "record has {available} samples, one window needs {need}"
        ))),
        None => Ok(available),
    }
}

fn estimate(a: Estimate) -> Result<()> {
    let config = estimate_config(&a)?;
    let mut est = CyclicCorrelator::new(config.clone())?;
    let x = load(&a.input)?;
    let y = match &a.input2 {
        Some(p) => load(p)?,
        None => x.clone(),
    };
    if x.len() != y.len() {
        return Err(Error::Usage(format!(
            "--in has {} samples but --in2 has {}",
            x.len(),
            y.len()
        )));
    }
    let span = span_for(&est, a.frames, x.len())?;
    let frames = est.push(&x[..span], &y[..span])?;
    match a.avg {
        AvgArg::None => export_frames_csv(&a.out, &frames, &config),
        AvgArg::Magnitude => export_average_csv(&a.out, &average_frames(&frames, AverageMode::Magnitude)?, &config),
        AvgArg::Coherent => export_average_csv(&a.out, &average_frames(&frames, AverageMode::Coherent)?, &config),
    }
    .map_err(|e| with_path(e, &a.out))?;
    Ok(())
}

fn scan(a: Scan) -> Result<()> {
    let config = EstimatorConfig::full(a.win_len, a.lags.clone(), a.conj);
    let mut est = CyclicCorrelator::new(config.clone())?;
    let x = load(&a.input)?;
    let span = span_for(&est, Some(a.frames), x.len())?;
    let frames = est.push(&x[..span], &x[..span])?;
    export_average_csv(&a.out, &average_frames(&frames, AverageMode::Magnitude)?, &config)
        .map_err(|e| with_path(e, &a.out))?;
    Ok(())
}

fn cfo_est(a: CfoEst) -> Result<()> {
    let x = load(&a.input)?;
    let beta = NormalizedCycleFrequency::new(a.expected_beta)?;
    let e = estimate_cfo_ccf_detailed(&x, beta, a.win_len, a.frames, a.search_halfwidth)?;
    println!("{}", fmt_g17(e.eps_hat));
    Ok(())
}

fn oracle_gmsk(a: OracleGmsk) -> Result<()> {
    let lags = match (&a.lags, a.max_lag) {
        (Some(l), _) => l.clone(),
        (None, Some(m)) => (-(m as i64)..=m as i64).collect(),
        (None, None) => vec![0],
    };
    let m_minus = lags.iter().copied().min().unwrap_or(0).min(0).unsigned_abs() as usize;
    let m_plus = lags.iter().copied().max().unwrap_or(0).max(0) as usize;
    let record_len = a.record_len.unwrap_or(16 * a.win_len + m_minus + m_plus);
    let table = gmsk_mc_oracle(&OracleRequest {
        params: a.cpm.params(),
        alphas: a.alphas,
        lags,
        conj: a.conj,
        win_len: a.win_len,
        trials: a.trials,
        record_len,
        seed: a.seed,
    })?;
    export_oracle_csv(&a.out, &table).map_err(|e| with_path(e, &a.out))?;
    Ok(())
}
