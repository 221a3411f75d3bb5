//! Reproducible Monte Carlo word-error-rate sweeps.
//!
//! Every trial is a pure function of `(master_seed, point index, trial
//! index)`: the data and noise generators use distinct ChaCha streams
//! derived from those numbers, so trials are independent of execution
//! order. Trials run in fixed-size batches whose error counts are summed;
//! the stopping rule is evaluated only at batch boundaries. Together this
//! makes the results byte-identical for any worker count — with rayon,
//! without it, or with any `RAYON_NUM_THREADS` setting.

use crate::channel::{awgn_apply, bpsk_modulate, ebn0_to_esn0, llr_bi_awgn, random_bits,
                     ChannelParams, RngStream};
use crate::decode::{decode_with_layout, ml_decode_bruteforce, DecoderWorkspace, Layout};
use crate::error::{Error, Result};
use crate::parallel;
use crate::spec_io::LoadedCode;
use crate::xform::transform;
use std::io::Write;

/// Trials per stopping-rule evaluation; part of the reproducibility
/// contract (results depend on this constant, not on the worker count).
pub const BATCH_TRIALS: u64 = 1024;

/// The decoder driven by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    Sc,
    Scl,
    RepSc,
    RepScl,
    Ml,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Sc => "sc",
            Decoder::Scl => "scl",
            Decoder::RepSc => "rep_sc",
            Decoder::RepScl => "rep_scl",
            Decoder::Ml => "ml",
        }
    }

    pub fn from_name(name: &str) -> Result<Decoder> {
        Ok(match name {
            "sc" => Decoder::Sc,
            "scl" => Decoder::Scl,
            "rep_sc" => Decoder::RepSc,
            "rep_scl" => Decoder::RepScl,
            "ml" => Decoder::Ml,
            other => return Err(Error::invalid(format!("unknown decoder {other:?}"))),
        })
    }
}

/// A full sweep: one WER measurement per SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub decoder: Decoder,
    /// List size for scl/rep_scl; must be 1 otherwise.
    pub list_size: usize,
    /// Eb/N0 points in dB, strictly increasing.
    pub snr_points: Vec<f64>,
    pub min_word_errors: u64,
    pub max_trials_per_point: u64,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn new(decoder: Decoder, list_size: usize, snr_points: Vec<f64>) -> Result<Self> {
        let config = SweepConfig {
            decoder,
            list_size,
            snr_points,
            min_word_errors: 100,
            max_trials_per_point: 10_000_000,
            master_seed: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_points.is_empty() {
            return Err(Error::invalid("snr_points must be non-empty"));
        }
        if !self.snr_points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("snr_points must be strictly increasing"));
        }
        if self.list_size == 0 {
            return Err(Error::invalid("list_size must be ≥ 1"));
        }
        let uses_list = matches!(self.decoder, Decoder::Scl | Decoder::RepScl);
        if !uses_list && self.list_size != 1 {
            return Err(Error::invalid(format!(
                "list_size {} is only meaningful for scl/rep_scl",
                self.list_size
            )));
        }
        if self.min_word_errors == 0 || self.max_trials_per_point == 0 {
            return Err(Error::invalid("stopping thresholds must be ≥ 1"));
        }
        Ok(())
    }
}

/// Why a point stopped collecting trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MinErrorsReached,
    MaxTrialsReached,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            StopReason::MinErrorsReached => "min_errors",
            StopReason::MaxTrialsReached => "max_trials",
        }
    }
}

/// WER measurement at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct WerEstimate {
    pub eb_n0_db: f64,
    pub es_n0_db: f64,
    pub trials: u64,
    pub word_errors: u64,
    pub wer: f64,
    /// Normal-approximation 95% binomial confidence half-width.
    pub ci95_halfwidth: f64,
    pub stop_reason: StopReason,
}

impl WerEstimate {
    fn from_counts(
        eb_n0_db: f64,
        es_n0_db: f64,
        trials: u64,
        word_errors: u64,
        stop_reason: StopReason,
    ) -> WerEstimate {
        let wer = word_errors as f64 / trials as f64;
        let ci95_halfwidth = 1.96 * (wer * (1.0 - wer) / trials as f64).sqrt();
        WerEstimate {
            eb_n0_db,
            es_n0_db,
            trials,
            word_errors,
            wer,
            ci95_halfwidth,
            stop_reason,
        }
    }
}

// How the decoder runs against a given code; resolved once per sweep.
enum Engine {
    Successive(Layout, usize),
    BruteForce,
}

fn resolve_engine(config: &SweepConfig, code: &LoadedCode) -> Result<Engine> {
    let engine = match (config.decoder, code) {
        (Decoder::Sc, LoadedCode::Plain(s)) => Engine::Successive(Layout::plain(s), 1),
        (Decoder::Scl, LoadedCode::Plain(s)) => {
            Engine::Successive(Layout::plain(s), config.list_size)
        }
        (Decoder::Sc | Decoder::Scl, LoadedCode::Concatenated(s)) => {
            if !s.blocks().is_empty() {
                return Err(Error::invalid(format!(
                    "decoder {} cannot decode a concatenated code with repetition blocks; \
                     use rep_sc or rep_scl",
                    config.decoder.name()
                )));
            }
            Engine::Successive(Layout::concatenated(s)?, config.list_size)
        }
        // a plain code is a concatenated code with zero blocks
        (Decoder::RepSc, LoadedCode::Plain(s)) => Engine::Successive(Layout::plain(s), 1),
        (Decoder::RepScl, LoadedCode::Plain(s)) => {
            Engine::Successive(Layout::plain(s), config.list_size)
        }
        (Decoder::RepSc, LoadedCode::Concatenated(s)) => {
            Engine::Successive(Layout::concatenated(s)?, 1)
        }
        (Decoder::RepScl, LoadedCode::Concatenated(s)) => {
            Engine::Successive(Layout::concatenated(s)?, config.list_size)
        }
        (Decoder::Ml, _) => Engine::BruteForce,
    };
    Ok(engine)
}

// Per-trial stream ids: one substream for the information word, one for the
// noise, disjoint across points and trials.
fn data_stream(point: usize, trial: u64) -> u64 {
    ((point as u64) << 40) | (trial << 1)
}

fn noise_stream(point: usize, trial: u64) -> u64 {
    data_stream(point, trial) | 1
}

fn run_trial(
    config: &SweepConfig,
    code: &LoadedCode,
    engine: &Engine,
    ws: &mut DecoderWorkspace,
    channel: &ChannelParams,
    point: usize,
    trial: u64,
) -> Result<bool> {
    let k = code.dimension();
    let mut data_rng = RngStream::new(config.master_seed, data_stream(point, trial)).rng();
    let info = random_bits(k, &mut data_rng);
    let u = code.code_ref().source_word(&info)?;
    let params = match code {
        LoadedCode::Plain(s) => *s.params(),
        LoadedCode::Concatenated(s) => *s.params(),
    };
    let cw = transform(&u, &params)?;
    let symbols = bpsk_modulate(&cw);
    let mut noise_rng = RngStream::new(config.master_seed, noise_stream(point, trial)).rng();
    let received = awgn_apply(&symbols, channel, &mut noise_rng);
    let llr = llr_bi_awgn(&received, channel);
    let decoded = match engine {
        Engine::Successive(layout, l) => decode_with_layout(ws, &llr, layout, *l)?,
        Engine::BruteForce => ml_decode_bruteforce(&llr, code.code_ref())?,
    };
    Ok(decoded.info_bits != info)
}

/// Measure the WER at one SNR point.
pub fn run_point(config: &SweepConfig, code: &LoadedCode, point: usize) -> Result<WerEstimate> {
    config.validate()?;
    let eb_n0_db = config.snr_points[point];
    let es_n0_db = ebn0_to_esn0(eb_n0_db, code.rate())?;
    let channel = ChannelParams::from_es_n0_db(es_n0_db);
    let engine = resolve_engine(config, code)?;

    let mut trials = 0u64;
    let mut errors = 0u64;
    loop {
        let batch = BATCH_TRIALS.min(config.max_trials_per_point - trials);
        let batch_errors: Result<u64> = parallel::map_reduce_trials(
            trials..trials + batch,
            64,
            |range| {
                let mut ws = DecoderWorkspace::new();
                let mut errs = 0u64;
                for t in range {
                    if run_trial(config, code, &engine, &mut ws, &channel, point, t)? {
                        errs += 1;
                    }
                }
                Ok(errs)
            },
            || Ok(0u64),
            |a, b| Ok(a? + b?),
        );
        errors += batch_errors?;
        trials += batch;
        if errors >= config.min_word_errors {
            return Ok(WerEstimate::from_counts(
                eb_n0_db,
                es_n0_db,
                trials,
                errors,
                StopReason::MinErrorsReached,
            ));
        }
        if trials >= config.max_trials_per_point {
            return Ok(WerEstimate::from_counts(
                eb_n0_db,
                es_n0_db,
                trials,
                errors,
                StopReason::MaxTrialsReached,
            ));
        }
    }
}

/// Run every point of the sweep in order.
pub fn run_sweep(config: &SweepConfig, code: &LoadedCode) -> Result<Vec<WerEstimate>> {
    (0..config.snr_points.len())
        .map(|p| run_point(config, code, p))
        .collect()
}

/// CSV header; the column order is part of the file format.
pub const CSV_HEADER: &str =
    "eb_n0_db,es_n0_db,decoder,list_size,trials,word_errors,wer,ci95_halfwidth,stop_reason,seed";

/// Write sweep results as CSV.
pub fn write_csv<W: Write>(
    out: &mut W,
    config: &SweepConfig,
    results: &[WerEstimate],
) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.eb_n0_db,
            r.es_n0_db,
            config.decoder.name(),
            config.list_size,
            r.trials,
            r.word_errors,
            r.wer,
            r.ci95_halfwidth,
            r.stop_reason.name(),
            config.master_seed,
        )?;
    }
    Ok(())
}
