//! Command-line harness: `design` writes a JSON code-spec, `simulate` runs
//! reproducible Monte Carlo WER sweeps to CSV, `verify` runs the built-in
//! oracle suites. Diagnostics go to stderr; exit codes are 0 on success, 1
//! on usage errors, 2 on verification failure.

use clap::{Parser, Subcommand};
use polarrep::channel::ebn0_to_esn0;
use polarrep::design::{design_concatenated, select_information_set, SearchParams};
use polarrep::reliability::{awgn_reliability_ga, genie_mc_reliability, DesignChannel,
                            ReliabilityProfile};
use polarrep::sim::{run_sweep, write_csv, Decoder, SweepConfig};
use polarrep::spec_io::{self, LoadedCode, SpecFile};
use polarrep::verify;
use polarrep::xform::PolarParams;
use polarrep::{Error, Result};
use serde::Deserialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "polarsim",
    about = "Polar-code construction, decoding and Monte Carlo WER simulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a code and write the JSON code-spec.
    Design {
        /// Block length N (a power of two).
        #[arg(long)]
        n: usize,
        /// Code rate K/N; K = rate*N must be an integer.
        #[arg(long)]
        rate: f64,
        /// Design-channel Es/N0 in dB.
        #[arg(long, allow_hyphen_values = true)]
        design_esn0_db: Option<f64>,
        /// Design-channel Eb/N0 in dB (converted via the rate).
        #[arg(long, allow_hyphen_values = true)]
        design_ebn0_db: Option<f64>,
        /// Reliability method: ga | genie.
        #[arg(long, default_value = "ga")]
        method: String,
        /// Concatenated construction: on | off.
        #[arg(long, default_value = "off")]
        concatenated: String,
        /// Maximum number of extra channels for the enlarged set.
        #[arg(long, default_value_t = 16)]
        delta_max: usize,
        /// Maximum repetition-block length.
        #[arg(long, default_value_t = 4)]
        block_len_max: usize,
        /// Size of the candidate window around the rate threshold.
        #[arg(long, default_value_t = 96)]
        candidate_window: usize,
        /// Maximum number of block spans covering any one channel index.
        #[arg(long, default_value_t = 6)]
        max_open_blocks: usize,
        /// Monte Carlo trials for the genie method.
        #[arg(long, default_value_t = 100_000)]
        genie_trials: u64,
        /// Master seed for the genie method.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output spec path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo WER sweep and write CSV results.
    Simulate {
        /// Code-spec JSON path (required unless --config is given).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Full sweep configuration as JSON; other flags are ignored.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Decoder: sc | scl | rep_sc | rep_scl | ml.
        #[arg(long, default_value = "sc")]
        decoder: String,
        /// List size for scl/rep_scl.
        #[arg(long, default_value_t = 1)]
        list_size: usize,
        /// Comma-separated Eb/N0 points in dB, strictly increasing.
        #[arg(long, allow_hyphen_values = true)]
        snr_points: Option<String>,
        #[arg(long, default_value_t = 100)]
        min_word_errors: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_trials_per_point: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; never affects the results.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run built-in oracle suites and/or validate a spec file.
    Verify {
        /// Suite name (transform | self_inverse | bec | degeneracy |
        /// list_ml | rep_block) or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Spec file to validate structurally.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Block length override for the bec suite.
        #[arg(long)]
        n: Option<usize>,
        /// Trial-count override for the Monte Carlo suites.
        #[arg(long)]
        trials: Option<u64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with success
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Design {
            n,
            rate,
            design_esn0_db,
            design_ebn0_db,
            method,
            concatenated,
            delta_max,
            block_len_max,
            candidate_window,
            max_open_blocks,
            genie_trials,
            seed,
            out,
        } => cmd_design(DesignArgs {
            n,
            rate,
            design_esn0_db,
            design_ebn0_db,
            method,
            concatenated,
            search: SearchParams {
                delta_max,
                block_len_max,
                candidate_window,
                max_open_blocks,
            },
            genie_trials,
            seed,
            out,
        }),
        Cmd::Simulate {
            spec,
            config,
            decoder,
            list_size,
            snr_points,
            min_word_errors,
            max_trials_per_point,
            seed,
            workers,
            out,
        } => {
            let (spec_path, sweep, workers) = match config {
                Some(path) => load_sim_config(&path)?,
                None => {
                    let spec_path = spec
                        .ok_or_else(|| Error::invalid("--spec or --config is required"))?;
                    let points = parse_snr_points(
                        &snr_points
                            .ok_or_else(|| Error::invalid("--snr-points is required"))?,
                    )?;
                    let mut sweep =
                        SweepConfig::new(Decoder::from_name(&decoder)?, list_size, points)?;
                    sweep.min_word_errors = min_word_errors;
                    sweep.max_trials_per_point = max_trials_per_point;
                    sweep.master_seed = seed;
                    (spec_path, sweep, workers)
                }
            };
            cmd_simulate(&spec_path, &sweep, workers, out.as_deref())
        }
        Cmd::Verify {
            suite,
            spec,
            n,
            trials,
        } => cmd_verify(&suite, spec.as_deref(), n, trials),
    }
}

struct DesignArgs {
    n: usize,
    rate: f64,
    design_esn0_db: Option<f64>,
    design_ebn0_db: Option<f64>,
    method: String,
    concatenated: String,
    search: SearchParams,
    genie_trials: u64,
    seed: u64,
    out: PathBuf,
}

fn cmd_design(args: DesignArgs) -> Result<i32> {
    let params = PolarParams::from_block_len(args.n)?;
    let k_real = args.rate * args.n as f64;
    let k = k_real.round() as usize;
    if (k_real - k as f64).abs() > 1e-9 || k == 0 || k > args.n {
        return Err(Error::invalid(format!(
            "rate {} at N = {} does not give an integer dimension in 1..=N",
            args.rate, args.n
        )));
    }
    let es_n0_db = match (args.design_esn0_db, args.design_ebn0_db) {
        (Some(es), None) => es,
        (None, Some(eb)) => ebn0_to_esn0(eb, args.rate)?,
        _ => {
            return Err(Error::invalid(
                "exactly one of --design-esn0-db / --design-ebn0-db is required",
            ))
        }
    };
    let profile: ReliabilityProfile = match args.method.as_str() {
        "ga" => awgn_reliability_ga(&params, es_n0_db),
        "genie" => genie_mc_reliability(
            &params,
            DesignChannel::BiAwgn { es_n0_db },
            args.genie_trials,
            args.seed,
        )?,
        other => return Err(Error::invalid(format!("unknown method {other:?}"))),
    };
    let file = match args.concatenated.as_str() {
        "off" => {
            let spec = select_information_set(&profile, k)?;
            eprintln!(
                "designed plain code: N={} K={k} predicted WER {:.3e}",
                args.n,
                spec.predicted_wer(&profile)?
            );
            SpecFile::from_plain(&spec, &profile)?
        }
        "on" => {
            let spec = design_concatenated(&profile, k, &args.search)?;
            eprintln!(
                "designed concatenated code: N={} K={k} blocks={} predicted WER {:.3e}",
                args.n,
                spec.blocks().len(),
                spec.predicted_wer(&profile)?
            );
            SpecFile::from_concatenated(&spec, &profile)?
        }
        other => {
            return Err(Error::invalid(format!(
                "--concatenated must be on or off, got {other:?}"
            )))
        }
    };
    spec_io::save_spec(&args.out, &file)?;
    eprintln!("wrote {}", args.out.display());
    Ok(0)
}

/// JSON sweep configuration; field names match the SweepConfig type.
#[derive(Deserialize)]
struct SimConfigFile {
    code_spec_path: PathBuf,
    decoder: String,
    #[serde(default = "one")]
    list_size: usize,
    snr_points: Vec<f64>,
    #[serde(default = "hundred")]
    min_word_errors: u64,
    #[serde(default = "ten_million")]
    max_trials_per_point: u64,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "one")]
    workers: usize,
}

fn one() -> usize {
    1
}
fn hundred() -> u64 {
    100
}
fn ten_million() -> u64 {
    10_000_000
}

fn load_sim_config(path: &Path) -> Result<(PathBuf, SweepConfig, usize)> {
    let text = std::fs::read_to_string(path)?;
    let file: SimConfigFile =
        serde_json::from_str(&text).map_err(|e| Error::invalid(e.to_string()))?;
    let mut sweep = SweepConfig::new(
        Decoder::from_name(&file.decoder)?,
        file.list_size,
        file.snr_points,
    )?;
    sweep.min_word_errors = file.min_word_errors;
    sweep.max_trials_per_point = file.max_trials_per_point;
    sweep.master_seed = file.master_seed;
    Ok((file.code_spec_path, sweep, file.workers))
}

fn parse_snr_points(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad SNR point {s:?}: {e}")))
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

fn cmd_simulate(
    spec_path: &Path,
    sweep: &SweepConfig,
    workers: usize,
    out: Option<&Path>,
) -> Result<i32> {
    if workers == 0 {
        return Err(Error::invalid("workers must be >= 1"));
    }
    let (_, code) = spec_io::load_code(spec_path)?;
    match &code {
        LoadedCode::Plain(s) => eprintln!(
            "loaded plain code: N={} K={}",
            s.params().block_len(),
            s.dimension()
        ),
        LoadedCode::Concatenated(s) => eprintln!(
            "loaded concatenated code: N={} K={} blocks={}",
            s.params().block_len(),
            s.dimension(),
            s.blocks().len()
        ),
    }
    let results = with_workers(workers, || run_sweep(sweep, &code))??;
    for r in &results {
        eprintln!(
            "Eb/N0 {:>5.2} dB: WER {:.3e} ({} errors / {} trials, {})",
            r.eb_n0_db,
            r.wer,
            r.word_errors,
            r.trials,
            r.stop_reason.name()
        );
    }
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            write_csv(&mut f, sweep, &results)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, sweep, &results)?;
            lock.flush()?;
        }
    }
    Ok(0)
}

fn cmd_verify(
    suite: &str,
    spec: Option<&Path>,
    n: Option<usize>,
    trials: Option<u64>,
) -> Result<i32> {
    let mut reports = Vec::new();
    if suite != "spec_file" {
        let names: Vec<&str> = if suite == "all" {
            verify::SUITE_NAMES.to_vec()
        } else {
            vec![suite]
        };
        for name in names {
            let report = match name {
                "bec" => verify::bec_suite(n.unwrap_or(16), trials.unwrap_or(100_000)),
                "degeneracy" => verify::degeneracy_suite(trials.unwrap_or(1000)),
                "list_ml" => verify::list_ml_suite(trials.unwrap_or(1000)),
                "rep_block" => verify::rep_block_suite(trials.unwrap_or(1000)),
                _ => verify::run_suite(name)?,
            };
            reports.push(report);
        }
    }
    if let Some(path) = spec {
        reports.push(verify::verify_spec_file(path));
    }
    if reports.is_empty() {
        return Err(Error::invalid("nothing to verify"));
    }
    let mut failed = false;
    for r in &reports {
        println!(
            "{}: {} ({})",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.summary
        );
        for f in &r.failures {
            eprintln!("  {}: {f}", r.name);
        }
        failed |= !r.passed;
    }
    Ok(if failed { 2 } else { 0 })
}
