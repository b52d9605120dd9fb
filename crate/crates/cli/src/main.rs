//! `iht`: sweeps, traces, isometry constants and one-shot recovery.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or input error,
//! 3 numeric failure in `trace`, `recover` or `rip`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use iht_core::bench::{self, ExperimentConfig};
use iht_core::operators::OperatorDescriptor;
use iht_core::rip::{self, ExactCheckpoint, ExactOptions, RipMethod};
use iht_core::signals::io::{read_path, read_signal};
use iht_core::{run, Error, Execution, IhtConfig, LinearOperator};

#[derive(Parser)]
#[command(name = "iht", version, about = "Iterative hard thresholding benchmarks and recovery")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Success rates over an (M, s) grid, one CSV row per trial.
    Phase {
        /// Fill the wall_time_ms column (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// The phase grid repeated for each level of `noise_sigmas`.
    Noise {
        #[arg(long)]
        timing: bool,
    },
    /// Per-iteration error, residual and guarantee envelope for one instance.
    Trace,
    /// Exact or Monte Carlo isometry constant of a described operator.
    Rip {
        /// Resume from and save progress to this file (exact method only).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Recover a signal from measurements on disk.
    Recover,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RipConfig {
    operator: OperatorDescriptor,
    sparsity: usize,
    #[serde(default = "default_method")]
    method: RipMethod,
    #[serde(default = "default_rip_trials")]
    trials: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_budget")]
    budget: u64,
    /// Supports examined between checkpoint saves.
    #[serde(default = "default_checkpoint_every")]
    checkpoint_every: u64,
}

fn default_method() -> RipMethod {
    RipMethod::Exact
}
fn default_rip_trials() -> u64 {
    1000
}
fn default_budget() -> u64 {
    rip::DEFAULT_ENUMERATION_BUDGET
}
fn default_checkpoint_every() -> u64 {
    100_000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecoverConfig {
    operator: OperatorDescriptor,
    /// Measurement vector (CSV, or binary when the name ends in `.bin`).
    measurements: PathBuf,
    sparsity: usize,
    #[serde(default = "default_iters")]
    max_iters: usize,
    #[serde(default)]
    residual_tol: f64,
    /// Optional ground truth, adding an error column to the trace.
    #[serde(default)]
    truth: Option<PathBuf>,
    /// Where to write the per-iteration trace CSV.
    #[serde(default)]
    trace: Option<PathBuf>,
}

fn default_iters() -> usize {
    100
}

enum Failure {
    Io(String),
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) | Error::Csv(_) => Failure::Io(msg),
            Error::Numeric { .. } | Error::UnboundedIterations => Failure::Numeric(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("iht: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let c = &cli.common;
    let exec = if c.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Phase { timing } => {
            let cfg = experiment(c, *timing)?;
            let rows = bench::run_phase_transition_with(&cfg, exec)?;
            report_rates(&rows);
            with_output(c, |w| bench::write_records(&rows, w))
        }
        Command::Noise { timing } => {
            let cfg = experiment(c, *timing)?;
            let rows = bench::run_noise_sweep_with(&cfg, exec)?;
            report_rates(&rows);
            with_output(c, |w| bench::write_records(&rows, w))
        }
        Command::Trace => {
            let cfg = experiment(c, false)?;
            let tr = bench::run_convergence_trace(&cfg)?;
            eprintln!(
                "beta_{} = {:.6} ({}), certified = {}",
                tr.rip().sparsity,
                tr.rip().beta,
                tr.rip().method,
                tr.certified()
            );
            with_output(c, |w| tr.write_csv(w))
        }
        Command::Rip { checkpoint } => rip_command(c, checkpoint.as_deref(), exec),
        Command::Recover => recover_command(c),
    }
}

fn config_text(c: &Common) -> Result<(String, PathBuf), Failure> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, dir))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Config(format!("invalid configuration: {e}")))
}

fn experiment(c: &Common, timing: bool) -> Result<ExperimentConfig, Failure> {
    let (text, _) = config_text(c)?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.timing |= timing;
    cfg.validate()?;
    Ok(cfg)
}

fn report_rates(rows: &[bench::TrialRecord]) {
    for cell in bench::success_rates(rows) {
        eprintln!(
            "M={} s={} sigma={}: {}/{} succeeded",
            cell.m, cell.s, cell.noise_sigma, cell.successes, cell.trials
        );
    }
}

fn with_output<F>(c: &Common, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> iht_core::Result<()>,
{
    match &c.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_text(c: &Common, text: &str) -> Result<(), Failure> {
    with_output(c, |w| {
        writeln!(w, "{text}")?;
        Ok(())
    })
}

fn rip_command(c: &Common, checkpoint: Option<&Path>, exec: Execution) -> Result<(), Failure> {
    let (text, _) = config_text(c)?;
    let mut cfg: RipConfig = parse(&text)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let op = cfg.operator.build()?;
    let est = match cfg.method {
        RipMethod::MonteCarlo => rip::estimate_beta_with(&op, cfg.sparsity, cfg.trials, cfg.seed, exec)?,
        RipMethod::Exact => {
            let opts = ExactOptions {
                budget: cfg.budget,
                execution: exec,
            };
            match checkpoint {
                None => rip::exact_beta_with(&op, cfg.sparsity, &opts)?,
                Some(path) => {
                    let mut cp = if path.exists() {
                        Some(ExactCheckpoint::load(path)?)
                    } else {
                        None
                    };
                    loop {
                        let next = rip::exact_beta_resume(&op, cfg.sparsity, cp, Some(cfg.checkpoint_every.max(1)), &opts)?;
                        next.save(path)?;
                        if next.is_complete() {
                            break next.to_estimate()?;
                        }
                        cp = Some(next);
                    }
                }
            }
        }
    };
    if est.upper_bound_violated {
        eprintln!(
            "upper isometry bound violated (lambda_max = {:.6}); rescale with delta = {:.6}",
            est.lambda_max,
            est.rescale_delta()
        );
    }
    write_text(c, &est.to_json()?)
}

fn recover_command(c: &Common) -> Result<(), Failure> {
    let (text, dir) = config_text(c)?;
    let mut cfg: RecoverConfig = parse(&text)?;
    if let Some(seed) = c.seed {
        cfg.operator.seed = seed;
    }
    let op = cfg.operator.build()?;
    let x = read_path(&dir.join(&cfg.measurements))?;
    let truth = cfg.truth.as_ref().map(|p| read_signal(&dir.join(p))).transpose()?;
    if x.len() != op.rows() {
        return Err(Failure::Config(format!(
            "operator has {} rows but {} measurements were given",
            op.rows(),
            x.len()
        )));
    }
    let mut iht = IhtConfig::new(cfg.sparsity, cfg.max_iters, cfg.residual_tol);
    if cfg.trace.is_some() {
        iht = iht.with_trace();
    }
    let report = run(&op, x.as_slice(), &iht, truth.as_ref())?;
    if let Some(p) = &cfg.trace {
        report.write_trace_csv(BufWriter::new(File::create(dir.join(p))?))?;
    }
    write_text(c, &report.to_json()?)
}
