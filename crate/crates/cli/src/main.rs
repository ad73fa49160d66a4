use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use specdyn::experiment::{config_from_value, run, validate_document, Experiment, ExperimentConfig};
use specdyn::Violation;

/// Spectral measures, time-averaged return probabilities and fractal exponents.
#[derive(Debug, Parser)]
#[command(name = "specdyn", version)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "SPECDYN_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral measure of a truncated operator and its distribution function.
    Spectrum(RunArgs),
    /// Sample W(t) and fit its decay.
    Dynamics(RunArgs),
    /// Correlation dimensions, pointwise exponents and UaH moduli.
    Dims(RunArgs),
    /// Slow, smoothed, spliced and oscillating measures.
    Construct(RunArgs),
    /// t^a W(t) growth and the UaH modulus at a and a/2.
    VerifyLast(RunArgs),
    /// W envelopes against D2 envelopes, ball against Laplace routes, sandwich samples.
    VerifyIdentities(RunArgs),
    /// Oscillating pointwise exponents and the W(t) slopes they force.
    DemoOscillation(RunArgs),
    /// W(T) against the sum of squared weights at large T.
    WienerLimit(RunArgs),
    /// Correlation dimension of the Cantor measure.
    CantorD2(RunArgs),
    /// Check a configuration document and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the default configuration of an experiment.
    Defaults {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(Experiment::NAMES))]
        experiment: String,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration; the experiment's defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: results/<experiment>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest number of atom pairs in one W(t) evaluation.
    #[arg(long)]
    budget: Option<u64>,
}

impl Command {
    fn experiment(&self) -> Option<(&'static str, &RunArgs)> {
        Some(match self {
            Command::Spectrum(a) => ("spectrum", a),
            Command::Dynamics(a) => ("dynamics", a),
            Command::Dims(a) => ("dims", a),
            Command::Construct(a) => ("construct", a),
            Command::VerifyLast(a) => ("verify-last", a),
            Command::VerifyIdentities(a) => ("verify-identities", a),
            Command::DemoOscillation(a) => ("demo-oscillation", a),
            Command::WienerLimit(a) => ("wiener-limit", a),
            Command::CantorD2(a) => ("cantor-d2", a),
            Command::Validate { .. } | Command::Defaults { .. } => return None,
        })
    }
}

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    if let Some((name, args)) = cli.command.experiment() {
        return run_experiment(name, args);
    }
    match cli.command {
        Command::Validate { config } => {
            let text = read(&config)?;
            let violations = validate_document(&text);
            if violations.is_empty() {
                emit(&format!("{}: valid\n", config.display()));
                Ok(0)
            } else {
                print_violations(&violations);
                Ok(EXIT_FAILED_CHECK)
            }
        }
        Command::Defaults { experiment } => {
            let e = Experiment::default_for(&experiment).expect("clap restricts the names");
            emit(&format!(
                "{}\n",
                serde_json::to_string_pretty(&ExperimentConfig::new(e))?
            ));
            Ok(0)
        }
        _ => unreachable!("experiments are handled above"),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to stdout, ignoring a closed pipe (`specdyn defaults dims | head`).
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_violations(violations: &[Violation]) {
    for v in violations {
        emit(&format!("{v}\n"));
    }
}

/// The document to run: the file (or the defaults) with the experiment name
/// and the flag overrides applied.
fn build_document(name: &str, args: &RunArgs) -> anyhow::Result<Result<Value, Vec<Violation>>> {
    let mut doc = match &args.config {
        Some(path) => match serde_json::from_str::<Value>(&read(path)?) {
            Ok(v) => v,
            Err(e) => return Ok(Err(vec![Violation::new("", format!("not valid JSON: {e}"))])),
        },
        None => {
            let e = Experiment::default_for(name).expect("subcommands match experiment names");
            serde_json::to_value(ExperimentConfig::new(e))?
        }
    };
    let Some(obj) = doc.as_object_mut() else {
        return Ok(Err(vec![Violation::new("", "the document must be a JSON object")]));
    };
    match obj.get("experiment") {
        None => {
            obj.insert("experiment".into(), json!(name));
        }
        Some(Value::String(s)) if s == name => {}
        Some(other) => {
            return Ok(Err(vec![Violation::new(
                "experiment",
                format!("the document describes {other}, not {name}"),
            )]))
        }
    }
    if let Some(seed) = args.seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Some(budget) = args.budget {
        let entry = obj.entry("budget").or_insert_with(|| json!({}));
        match entry.as_object_mut() {
            Some(b) => {
                b.insert("pair_budget".into(), json!(budget));
            }
            None => return Ok(Err(vec![Violation::new("budget", "must be an object")])),
        }
    }
    Ok(Ok(doc))
}

fn run_experiment(name: &str, args: &RunArgs) -> anyhow::Result<u8> {
    let config = match build_document(name, args)?.and_then(config_from_value) {
        Ok(c) => c,
        Err(violations) => {
            eprintln!("invalid configuration, nothing was written:");
            for v in &violations {
                eprintln!("  {v}");
            }
            return Ok(EXIT_ERROR);
        }
    };
    let out = args.out.clone().unwrap_or_else(|| Path::new("results").join(name));
    let start = Instant::now();
    let outcome = run(&config).with_context(|| format!("running {name}"))?;
    let elapsed = start.elapsed();
    outcome
        .write_to(&out, Some(elapsed))
        .with_context(|| format!("writing results to {}", out.display()))?;
    emit(&outcome.report.summary());
    eprintln!("wrote {} in {:.2} s", out.display(), elapsed.as_secs_f64());
    Ok(if outcome.passed() { 0 } else { EXIT_FAILED_CHECK })
}
