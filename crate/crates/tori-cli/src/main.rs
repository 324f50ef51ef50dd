//! `tori`: command-line driver for normal-form runs.
//!
//! Every verb works on a run directory holding `manifest.json`, a copy of
//! the model and the JSON/CSV files written by earlier verbs.

mod config;
mod manifest;
mod verbs;

use clap::{Args, Parser, Subcommand};
use config::{PipelineConfig, VERBS};
use manifest::{unix_now, RunDir, VerbRecord};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use tori::Error;

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_RESONANCE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_AUDIT: u8 = 4;

#[derive(Parser)]
#[command(name = "tori", about = "Normal forms for lower-dimensional elliptic tori", disable_version_flag = true)]
struct Cli {
    /// Print tool, module and constant versions.
    #[arg(short = 'V', long)]
    version: bool,
    /// Worker threads (0: one per core).
    #[arg(long, env = "TORI_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Pipeline configuration (TOML); defaults to the shipped parameter set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model file, overriding the configuration.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Run directory.
    #[arg(long, env = "TORI_OUT", default_value = "tori-run")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize the model step by step.
    Normalize(RunArgs),
    /// Check the hypotheses on the frequency box and compute the constants.
    Certify(RunArgs),
    /// Audit selection rules, counting bounds and norm estimates of a run.
    AuditLedger(RunArgs),
    /// Carve resonant strips and compare the measure with its bound.
    Measure(RunArgs),
    /// Integrate near the torus and measure the invariance error.
    Verify(RunArgs),
    /// Summarize the run directory.
    Report(RunArgs),
    /// Execute the configured verbs in dependency order.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Comma-separated verbs, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        verbs: Option<Vec<String>>,
    },
}

fn version_text() -> String {
    let mut s = format!("tori {}\nmodules:\n", env!("CARGO_PKG_VERSION"));
    for (m, v) in tori::MODULE_VERSIONS {
        s += &format!("  {m} {v}\n");
    }
    s += "constants:\n";
    for line in [
        "delta_r = 1/(2 pi^2 r^2), d_r = 3 sum_{i<=r} delta_i",
        "M = max(1, 4 pi^4 Ebar K^tau/gamma (2e/(rho sigma) + e^2/R^2))",
        "calA = M^3 2^(56 + 12 tau), eps_an = 1/calA",
        "eta = min(1/K, sigma), h_0 = min(eta, 1/(e (J0 + 1/sigma))) gamma/(8 K^tau), h_r = h_{r-1}/2^(tau+2)",
        "calB = min(h_0/(sigma gamma), 2^-tau), eps_ge = min(1, h_0/(sigma gamma))/(2^(tau+3) calA)",
        "eps_star = min(eps_ge, Theta0 calB/(64 calA (1/sigma + J0)), calB ln2/(16 calA n1^2))",
        "strip half-width at step r: 2 gamma/((r+1) K)^tau",
    ] {
        s += &format!("  {line}\n");
    }
    s
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ZeroDivisor { .. } | Error::Resonance { .. } => "resonance",
        Error::Config(_) => "config",
        Error::Unknown { .. } => "unknown_name",
        Error::Model(_) => "model",
        Error::Dimension(..) => "dimension",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Toml(_) => "toml",
        Error::Domain(_) => "domain",
        Error::NoConvergence(_) => "no_convergence",
        Error::Integration(_) => "integration",
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_resonance() => EXIT_RESONANCE,
        Error::Config(_) | Error::Unknown { .. } | Error::Model(_) | Error::Dimension(..) | Error::Io(_) | Error::Json(_) | Error::Toml(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn report_error(verb: Option<&str>, e: &Error) -> u8 {
    let code = exit_code(e);
    eprintln!("{}", json!({ "error": { "verb": verb, "kind": error_kind(e), "exit_code": code, "message": e.to_string() } }));
    code
}

fn resolve_config(args: &RunArgs) -> tori::Result<Option<PipelineConfig>> {
    if args.config.is_none() && args.model.is_none() {
        return Ok(None);
    }
    let mut cfg = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn execute(verb: &str, dir: &mut RunDir) -> u8 {
    let started = unix_now();
    let result = match verbs::outputs_of(verb).iter().find(|f| dir.has(f)) {
        Some(f) => Err(Error::Config(format!("{verb} already wrote {f} in this run directory"))),
        None => verbs::run_verb(verb, dir),
    };
    let strict = dir.params().mode == "strict";
    let (code, status, message, outputs) = match result {
        Ok(out) => match out.violations {
            Some(msg) if strict => (EXIT_AUDIT, "violations", Some(msg), out.outputs),
            Some(msg) => (EXIT_OK, "ok_with_violations", Some(msg), out.outputs),
            None => (EXIT_OK, "ok", None, out.outputs),
        },
        Err(e) => (report_error(Some(verb), &e), error_kind(&e), Some(e.to_string()), vec![]),
    };
    let rec = VerbRecord { verb: verb.into(), status: status.into(), exit_code: code.into(), message, started_unix: started, finished_unix: unix_now(), outputs };
    println!("{}", json!({ "verb": rec.verb, "status": rec.status, "exit_code": code, "outputs": rec.outputs }));
    match dir.record(rec) {
        Ok(()) => code,
        Err(e) => report_error(Some(verb), &e).max(code),
    }
}

fn pipeline(args: &RunArgs, requested: Option<Vec<String>>) -> tori::Result<(RunDir, Vec<&'static str>)> {
    let cfg = resolve_config(args)?;
    let dir = RunDir::open(&args.out, cfg)?;
    let wanted = requested.unwrap_or_else(|| dir.params().verbs.clone());
    if let Some(v) = wanted.iter().find(|v| !VERBS.contains(&v.as_str())) {
        return Err(Error::Unknown { kind: "verb", name: v.clone() });
    }
    let ordered = VERBS.into_iter().filter(|v| wanted.iter().any(|w| w == v)).collect();
    Ok((dir, ordered))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        print!("{}", version_text());
        return ExitCode::SUCCESS;
    }
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            return ExitCode::from(report_error(None, &Error::Config(format!("thread pool: {e}"))));
        }
    }
    let Some(command) = cli.command else {
        eprintln!("{}", json!({ "error": { "kind": "config", "exit_code": EXIT_CONFIG, "message": "no verb given; see --help" } }));
        return ExitCode::from(EXIT_CONFIG);
    };
    let (args, requested) = match command {
        Command::Normalize(a) => (a, Some(vec!["normalize".to_string()])),
        Command::Certify(a) => (a, Some(vec!["certify".to_string()])),
        Command::AuditLedger(a) => (a, Some(vec!["audit-ledger".to_string()])),
        Command::Measure(a) => (a, Some(vec!["measure".to_string()])),
        Command::Verify(a) => (a, Some(vec!["verify".to_string()])),
        Command::Report(a) => (a, Some(vec!["report".to_string()])),
        Command::Run { args, verbs } => (args, verbs),
    };
    let (mut dir, ordered) = match pipeline(&args, requested) {
        Ok(x) => x,
        Err(e) => return ExitCode::from(report_error(None, &e)),
    };
    for verb in ordered {
        let code = execute(verb, &mut dir);
        if code != EXIT_OK {
            return ExitCode::from(code);
        }
    }
    ExitCode::SUCCESS
}
