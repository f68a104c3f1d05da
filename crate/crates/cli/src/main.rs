//! `rne`: run simulation or real-data experiments and write result tables.
//!
//! Settings come from an optional flat `key = value` file, then from flags.
//! Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rne_core::experiment::output::{write_csv, write_json, write_raw_csv};
use rne_core::experiment::{run_experiment, ExperimentConfig, OutputFormat};
use rne_core::Error;

#[derive(Parser, Debug)]
#[command(name = "rne", version, about = "Matrix completion experiments")]
struct Args {
    /// Flat config file with one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated methods: rne, cf_user, cf_item, softimpute, blindreg, or all.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    snr: Option<String>,
    /// variance_ratio (σ² = signal/snr²) or signal_as_sd (σ = signal/snr).
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    p_miss: Option<String>,
    /// Fraction of rows and of columns held out entirely.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    train_frac: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Bandwidth multipliers, comma-separated.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    /// Soft-impute penalty grid, comma-separated.
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Delimited user,item,value file; replaces the simulation.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    user_frac: Option<String>,
    #[arg(long)]
    item_frac: Option<String>,
    /// Apply log(1 + x) to values on ingest.
    #[arg(long)]
    log1p: bool,
    /// Results file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Per-repetition CSV dump.
    #[arg(long)]
    raw_out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Any other config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidShape(_)
        | Error::EmptyGrid
        | Error::InfeasibleSplit { .. } => 2,
        Error::SvdFailure | Error::NonConvergence { .. } => 4,
        _ => 3,
    }
}

fn build_config(args: &Args) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_file_contents(&text)?;
    }
    let flags = [
        ("method", &args.method),
        ("n", &args.n),
        ("m", &args.m),
        ("k", &args.k),
        ("snr", &args.snr),
        ("noise", &args.noise),
        ("p_miss", &args.p_miss),
        ("phi", &args.phi),
        ("train_frac", &args.train_frac),
        ("reps", &args.reps),
        ("seed", &args.seed),
        ("beta", &args.beta),
        ("grid", &args.grid),
        ("folds", &args.folds),
        ("lambda_grid", &args.lambda_grid),
        ("dataset", &args.dataset),
        ("user_frac", &args.user_frac),
        ("item_frac", &args.item_frac),
        ("out", &args.out),
        ("raw_out", &args.raw_out),
        ("format", &args.format),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if args.log1p {
        cfg.log1p = true;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(args: &Args) -> Result<u8, Error> {
    let cfg = build_config(args)?;
    let res = run_experiment(&cfg)?;
    let mut out = open_out(&cfg.out)?;
    match cfg.format {
        OutputFormat::Csv => write_csv(&res, &mut out)?,
        OutputFormat::Json => write_json(&res, &mut out)?,
    }
    out.flush()?;
    if let Some(p) = &cfg.raw_out {
        let mut raw = BufWriter::new(File::create(p)?);
        write_raw_csv(&res, &mut raw)?;
        raw.flush()?;
    }
    for f in &res.failures {
        let method = f.method.map_or("-", |m| m.as_str());
        eprintln!("rep {} method {}: {}", f.rep, method, f.message);
    }
    Ok(match res.failures.iter().find(|f| f.numeric) {
        Some(_) => 4,
        None if res.failures.is_empty() => 0,
        None => 3,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
