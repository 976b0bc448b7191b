mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

use config::{read_config_file, ConfigError, RunConfig, KEYS, OUT_DIR_ENV};
use pts_core::Error;

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("scatter", "transmission and reflection over k_values"),
    ("bound", "bound states, residuals and shooting eigenvalues"),
    ("kernel", "band kernel matrix and its decay profile"),
    ("bank", "band analysis and synthesis of the battery"),
    ("norm", "quasi-norms of the battery with equivalence ratios"),
    ("evolve", "Besov-norm decay of an evolved Gaussian"),
    ("verify", "acceptance criteria"),
];

fn cli() -> Command {
    let mut cmd = Command::new("pts")
        .about("Spectral experiments for the Pöschl–Teller well")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .global(true)
                .help("key = value configuration file"),
        );
    for (key, default, help) in KEYS {
        let help = if default.is_empty() {
            help.to_string()
        } else {
            format!("{help} [default: {default}]")
        };
        cmd = cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .global(true)
                .action(ArgAction::Set)
                .allow_hyphen_values(true)
                .help(help),
        );
    }
    for (name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(Command::new(*name).about(*about));
    }
    cmd
}

enum Failure {
    Config(String),
    Core(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => 2,
        Error::Precondition(_) | Error::Resolution(_) | Error::RefinementRequired(_) | Error::DomainTooSmall(_) => 3,
        _ => 1,
    }
}

fn run() -> Result<bool, Failure> {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(true),
                _ => Err(Failure::Config(String::new())),
            };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let file = match sub.get_one::<String>("config") {
        Some(path) => read_config_file(&PathBuf::from(path))?,
        None => BTreeMap::new(),
    };
    let flags: BTreeMap<String, String> = KEYS
        .iter()
        .filter_map(|(k, _, _)| sub.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    let cfg = RunConfig::resolve(&file, &flags, std::env::var(OUT_DIR_ENV).ok())?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let report = match name {
        "scatter" => commands::scatter(&cfg),
        "bound" => commands::bound(&cfg),
        "kernel" => commands::kernel(&cfg),
        "bank" => commands::bank(&cfg),
        "norm" => commands::norm(&cfg),
        "evolve" => commands::evolve(&cfg),
        "verify" => commands::verify(&cfg),
        _ => unreachable!("unknown subcommand {name}"),
    }?;
    for c in &report.checks {
        println!(
            "{} {} = {:e} (threshold {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.check_id,
            c.value,
            c.threshold
        );
    }
    println!("{}: {} ({} artifacts in {})", report.command, if report.pass { "pass" } else { "fail" }, report.artifacts.len(), cfg.out_dir.display());
    Ok(report.pass)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            if !msg.is_empty() {
                eprintln!("configuration error: {msg}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
