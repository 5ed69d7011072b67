//! Command-line front end for the `gaussmax` library.
//!
//! Every subcommand reads an optional JSON parameter block, lets flags
//! override it, runs, and emits CSV plus a JSON manifest
//! `{config, seed, version, elapsed_s}`.

pub mod args;
mod commands;
pub mod config;
pub mod repro;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::{Map, Value};

use args::{Cli, Command};

/// Version string recorded in manifests.
pub const VERSION: &str = match option_env!("GAUSSMAX_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const RUNTIME: i32 = 2;
    pub const SOFT_FLAG: i32 = 3;
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters.
    Usage(String),
    Core(gaussmax::Error),
    Io(std::io::Error),
}

impl From<gaussmax::Error> for CliError {
    fn from(e: gaussmax::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gaussmax::Error as E;
        match self {
            CliError::Usage(_) => exit::VALIDATION,
            CliError::Core(
                E::InvalidParameter(_)
                | E::InvalidAlpha(_)
                | E::HorizonTooSmall { .. }
                | E::OscillatingLimit { .. }
                | E::InvalidConstants { .. }
                | E::DomainError(_)
                | E::RegimeMismatch(_),
            ) => exit::VALIDATION,
            CliError::Core(_) | CliError::Io(_) => exit::RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Everything a subcommand produces.
pub struct Output {
    command: &'static str,
    config: Value,
    seed: u64,
    tables: Vec<(String, String)>,
    binaries: Vec<(String, Vec<u8>)>,
    results: Map<String, Value>,
    soft_flags: Vec<String>,
}

impl Output {
    fn new<C: Serialize>(command: &'static str, config: &C, seed: u64) -> Self {
        Output {
            command,
            config: serde_json::to_value(config).expect("config serialises"),
            seed,
            tables: Vec::new(),
            binaries: Vec::new(),
            results: Map::new(),
            soft_flags: Vec::new(),
        }
    }

    fn table(&mut self, file: &str, csv: String) {
        self.tables.push((file.to_string(), csv));
    }

    fn binary(&mut self, file: &str, bytes: Vec<u8>) {
        self.binaries.push((file.to_string(), bytes));
    }

    fn extra<T: Serialize>(&mut self, key: &str, v: &T) {
        self.results.insert(key.to_string(), serde_json::to_value(v).expect("result serialises"));
    }

    fn soft_flag(&mut self, msg: String) {
        self.soft_flags.push(msg);
    }

    fn manifest(&self, elapsed_s: f64) -> Value {
        let mut m = serde_json::json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": VERSION,
            "elapsed_s": elapsed_s,
        });
        if !self.results.is_empty() {
            m["results"] = Value::Object(self.results.clone());
        }
        m
    }

    fn emit(&self, out_dir: Option<&Path>, elapsed_s: f64) -> Result<(), CliError> {
        let manifest = serde_json::to_string_pretty(&self.manifest(elapsed_s)).expect("manifest serialises");
        match out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                for (name, csv) in &self.tables {
                    std::fs::write(dir.join(name), csv)?;
                }
                for (name, bytes) in &self.binaries {
                    std::fs::write(dir.join(name), bytes)?;
                }
                std::fs::write(dir.join("manifest.json"), manifest + "\n")?;
            }
            None => {
                if !self.binaries.is_empty() {
                    return Err(CliError::Usage("binary output needs --out-dir".into()));
                }
                let text: Vec<&str> = self.tables.iter().map(|(_, csv)| csv.as_str()).collect();
                print!("{}", text.join("\n"));
                eprintln!("{manifest}");
            }
        }
        Ok(())
    }
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    let mut root = config::load(g.config.as_deref())?;
    let uses_cap = matches!(
        cli.command,
        Command::EstimatePickands(_) | Command::RunExperiment(_) | Command::TailCheck(_) | Command::DenseStudy(_)
    );
    if uses_cap {
        config::default_work_cap_from_env(&mut root)?;
        config::set(&mut root, &["work_cap"], g.work_cap);
    } else if g.work_cap.is_some() {
        return Err(CliError::Usage("--work-cap does not apply to this subcommand".into()));
    }
    match &cli.command {
        Command::SimulateField(a) => commands::simulate_field(root, a, g.seed),
        Command::EstimatePickands(a) => commands::estimate_pickands(root, a, g.seed),
        Command::EvalLimit(a) => commands::eval_limit(root, a),
        Command::RunExperiment(a) => commands::run_experiment(root, a, g.seed),
        Command::TailCheck(a) => commands::tail_check(root, a, g.seed),
        Command::DenseStudy(a) => commands::dense_study(root, a, g.seed),
        Command::Repro(a) => commands::repro(root, a),
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::OK };
        }
    };
    let start = Instant::now();
    let threads = cli.global.threads.unwrap_or(0);
    let result = gaussmax::parallel::with_threads(threads, || dispatch(&cli));
    let outcome = result.and_then(|out| {
        out.emit(cli.global.out_dir.as_deref(), start.elapsed().as_secs_f64())?;
        Ok(out.soft_flags)
    });
    match outcome {
        Ok(flags) => {
            for f in &flags {
                eprintln!("warning: {f}");
            }
            if cli.global.strict && !flags.is_empty() {
                exit::SOFT_FLAG
            } else {
                exit::OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
