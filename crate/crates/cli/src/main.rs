use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

mod config;
mod output;
mod recipes;
mod run;

use config::{apply_override, ConfigError, Format, RunConfig};
use run::{exit_code, Outcome, RunError};

/// Measurement-modified dephasing rates, crossovers and oracle checks.
#[derive(Debug, Parser)]
#[command(name = "zeno-dephase", version)]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "ZENO_DEPHASE_JOBS")]
    jobs: Option<usize>,

    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write its table.
    Run {
        /// JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a configuration key, e.g. `--set system.j=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
    },
    /// Print the configurations that regenerate a figure.
    Recipe {
        /// fig1, fig2a, fig2b, fig3a, fig3b or supp1..supp6.
        name: String,
        /// Write one `<label>.json` per curve into this directory instead of printing.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compare every kernel formula with the truncated Fock-space reference.
    OracleCheck {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
    },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn load_document(path: Option<&Path>) -> Result<Value, ConfigError> {
    let Some(path) = path else {
        return Ok(Value::Object(Default::default()));
    };
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Value::Object(Default::default()));
    }
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{} is not valid JSON: {e}", path.display())))
}

fn resolve(
    path: Option<&Path>,
    overrides: &[String],
    output: Option<&Path>,
    format: Option<&str>,
) -> Result<RunConfig, ConfigError> {
    let mut doc = load_document(path)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(p) = output {
        apply_override(&mut doc, &format!("output.path={}", Value::String(p.to_string_lossy().into())))?;
    }
    if let Some(f) = format {
        apply_override(&mut doc, &format!("output.format={f}"))?;
    }
    RunConfig::from_value(&doc)
}

fn write_outcome(outcome: &Outcome, path: Option<&Path>, format: Format) -> io::Result<()> {
    let mut body = Vec::new();
    match format {
        Format::Csv => output::write_csv(&outcome.table, &mut body).map_err(io::Error::other)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut body, &output::to_json(&outcome.table, &outcome.metadata))?;
            body.push(b'\n');
        }
    }
    match path {
        None => io::stdout().lock().write_all(&body),
        Some(p) => {
            fs::write(p, &body)?;
            if format == Format::Csv {
                let mut meta = serde_json::to_vec_pretty(&outcome.metadata)?;
                meta.push(b'\n');
                fs::write(sidecar(p), meta)?;
            }
            Ok(())
        }
    }
}

/// `<path>.meta.json`.
fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn finish(result: Result<Outcome, RunError>, path: Option<&Path>, format: Format) -> ExitCode {
    let outcome = match result {
        Ok(o) => o,
        Err(RunError::Config(e)) => return fail(1, e),
        Err(RunError::Numerical(e)) => return fail(exit_code(&e), e),
    };
    if let Err(e) = write_outcome(&outcome, path, format) {
        return fail(1, format!("cannot write output: {e}"));
    }
    match outcome.failures.iter().map(exit_code).max() {
        None => ExitCode::SUCCESS,
        Some(code) => {
            for f in &outcome.failures {
                eprintln!("error: {f}");
            }
            ExitCode::from(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return fail(1, "invalid value for --jobs: expected at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match cli.command {
        Command::Run {
            config,
            overrides,
            output,
            format,
        } => {
            let cfg = match resolve(config.as_deref(), &overrides, output.as_deref(), format.as_deref()) {
                Ok(c) => c,
                Err(e) => return fail(1, e),
            };
            log::info!("running mode {}", cfg.mode.name());
            finish(run::execute(&cfg), cfg.output.path.as_deref(), cfg.output.format)
        }
        Command::Recipe { name, output_dir } => {
            let configs = match recipes::recipe(&name) {
                Ok(c) => c,
                Err(e) => return fail(1, e),
            };
            match output_dir {
                None => {
                    let text = serde_json::to_string_pretty(&configs).expect("recipes serialize");
                    println!("{text}");
                }
                Some(dir) => {
                    if let Err(e) = fs::create_dir_all(&dir) {
                        return fail(1, format!("cannot create {}: {e}", dir.display()));
                    }
                    for c in &configs {
                        let label = c["label"].as_str().unwrap_or(&name);
                        let path = dir.join(format!("{label}.json"));
                        let text = serde_json::to_string_pretty(c).expect("recipes serialize") + "\n";
                        if let Err(e) = fs::write(&path, text) {
                            return fail(1, format!("cannot write {}: {e}", path.display()));
                        }
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::OracleCheck { output, format } => {
            let format = format.as_deref().and_then(Format::parse).unwrap_or(Format::Csv);
            finish(run::oracle_check(), output.as_deref(), format)
        }
    }
}
