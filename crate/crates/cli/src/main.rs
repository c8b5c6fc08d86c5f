//! `thz-iqi`: run the link-level studies and write their CSV tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use thz_iqi::experiments::{self, Band, FileNaming, Scenario, Study};
use thz_iqi::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "thz-iqi", version, about = "I/Q imbalance studies for wideband multi-user THz MIMO-OFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wideband slope against amplitude imbalance.
    SlopeSweep(Common),
    /// Low-SNR spectral efficiency against Eb/N0, one curve per amplitude imbalance.
    SeCurve(Common),
    /// Sum rate against SNR with and without image and inter-user interference.
    RateVsSnr(Common),
    /// Full-band transmission against image-subcarrier nulling.
    Nulling(Common),
    /// Compare closed-form low-SNR metrics with numeric derivatives.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest acceptable relative disagreement.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON scenario; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one scenario key, e.g. `--set iqi.g=0.9` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, env = "THZ_IQI_OUT", default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    band: Option<String>,
    /// Name files `<study>_<band>.csv` without a timestamp.
    #[arg(long)]
    deterministic_names: bool,
    #[arg(long)]
    quiet: bool,
}

struct Failure {
    code: u8,
    kind: &'static str,
    key: Option<String>,
    message: String,
}

impl Failure {
    fn validation(key: Option<String>, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            kind: "validation",
            key,
            message: message.into(),
        }
    }

    fn io(path: &Path, message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            kind: "io",
            key: Some(path.display().to_string()),
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind, key) = match &e {
            Error::InvalidParameter { key, .. } => (EXIT_VALIDATION, "validation", Some(key.clone())),
            Error::InfeasibleIrr { .. } => (EXIT_VALIDATION, "validation", Some("iqi.irr_db".into())),
            Error::Io { path, .. } => (EXIT_IO, "io", Some(path.clone())),
            Error::Dimension(_) | Error::Numerical(_) | Error::Placement(_) => (EXIT_RUNTIME, "runtime", None),
        };
        Self {
            code,
            kind,
            key,
            message: e.to_string(),
        }
    }
}

/// Overlay `patch` onto `base`, recursing into objects.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn apply_override(doc: &mut Value, spec: &str) -> Result<(), Failure> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Failure::validation(Some(spec.into()), "override must look like KEY=VALUE"))?;
    let mut slot = &mut *doc;
    for part in key.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(part))
            .ok_or_else(|| Failure::validation(Some(key.into()), "unknown configuration key"))?;
    }
    if slot.is_object() {
        return Err(Failure::validation(Some(key.into()), "key names a section, not a value"));
    }
    *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    Ok(())
}

fn load_scenario(c: &Common) -> Result<Scenario, Failure> {
    let mut doc = serde_json::to_value(Scenario::default()).expect("defaults serialise");
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::validation(Some(path.display().to_string()), format!("malformed JSON: {e}")))?;
        merge(&mut doc, file);
    }
    for o in &c.overrides {
        apply_override(&mut doc, o)?;
    }
    let mut scn: Scenario =
        serde_json::from_value(doc).map_err(|e| Failure::validation(None, e.to_string()))?;
    if let Some(seed) = c.seed {
        scn.seed = seed;
    }
    if let Some(trials) = c.trials {
        scn.trials = trials;
    }
    if let Some(band) = &c.band {
        scn.band = band.parse::<Band>()?;
    }
    scn.validate()?;
    Ok(scn)
}

fn run_study(study: Study, c: &Common) -> Result<(), Failure> {
    let scn = load_scenario(c)?;
    let naming = if c.deterministic_names {
        FileNaming::Deterministic
    } else {
        FileNaming::Timestamped
    };
    let (table, path) = experiments::run(&scn, study, &c.out, naming)?;
    if !c.quiet {
        println!(
            "wrote {} study={} band={} rows={} trials={} seed={}",
            path.display(),
            table.study,
            scn.band.name(),
            table.rows.len(),
            scn.trials,
            scn.seed
        );
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::SlopeSweep(c) => run_study(Study::SlopeSweep, &c),
        Command::SeCurve(c) => run_study(Study::SeCurve, &c),
        Command::RateVsSnr(c) => run_study(Study::RateVsSnr, &c),
        Command::Nulling(c) => run_study(Study::Nulling, &c),
        Command::OracleCheck {
            instances,
            seed,
            tolerance,
            quiet,
        } => {
            if instances == 0 {
                return Err(Failure::validation(Some("instances".into()), "must be >= 1"));
            }
            let report = experiments::oracle_check(instances, seed)?;
            if !quiet {
                println!(
                    "oracle-check instances={} seed={seed} max_relative_error={:.3e} worst_instance={}",
                    report.instances, report.max_relative_error, report.worst_instance
                );
            }
            if report.max_relative_error < tolerance {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_RUNTIME,
                    kind: "runtime",
                    key: None,
                    message: format!(
                        "max relative error {:.3e} exceeds {tolerance:.3e}",
                        report.max_relative_error
                    ),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    if std::env::args_os().len() <= 1 {
        use clap::CommandFactory;
        let _ = Cli::command().print_help();
        return ExitCode::from(EXIT_USAGE);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error kind=usage message={:?}", first.trim_start_matches("error: "));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let key = f.key.map(|k| format!(" key={k}")).unwrap_or_default();
            eprintln!("error kind={}{key} message={:?}", f.kind, f.message);
            ExitCode::from(f.code)
        }
    }
}
