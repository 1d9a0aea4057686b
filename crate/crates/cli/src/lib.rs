//! Command-line harness for the verification suites.
//!
//! Exit codes: 0 when every suite passes, 1 when any suite fails or a
//! numerical error occurs, 2 on configuration or I/O errors.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod suites;

use std::fmt;
use std::path::PathBuf;

use subfinsler_core::sampling::seeded_rng;
use subfinsler_core::Error;

pub use config::RunConfig;
pub use suites::SuiteOutput;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "configuration error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::BudgetExceeded { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckIdentities,
    VerifyYamabe,
    VerifyFundamental,
    Wulff,
    Energy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckIdentities => "check-identities",
            Command::VerifyYamabe => "verify-yamabe",
            Command::VerifyFundamental => "verify-fundamental",
            Command::Wulff => "wulff",
            Command::Energy => "energy",
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

pub fn load_config(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(n) = o.samples {
        cfg.sample_count = n;
    }
    if let Some(p) = &o.out {
        cfg.output_path = Some(p.clone());
    }
    cfg.validate()?;
    if let (Some(out), Some(config)) = (&cfg.output_path, &o.config) {
        let summary = output::json_path(out);
        if summary == *config || out == config {
            return Err(CliError::Config(format!(
                "output {} would overwrite the config file",
                out.display()
            )));
        }
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<SuiteOutput, CliError> {
    let mut rng = seeded_rng(cfg.seed);
    match command {
        Command::CheckIdentities => suites::check_identities(cfg, &mut rng),
        Command::VerifyYamabe => suites::verify_yamabe_cmd(cfg, &mut rng),
        Command::VerifyFundamental => suites::verify_fundamental_cmd(cfg, &mut rng),
        Command::Wulff => suites::wulff_cmd(cfg),
        Command::Energy => suites::energy_cmd(cfg),
    }
}

/// Loads the configuration, runs the command, writes reports, and returns
/// the exit code.
pub fn run(command: Command, o: &Overrides) -> i32 {
    let result = load_config(o).and_then(|cfg| {
        let out = execute(command, &cfg)?;
        print!("{}", output::status_lines(&out));
        match &cfg.output_path {
            Some(p) => output::write_outputs(p, command.name(), &cfg, &out)?,
            None => {
                let j = output::summary_json(command.name(), &cfg, &out);
                println!("{}", serde_json::to_string_pretty(&j).unwrap_or_default());
            }
        }
        Ok(out.passed())
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("subfinsler: {e}");
            e.exit_code()
        }
    }
}
