use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subfinsler_cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "subfinsler", version, about = "Pointwise verification of sub-Finsler Grushin identities")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Norm identities, radial formula, chain rules, gauge duality, jets vs differences.
    CheckIdentities(Common),
    /// Yamabe-type solution and the identities behind it.
    VerifyYamabe(Common),
    /// Fundamental solutions for the configured (alpha, p) cases.
    VerifyFundamental(Common),
    /// Wulff shapes and 2-D gauge slices as closed polylines.
    Wulff(Common),
    /// Energy, L^q norm and Sobolev quotient by quadrature.
    Energy(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV report path; the JSON summary goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

impl From<Common> for Overrides {
    fn from(c: Common) -> Self {
        Overrides {
            config: c.config,
            out: c.out,
            seed: c.seed,
            samples: c.samples,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, common) = match cli.command {
        Cmd::CheckIdentities(c) => (Command::CheckIdentities, c),
        Cmd::VerifyYamabe(c) => (Command::VerifyYamabe, c),
        Cmd::VerifyFundamental(c) => (Command::VerifyFundamental, c),
        Cmd::Wulff(c) => (Command::Wulff, c),
        Cmd::Energy(c) => (Command::Energy, c),
    };
    ExitCode::from(run(command, &common.into()) as u8)
}
