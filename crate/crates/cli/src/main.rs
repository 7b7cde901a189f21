use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ermakov_cli::{compare, load_scenario, parse_methods, run, verify, CliError, CommandOutput};

#[derive(Parser)]
#[command(name = "ermakov", version, about = "Integrate and check Ermakov systems from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory CSV and report
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the conservation and symmetry claims on a scenario
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a scenario by several methods and compare them
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value = "direct,quadrature,linearize")]
        methods: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<CommandOutput, CliError> {
    match cmd {
        Command::Run { scenario, out } => run(&load_scenario(&scenario)?, &out),
        Command::Verify { scenario, out } => verify(&load_scenario(&scenario)?, out.as_deref()),
        Command::Compare { scenario, methods, out } => {
            let methods = parse_methods(&methods);
            let scn = load_scenario(&scenario);
            match (scn, methods) {
                (Ok(scn), Ok(methods)) => compare(&scn, &methods, &out),
                (Err(CliError::Schema(mut a)), Err(CliError::Schema(b))) => {
                    a.extend(b);
                    Err(CliError::Schema(a))
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(output) => {
            for line in &output.lines {
                println!("{line}");
            }
            ExitCode::from(output.report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
