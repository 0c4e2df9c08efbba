use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use sheafcoord_cli::commands::{self, FlowOptions, SolveOptions, SEED_ENV};
use sheafcoord_cli::{CliError, Scenario};

/// Cellular sheaves, sheaf diffusion and distributed ADMM on graphs.
#[derive(Parser)]
#[command(name = "sheafcoord", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file, or the name of a built-in scenario.
    scenario: String,
    /// Member of a built-in family, e.g. `sign-cycle --n 4`.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print dim H0, dim H1 and a basis of global sections.
    Cohomology {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Run the linear (or nonlinear) sheaf heat flow from the initial state.
    Flow {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Use the edge potentials' gradients (drives δx toward the targets).
        #[arg(long)]
        nonlinear: bool,
        /// Maximum number of Euler steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Directory for trace.csv and terminal.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the homological program with ADMM.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Run the message-passing simulation instead of the centralized solver.
        #[arg(long)]
        distributed: bool,
        /// ADMM penalty, overrides the scenario's solver.rho.
        #[arg(long)]
        rho: Option<f64>,
        /// Iteration cap, overrides the scenario's solver.max_iters.
        #[arg(long)]
        max_iters: Option<usize>,
        /// Directory for trace.csv and terminal.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenariosAction,
    },
}

#[derive(Subcommand)]
enum ScenariosAction {
    /// List built-in scenarios.
    List,
    /// Print a built-in scenario document.
    Show {
        name: String,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load(arg: &ScenarioArg) -> Result<Scenario, CliError> {
    let mut scn = commands::load_scenario(&arg.scenario, arg.n)?;
    commands::apply_seed_override(&mut scn, std::env::var(SEED_ENV).ok())?;
    Ok(scn)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Cohomology { scenario } => commands::cohomology(&load(&scenario)?),
        Command::Flow {
            scenario,
            nonlinear,
            steps,
            out,
        } => commands::flow(&load(&scenario)?, &FlowOptions { nonlinear, steps, out }),
        Command::Solve {
            scenario,
            distributed,
            rho,
            max_iters,
            out,
        } => commands::solve(
            &load(&scenario)?,
            &SolveOptions {
                distributed,
                rho,
                max_iters,
                out,
            },
        ),
        Command::Scenarios { action } => match action {
            ScenariosAction::List => Ok(commands::list_scenarios()),
            ScenariosAction::Show { name, n } => commands::show_scenario(&name, n),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(mut text) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sheafcoord: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
