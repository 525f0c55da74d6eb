//! `cspin`: command-line front end for kicked central-spin simulations.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

use commands::{CommonFlags, Outcome};
use config::{DisorderFlags, EvolveFlags, KrylovFlags, ModelFlags, PhaseFlags};

#[derive(Parser, Debug)]
#[command(name = "cspin", version, about = "Kicked central-spin simulations in the collective and product bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stroboscopic satellite magnetization series
    Evolve {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        flags: EvolveFlags,
    },
    /// Time-averaged order parameter on a two-axis grid
    Phase {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        flags: PhaseFlags,
    },
    /// Overlap maps, effective dimensions and the zero-error Krylov census
    Krylov {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        flags: KrylovFlags,
    },
    /// Quasienergy, entanglement and central-spin overlaps of every Floquet eigenstate
    Scar {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Product-basis runs with Gaussian in-plane coupling disorder
    Disorder {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        flags: DisorderFlags,
    },
    /// Run the oracle and cross-engine self-checks
    Verify {
        /// Worker threads [default: available cores]
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn dispatch(command: Command) -> error::CliResult<Outcome> {
    match command {
        Command::Evolve { common, model, flags } => {
            commands::init_threads(common.threads)?;
            commands::evolve(&common, model, flags)
        }
        Command::Phase { common, model, flags } => {
            commands::init_threads(common.threads)?;
            commands::phase(&common, model, flags)
        }
        Command::Krylov { common, model, flags } => {
            commands::init_threads(common.threads)?;
            commands::krylov(&common, model, flags)
        }
        Command::Scar { common, model } => {
            commands::init_threads(common.threads)?;
            commands::scar(&common, model)
        }
        Command::Disorder { common, model, flags } => {
            commands::init_threads(common.threads)?;
            commands::disorder(&common, model, flags)
        }
        Command::Verify { threads } => {
            commands::init_threads(threads)?;
            commands::verify()
        }
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match dispatch(cli.command) {
            Ok(Outcome::Complete) => 0,
            Ok(Outcome::Partial) => {
                eprintln!("warning: sweep finished with NaN cells; see the manifest warnings");
                3
            }
            Ok(Outcome::ChecksFailed) => 2,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
