mod build_cmd;
mod io;
mod scan_cmd;
mod sim_cmd;
mod verify_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "codeswitch", version, about = "Build, verify, scan and simulate 2D/3D hypergraph-product code switching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build code bundles, CNOT schedules and CCZ supports from a JSON config.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify bundles, manifests and CCZ support files; prints a JSON report.
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Run a confinement, soundness or product-expansion scan.
    Scan(scan_cmd::ScanArgs),
    /// Run protocol simulations described by a JSON config.
    Sim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { config, out } => build_cmd::run(&config, &out),
        Command::Verify { paths } => verify_cmd::run(&paths),
        Command::Scan(args) => scan_cmd::run(&args),
        Command::Sim { config, out_dir } => sim_cmd::run(&config, &out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
