use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lpnet_cli::{cmd_example, cmd_sample, cmd_solve, cmd_verify, SampleFormat};

/// Minimum L_p-norm interpolation curve networks on triangulated scattered data.
#[derive(Parser)]
#[command(name = "lpnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the minimum norm network and write a solution document.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Check the interpolation and tangent-plane conditions of a solution.
    Verify {
        #[arg(long)]
        solution: PathBuf,
    },
    /// Sample every edge curve uniformly.
    Sample {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        per_edge: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a built-in dataset.
    Example {
        #[arg(long)]
        name: String,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Solve { input, p, output, residual_tol, max_iters } => {
            cmd_solve(&input, p, &output, residual_tol, max_iters)
        }
        Command::Verify { solution } => cmd_verify(&solution),
        Command::Sample { solution, per_edge, format, output } => {
            let format = match format {
                Format::Csv => SampleFormat::Csv,
                Format::Json => SampleFormat::Json,
            };
            cmd_sample(&solution, per_edge, format, &output)
        }
        Command::Example { name, output } => cmd_example(&name, &output),
    };
    ExitCode::from(code as u8)
}
