use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use formalism_lab::{cmd_check, cmd_demo, cmd_run, Output, OutputFormat, DEFAULT_SEED, DEMOS};

#[derive(Parser)]
#[command(name = "formalism-lab", version, about = "Compare measurement calculi on scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, elaborate and run scenario files.
    Run {
        #[arg(required = true)]
        files: Vec<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Tolerance for `expect` comparisons without their own `tol`.
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tolerance: f64,
    },
    /// Print reference tables next to computed values.
    #[command(after_help = format!("Demos: {}", DEMOS.join(", ")))]
    Demo {
        name: Option<String>,
        #[arg(long, env = "FORMALISM_LAB_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the embedded randomized property suite.
    Check {
        #[arg(long, env = "FORMALISM_LAB_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn emit(out: Output) -> ExitCode {
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    emit(match cli.command {
        Command::Run {
            files,
            format,
            tolerance,
        } => cmd_run(&files, format, tolerance),
        Command::Demo { name, seed } => cmd_demo(name.as_deref(), seed),
        Command::Check { seed } => cmd_check(seed),
    })
}
