//! Command implementations behind the `formalism-lab` binary. Each command
//! returns its complete output so callers and tests see identical bytes.

pub mod check;
pub mod demo;
pub mod numfmt;
pub mod report;
pub mod run;

pub use check::cmd_check;
pub use demo::{cmd_demo, DEMOS};
pub use run::cmd_run;

/// Seed used when neither `--seed` nor `FORMALISM_LAB_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

/// Buffered result of one command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}
