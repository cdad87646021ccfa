//! `mdpalign`: load instances, run solvers and searches, print JSON reports.
//!
//! Exit codes: 0 ok, 2 input error, 3 compute error, 4 verification failed
//! (or objectives unmet under `--strict`).

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mdpalign::{CriterionMode, Error};

use report::{emit, Inputs, RunReport};

#[derive(Debug, Parser)]
#[command(
    name = "mdpalign",
    version,
    about = "Reductions and alignments between deterministic MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Criterion deciding which state-action pairs count as optimal.
    #[arg(long, global = true, default_value = "stationary")]
    mode: CriterionMode,

    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel library calls.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Exit with code 4 when alignment objectives are not met.
    #[arg(long, global = true)]
    strict: bool,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Add wall time to the report. Reports are then no longer reproducible.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal values, greedy sets and the optimality table of an MDP.
    Solve {
        mdp: PathBuf,
        #[arg(long)]
        gamma_override: Option<f64>,
    },
    /// Check a reduction map {phi, psi} between two MDPs.
    Verify {
        mx: PathBuf,
        my: PathBuf,
        map: PathBuf,
    },
    /// Transfer a y-policy to M_x through alignment maps {f, g} or a reduction {phi, psi}.
    Adapt {
        my: PathBuf,
        map: PathBuf,
        mx: PathBuf,
        /// Policy on M_y; defaults to its covering policy.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Write the adapted policy here.
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
    /// Search for alignment maps by simulated annealing.
    Align {
        mx: PathBuf,
        my: PathBuf,
        /// Search configuration; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the best-so-far trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the found maps here.
        #[arg(long)]
        maps_out: Option<PathBuf>,
    },
    /// List every reduction between two MDPs.
    Enumerate {
        mx: PathBuf,
        my: PathBuf,
        /// Candidate limit; MDPALIGN_CAP overrides the default.
        #[arg(long, env = "MDPALIGN_CAP")]
        cap: Option<u64>,
    },
    /// Coarsest quotient of an MDP that is still a reduction target.
    Maximal {
        mdp: PathBuf,
        /// Write the quotient MDP here.
        #[arg(long)]
        quotient_out: Option<PathBuf>,
    },
    /// Whether every joint reduction of a task set also reduces a target task.
    Transfer {
        taskset: PathBuf,
        /// Target pair: x-MDP then y-MDP.
        #[arg(long, num_args = 2, value_names = ["MX", "MY"], conflicts_with = "expr")]
        target: Option<Vec<PathBuf>>,
        /// Target composed from the task set by a {"minterms": [[..]]} expression.
        #[arg(long)]
        expr: Option<PathBuf>,
        #[arg(long, env = "MDPALIGN_CAP")]
        cap: Option<u64>,
    },
    /// Write a planted pair and its reduction into a directory.
    Generate { spec: PathBuf, out_dir: PathBuf },
    /// Roll out a policy and compare the empirical triplet law with the exact one.
    Simulate {
        mdp: PathBuf,
        /// Policy file; defaults to the covering policy.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Rollout length.
        #[arg(short = 'n', long, default_value_t = 10_000)]
        steps: usize,
        /// One rollout per seed; defaults to the global seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    /// Library error raised while loading a file.
    InFile(PathBuf, Error),
    Input(String),
    /// The command ran and printed its report, but the result is a failure.
    Failed,
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) | CliError::InFile(_, e) => error_code(e),
            CliError::Input(_) => 2,
            CliError::Failed => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

/// Exit code of a library error.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::InvalidMdp { .. }
        | Error::InvalidPolicy(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidExpr(_)
        | Error::InvalidConfig(_)
        | Error::AlreadyAugmented
        | Error::ModeMismatch { .. } => 2,
        Error::NonConvergence { .. }
        | Error::SingularSystem(_)
        | Error::Multichain { .. }
        | Error::NonInjectiveG { .. }
        | Error::EmptyPreimage { .. }
        | Error::CapExceeded { .. }
        | Error::PreconditionFailed(_) => 3,
    }
}

/// Result of a command before it is wrapped into a report.
pub struct Outcome {
    pub payload: serde_json::Value,
    pub seeds: Vec<u64>,
    pub failed: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let outcome = commands::dispatch(cli, &cli.command, &mut inputs)?;
    let report = RunReport {
        command: std::env::args().skip(1).collect(),
        inputs: inputs.digests,
        seeds: outcome.seeds,
        payload: outcome.payload,
        wall_time_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    };
    emit(&report, cli.out.as_ref())?;
    if outcome.failed {
        return Err(CliError::Failed);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Lib(err) => eprintln!("error: {err}"),
                CliError::InFile(path, err) => eprintln!("error: {}: {err}", path.display()),
                CliError::Input(msg) => eprintln!("error: {msg}"),
                CliError::Failed => {}
            }
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_input_split() {
        let errors = [
            Error::Parse {
                line: 1,
                column: 1,
                message: String::new(),
            },
            Error::InvalidMdp {
                field: "eta".into(),
                reason: String::new(),
            },
            Error::InvalidPolicy(String::new()),
            Error::DimensionMismatch(String::new()),
            Error::InvalidExpr(String::new()),
            Error::InvalidConfig(String::new()),
            Error::AlreadyAugmented,
            Error::ModeMismatch {
                x: "a".into(),
                y: "b".into(),
            },
            Error::NonConvergence {
                sweeps: 1,
                residual: 1.0,
            },
            Error::SingularSystem(String::new()),
            Error::Multichain { classes: 2 },
            Error::NonInjectiveG {
                state_x: 0,
                action_x: 0,
            },
            Error::EmptyPreimage { action_y: 0 },
            Error::CapExceeded {
                candidates: 2.0,
                cap: 1,
            },
            Error::PreconditionFailed(String::new()),
        ];
        for e in &errors {
            assert_eq!(error_code(e), if e.is_input() { 2 } else { 3 }, "{e}");
        }
    }
}
