use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use microformal_cli::problem::Task;
use microformal_cli::{
    load_file, run_problem, verify, CliError, Defaults, Report, RunOptions, VerifyOptions, EXIT_ASSERTION, EXIT_INPUT,
    EXIT_OK,
};

#[derive(Parser)]
#[command(name = "microformal", version, about = "Exact pullbacks, brackets and Hamilton-Jacobi shifts on supermanifolds")]
struct Cli {
    /// Default pullback order for tasks that leave it open.
    #[arg(long, global = true, default_value_t = 2)]
    order: u32,
    /// Default fiber cap for relations and compositions that leave it open.
    #[arg(long = "fiber-cap", global = true)]
    fiber_cap: Option<u32>,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing but errors; the exit status carries the verdict.
    #[arg(long, global = true)]
    quiet: bool,
    /// Record wall time per task (makes reports run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a problem file.
    Run { file: PathBuf },
    /// Pull a function back along a relation.
    Pullback { file: PathBuf, relation: String, function: String },
    /// Compose two relations, outer after inner.
    Compose { file: PathBuf, outer: String, inner: String, name: Option<String> },
    /// Re-express a relation in new target coordinates.
    Coords { file: PathBuf, relation: String, change: String, name: Option<String> },
    /// Canonical bracket of two hamiltonians.
    Bracket { file: PathBuf, left: String, right: String },
    /// Derived bracket of functions with respect to a hamiltonian.
    Derived { file: PathBuf, hamiltonian: String, args: Vec<String> },
    /// Hamilton-Jacobi operations.
    Hj {
        #[arg(value_enum)]
        op: HjOp,
        file: PathBuf,
        /// Names in the order the operation expects: apply H f; commutator H F f0;
        /// related R H1 H2; morphism R H1 H2 g.
        names: Vec<String>,
    },
    /// Run randomized property suites.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Instances per property, overriding the defaults.
        #[arg(long)]
        instances: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HjOp {
    Apply,
    Commutator,
    Related,
    Morphism,
}

fn hj_task(op: HjOp, names: &[String]) -> Result<Task, CliError> {
    let want = match op {
        HjOp::Apply => 2,
        HjOp::Commutator | HjOp::Related => 3,
        HjOp::Morphism => 4,
    };
    if names.len() != want {
        return Err(CliError::Input(format!("expected {want} names, got {}", names.len())));
    }
    let n = |i: usize| names[i].clone();
    Ok(match op {
        HjOp::Apply => Task::HjApply { hamiltonian: n(0), function: n(1) },
        HjOp::Commutator => Task::HjCommutator { h: n(0), f: n(1), f0: n(2) },
        HjOp::Related => Task::Related { relation: n(0), source: n(1), target: n(2) },
        HjOp::Morphism => Task::Morphism { relation: n(0), source: n(1), target: n(2), function: n(3), order: None },
    })
}

fn single(file: &Path, task: Task, opts: RunOptions) -> Result<Report, CliError> {
    let mut problem = load_file(file)?;
    problem.tasks = vec![task];
    run_problem(&problem, opts)
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let defaults = Defaults { order: cli.order, fiber_cap: cli.fiber_cap };
    let opts = RunOptions { defaults, timing: cli.timing };
    let report = match &cli.command {
        Command::Verify { suite, instances } => {
            let vo = VerifyOptions { seed: cli.seed, instances: *instances, ..VerifyOptions::default() };
            let report = verify(suite, &vo)?;
            emit(cli, &report, report.to_text());
            return Ok(report.passed);
        }
        Command::Run { file } => run_problem(&load_file(file)?, opts)?,
        Command::Pullback { file, relation, function } => single(
            file,
            Task::Pullback { relation: relation.clone(), function: function.clone(), order: None, name: None },
            opts,
        )?,
        Command::Compose { file, outer, inner, name } => single(
            file,
            Task::Compose {
                outer: outer.clone(),
                inner: inner.clone(),
                fiber_cap: None,
                name: name.clone().unwrap_or_else(|| format!("{outer}∘{inner}")),
            },
            opts,
        )?,
        Command::Coords { file, relation, change, name } => single(
            file,
            Task::Coords {
                relation: relation.clone(),
                change: change.clone(),
                name: name.clone().unwrap_or_else(|| format!("{relation}'")),
            },
            opts,
        )?,
        Command::Bracket { file, left, right } => {
            single(file, Task::Bracket { left: left.clone(), right: right.clone(), name: None }, opts)?
        }
        Command::Derived { file, hamiltonian, args } => {
            single(file, Task::Derived { hamiltonian: hamiltonian.clone(), args: args.clone() }, opts)?
        }
        Command::Hj { op, file, names } => single(file, hj_task(*op, names)?, opts)?,
    };
    emit(cli, &report, report.to_text());
    Ok(report.passed)
}

fn emit<T: serde::Serialize>(cli: &Cli, value: &T, text: String) {
    if cli.quiet {
        return;
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
    } else {
        print!("{text}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
