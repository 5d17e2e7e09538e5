//! `rips`: interpret, check, transpile, simulate and benchmark rules files.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rips_core::host::EngineArgs;

#[derive(Debug, Parser)]
#[command(name = "rips", version, about = "Rule engine for intrusion prevention in publish/subscribe robotic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interpret a rules file, serving the monitor on a Unix socket.
    Run(RunArgs),
    /// Transpile a rules file into a standalone Rust program.
    Compile(CompileArgs),
    /// Static analysis only.
    Check(CheckArgs),
    /// Replay a scenario through a simulated monitor and report outcomes.
    Simulate(SimulateArgs),
    /// Time a recorded event corpus through the interpreter and the
    /// generated program.
    Bench(BenchArgs),
    /// Write the synthetic benchmark corpus.
    GenCorpus(GenCorpusArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Run without transition scripts.
    #[arg(long)]
    no_scripts: bool,
    /// `[SCRIPTS] RULES`; the scripts directory defaults to
    /// /etc/rips/scripts.
    #[arg(value_name = "PATHS", num_args = 1..=2, required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CompileArgs {
    rules: PathBuf,
    /// Scripts directory validated now and again when the program starts.
    #[arg(short = 'c', long = "scripts", value_name = "SCRIPTS")]
    scripts: PathBuf,
    /// Write the generated source here instead of standard output.
    #[arg(short = 'o', long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Emit a module body for `include!` instead of a binary crate root.
    #[arg(long)]
    module: bool,
    /// Path through which the generated code reaches the runtime crate.
    #[arg(long, default_value = "rips_core")]
    crate_path: String,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    rules: PathBuf,
    /// Also validate the transition scripts in this directory.
    scripts: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum EngineKind {
    Interpreted,
    /// The compiled-in generated program with the same source text.
    Generated,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    rules: PathBuf,
    scenario: PathBuf,
    /// Graph polling interval in seconds; overrides the scenario.
    #[arg(long, env = "RIPSPOLLING", value_parser = positive_secs)]
    polling: Option<f64>,
    /// Seconds to keep collecting outcomes after the last timeline entry.
    #[arg(long, value_parser = non_negative_secs)]
    grace: Option<f64>,
    /// Emit graph events only when the graph changed.
    #[arg(long)]
    on_change_only: bool,
    /// Report graph changes at the next poll rather than at once.
    #[arg(long)]
    detect_at_poll: bool,
    /// Emit only messages on topics some Msg rule refers to.
    #[arg(long)]
    subscribe_minimal: bool,
    /// Transition scripts directory; none by default.
    #[arg(long, value_name = "DIR")]
    scripts: Option<PathBuf>,
    /// Record exec, plugin and script invocations without running them.
    #[arg(long)]
    dry_run: bool,
    /// Interval between External rule evaluations, in milliseconds.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    tick_ms: u64,
    #[arg(long, value_enum, default_value_t = EngineKind::Interpreted)]
    engine: EngineKind,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    rules: PathBuf,
    /// Event documents separated by `...` lines.
    corpus: PathBuf,
    /// Generated program binary to time with `--replay`, for rules that
    /// are not compiled into this tool.
    #[arg(long, value_name = "BIN")]
    generated: Option<PathBuf>,
    /// Repetitions; the fastest time of each phase is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
}

#[derive(Debug, clap::Args)]
struct GenCorpusArgs {
    #[arg(long, default_value_t = rips_bench::DEFAULT_EVENTS)]
    events: usize,
    /// Write here instead of standard output.
    #[arg(short = 'o', long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn positive_secs(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number of seconds, found {s:?}")),
    }
}

fn non_negative_secs(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a non-negative number of seconds, found {s:?}")),
    }
}

const SUBCOMMANDS: [&str; 7] = ["run", "compile", "check", "simulate", "bench", "gen-corpus", "help"];

/// Accept the classic forms `rips [-s SOCK] [SCRIPTS] RULES` and
/// `rips RULES -c SCRIPTS`, which also covers hash-bang execution of a
/// rules file. The kernel passes a hash-bang option string as a single
/// argument, so it is split on whitespace.
fn normalize_args(args: Vec<OsString>) -> Vec<OsString> {
    let Some(first) = args.get(1).and_then(|a| a.to_str()) else {
        return args;
    };
    let meta = ["-h", "--help", "-V", "--version"];
    if SUBCOMMANDS.contains(&first) || meta.contains(&first) {
        return args;
    }
    let mut out = vec![args[0].clone()];
    let mut rest: Vec<OsString> = Vec::new();
    for (i, a) in args.into_iter().enumerate().skip(1) {
        match a.to_str() {
            Some(s) if i == 1 && s.starts_with('-') && s.contains(char::is_whitespace) => {
                rest.extend(s.split_whitespace().map(OsString::from));
            }
            _ => rest.push(a),
        }
    }
    let compile = rest.iter().any(|a| a == "-c" || a == "--scripts");
    out.push(OsString::from(if compile { "compile" } else { "run" }));
    out.extend(rest);
    out
}

fn main() {
    let cli = Cli::parse_from(normalize_args(std::env::args_os().collect()));
    let code = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Compile(a) => commands::compile(a),
        Command::Check(a) => commands::check(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bench(a) => commands::bench(a),
        Command::GenCorpus(a) => commands::gen_corpus(a),
    };
    std::process::exit(code);
}
