//! Subcommand bodies. Each returns the process exit status.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::sync::Arc;
use std::time::Duration;

use rips_core::host::{init_logging, serve, DEFAULT_SCRIPTS_DIR, EXIT_IO, EXIT_OK, EXIT_STATIC, EXIT_USAGE};
use rips_core::runtime::{DryRunner, ProcessRunner, SystemRunner};
use rips_core::semantics::{compile as check_source, CheckedProgram, CompileOptions};
use rips_core::sim::bench::{read_corpus, replay_docs, write_corpus, BenchReport, Timings};
use rips_core::sim::{simulate as run_scenario, Scenario, SimOptions, TopicFilter, TopicInterest};
use rips_core::transpile::{transpile_program, TranspileOptions};
use rips_core::{Interpreter, RuleEngine};

use crate::{BenchArgs, CheckArgs, CompileArgs, EngineKind, GenCorpusArgs, RunArgs, SimulateArgs};

/// The scenario ran but its expectations were not met.
pub const EXIT_SCENARIO_FAILED: i32 = 5;

fn read_rules(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("rips: cannot read {}: {e}", path.display());
        EXIT_IO
    })
}

/// Compile a rules file, printing diagnostics on failure.
fn load(path: &Path, scripts: Option<&Path>) -> Result<(String, CheckedProgram), i32> {
    let source = read_rules(path)?;
    let mut opts = CompileOptions::for_file(path);
    opts.scripts_dir = scripts.map(Path::to_path_buf);
    match check_source(&source, &opts) {
        Ok(p) => Ok((source, p)),
        Err(e) => {
            eprintln!("{e}");
            Err(EXIT_STATIC)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> i32 {
    match path {
        Some(p) => match fs::write(p, text) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("rips: cannot write {}: {e}", p.display());
                EXIT_IO
            }
        },
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}

pub fn run(a: RunArgs) -> i32 {
    init_logging("info");
    let (scripts, rules) = match a.paths.as_slice() {
        [rules] => (PathBuf::from(DEFAULT_SCRIPTS_DIR), rules.clone()),
        [scripts, rules] => (scripts.clone(), rules.clone()),
        _ => unreachable!("clap enforces one or two paths"),
    };
    if a.no_scripts && a.paths.len() == 2 {
        eprintln!("rips: a scripts directory was given together with --no-scripts");
        return EXIT_USAGE;
    }
    let scripts = (!a.no_scripts).then_some(scripts);
    let prog = match load(&rules, scripts.as_deref()) {
        Ok((_, p)) => p,
        Err(code) => return code,
    };
    let levels = prog.levels.clone();
    let table = prog.scripts.clone();
    serve(Interpreter::new(Arc::new(prog)), levels, table, &a.engine)
}

pub fn compile(a: CompileArgs) -> i32 {
    // The generated program validates this path again wherever it runs.
    let scripts = std::path::absolute(&a.scripts).unwrap_or(a.scripts);
    let prog = match load(&a.rules, Some(&scripts)) {
        Ok((_, p)) => p,
        Err(code) => return code,
    };
    let opts = TranspileOptions {
        with_main: !a.module,
        crate_path: a.crate_path,
        generated_at: None,
    };
    write_output(a.output.as_deref(), &transpile_program(&prog, &opts).source)
}

pub fn check(a: CheckArgs) -> i32 {
    match load(&a.rules, a.scripts.as_deref()) {
        Ok((_, p)) => {
            println!(
                "{}: ok: {} levels, {} consts, {} vars, {} rules",
                p.source_name,
                p.levels.len(),
                p.consts.len(),
                p.vars.len(),
                p.rules.len()
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

pub fn simulate(a: SimulateArgs) -> i32 {
    init_logging("warn");
    let (source, prog) = match load(&a.rules, a.scripts.as_deref()) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let scn = match Scenario::load(&a.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", a.scenario.display());
            return EXIT_USAGE;
        }
    };
    let runner: Arc<dyn ProcessRunner> = if a.dry_run {
        Arc::new(DryRunner)
    } else {
        Arc::new(SystemRunner::quiet())
    };
    let opts = SimOptions {
        polling: a.polling,
        grace: a.grace,
        on_change_only: a.on_change_only,
        detect_at_poll: a.detect_at_poll,
        filter: TopicFilter::from_env(),
        interest: a.subscribe_minimal.then(|| TopicInterest::from_program(&prog)),
        tick: Duration::from_millis(a.tick_ms),
        scripts: prog.scripts.clone(),
        runner,
        ..SimOptions::default()
    };
    let levels = prog.levels.clone();
    let engine: Box<dyn RuleEngine> = match a.engine {
        EngineKind::Interpreted => Box::new(Interpreter::new(Arc::new(prog))),
        EngineKind::Generated => match rips_bench::find_by_source(&source) {
            Some(p) => p.generated(),
            None => {
                eprintln!("rips: no generated program is compiled in for {}", a.rules.display());
                return EXIT_USAGE;
            }
        },
    };
    match run_scenario(engine, levels, &scn, &opts) {
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_SCENARIO_FAILED
            }
        }
        Err(e) => {
            eprintln!("rips: {e}");
            EXIT_IO
        }
    }
}

/// Time a generated program binary through its `--replay` option.
fn replay_external(bin: &Path, corpus: &Path) -> Result<Timings, String> {
    let out = Process::new(bin)
        .arg("--replay")
        .arg(corpus)
        .output()
        .map_err(|e| format!("cannot run {}: {e}", bin.display()))?;
    if !out.status.success() {
        return Err(format!(
            "{} exited with {}: {}",
            bin.display(),
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Timings::from_yaml(&String::from_utf8_lossy(&out.stdout))
        .ok_or_else(|| format!("{} printed no timings", bin.display()))
}

fn best_of(rounds: u32, mut round: impl FnMut() -> Result<Timings, String>) -> Result<Timings, String> {
    let mut best = round()?;
    for _ in 1..rounds {
        best = best.min(round()?);
    }
    Ok(best)
}

pub fn bench(a: BenchArgs) -> i32 {
    let (source, prog) = match load(&a.rules, None) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let docs = match read_corpus(&a.corpus) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("rips: cannot read {}: {e}", a.corpus.display());
            return EXIT_IO;
        }
    };
    let prog = Arc::new(prog);
    let interpreted = best_of(a.rounds, || {
        Ok(replay_docs(&mut Interpreter::new(Arc::clone(&prog)), prog.levels.clone(), &docs))
    });
    let generated = match (&a.generated, rips_bench::find_by_source(&source)) {
        (Some(bin), _) => best_of(a.rounds, || replay_external(bin, &a.corpus)),
        (None, Some(p)) => best_of(a.rounds, || Ok(replay_docs(&mut p.generated(), (p.levels)(), &docs))),
        (None, None) => {
            eprintln!(
                "rips: no generated program is compiled in for {}; build one with `rips compile` and pass it with --generated",
                a.rules.display()
            );
            return EXIT_USAGE;
        }
    };
    match (interpreted, generated) {
        (Ok(interpreted), Ok(generated)) => {
            print!("{}", BenchReport { interpreted, generated }.render());
            EXIT_OK
        }
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("rips: {e}");
            EXIT_IO
        }
    }
}

pub fn gen_corpus(a: GenCorpusArgs) -> i32 {
    let text = write_corpus(&rips_core::gen::bench_events(a.events));
    write_output(a.output.as_deref(), &text)
}
