//! Hosting an engine process: command-line options, the monitor socket,
//! signals and exit codes. Shared by `rips run` and generated programs.

use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;

use crate::predicates::external::{IdsConfig, DEFAULT_IDS_DIR, DEFAULT_IDS_PATTERN};
use crate::runtime::engine::{EngineConfig, Exit, MainLoop, RuleEngine};
use crate::runtime::{LevelSpec, Runtime, RuntimeConfig, SignalCounters, SystemClock, SystemRunner};
use crate::semantics::ScriptTable;
use crate::sim::bench::{read_corpus, replay_docs};
use crate::wire::{register_signals, SocketServer, DEFAULT_SOCKET};

pub const EXIT_OK: i32 = 0;
/// A static error in the rules file, its scripts or its resources.
pub const EXIT_STATIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// A `crash` action ran.
pub const EXIT_CRASH: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const DEFAULT_SCRIPTS_DIR: &str = "/etc/rips/scripts";

/// Options of a running engine.
#[derive(Debug, Clone, clap::Args)]
pub struct EngineArgs {
    /// Unix-domain socket the monitor connects to.
    #[arg(short = 's', long = "socket", default_value = DEFAULT_SOCKET)]
    pub socket: PathBuf,
    /// Interval between evaluations of External rules, in milliseconds.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub tick_ms: u64,
    /// Time limit for exec actions, transition scripts and plugins, in
    /// milliseconds.
    #[arg(long, default_value_t = 30_000)]
    pub exec_timeout_ms: u64,
    /// Directory scanned by `idsalert`.
    #[arg(long, default_value = DEFAULT_IDS_DIR)]
    pub ids_dir: PathBuf,
    /// File-name pattern of IDS alert files.
    #[arg(long, default_value = DEFAULT_IDS_PATTERN)]
    pub ids_pattern: String,
    /// Print the final variable values to standard output on exit.
    #[arg(long)]
    pub dump_vars: bool,
}

impl EngineArgs {
    pub fn runtime_config(&self, scripts: Option<ScriptTable>) -> Result<RuntimeConfig, String> {
        let ids = IdsConfig::parse(&self.ids_dir, &self.ids_pattern)
            .map_err(|e| format!("invalid IDS file pattern {:?}: {e}", self.ids_pattern))?;
        Ok(RuntimeConfig {
            scripts,
            exec_timeout: Duration::from_millis(self.exec_timeout_ms),
            ids,
        })
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            tick: Duration::from_millis(self.tick_ms),
            ..EngineConfig::default()
        }
    }
}

/// Log to standard error; `RUST_LOG` overrides `default`.
pub fn init_logging(default: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Validate the scripts directory, printing one line per problem.
pub fn validate_scripts(source_name: &str, levels: &[LevelSpec], dir: &Path) -> Result<ScriptTable, i32> {
    ScriptTable::validate(levels, dir).map_err(|errors| {
        for e in errors {
            eprintln!("{source_name}: error: {e}");
        }
        EXIT_STATIC
    })
}

/// Serve the monitor until interrupted or a `crash` action runs. Returns
/// the process exit status.
pub fn serve<E: RuleEngine>(engine: E, levels: Vec<LevelSpec>, scripts: Option<ScriptTable>, args: &EngineArgs) -> i32 {
    let cfg = match args.runtime_config(scripts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rips: {e}");
            return EXIT_USAGE;
        }
    };
    let signals = Arc::new(SignalCounters::new());
    let _registration = match register_signals(Arc::clone(&signals)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rips: cannot register signal handlers: {e}");
            return EXIT_IO;
        }
    };
    let stop = Arc::new(AtomicBool::new(false));
    for sig in [signal_hook::consts::SIGINT, signal_hook::consts::SIGTERM] {
        if let Err(e) = signal_hook::flag::register(sig, Arc::clone(&stop)) {
            eprintln!("rips: cannot register signal handlers: {e}");
            return EXIT_IO;
        }
    }
    let (server, rx) = match SocketServer::bind(&args.socket) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("rips: cannot listen on {}: {e}", args.socket.display());
            return EXIT_IO;
        }
    };
    let rt = Runtime::new(
        levels,
        cfg,
        Arc::new(SystemClock::new()),
        Arc::new(SystemRunner::new()),
        signals,
    );
    let mut main = MainLoop::new(engine, rt, args.engine_config()).with_stop(stop);
    let mut sink = server.sink();
    let exit = main.run(&rx, &mut sink);
    drop(server);
    if args.dump_vars {
        for (name, value) in main.engine().dump_vars() {
            println!("{name} = {value}");
        }
    }
    match exit {
        Exit::Crash(msg) => {
            eprintln!("rips: crash: {msg}");
            EXIT_CRASH
        }
        Exit::SourceClosed | Exit::Stopped => EXIT_OK,
    }
}

/// What a generated program tells the host about itself.
pub struct GeneratedSpec<E> {
    pub source_name: &'static str,
    pub levels: fn() -> Vec<LevelSpec>,
    /// Scripts directory validated at generation time.
    pub scripts_dir: Option<&'static str>,
    pub load: fn() -> Result<E, String>,
}

#[derive(Debug, Parser)]
#[command(about = "Rules engine generated by rips", version)]
struct GeneratedCli {
    #[command(flatten)]
    engine: EngineArgs,
    /// Transition scripts directory. Defaults to the one validated when the
    /// program was generated.
    #[arg(long, value_name = "DIR")]
    scripts: Option<PathBuf>,
    /// Run without transition scripts.
    #[arg(long, conflicts_with = "scripts")]
    no_scripts: bool,
    /// Replay a recorded event corpus, print timings and exit.
    #[arg(long, value_name = "CORPUS")]
    replay: Option<PathBuf>,
}

/// Entry point of a generated program. Scripts are validated again at
/// startup since the deployment host may differ from the build host.
pub fn generated_main<E: RuleEngine>(spec: GeneratedSpec<E>) -> i32 {
    init_logging("warn");
    let cli = GeneratedCli::parse();
    let levels = (spec.levels)();
    let mut engine = match (spec.load)() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{}: error: {e}", spec.source_name);
            return EXIT_STATIC;
        }
    };
    if let Some(corpus) = cli.replay {
        let docs = match read_corpus(&corpus) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("rips: cannot read {}: {e}", corpus.display());
                return EXIT_IO;
            }
        };
        let t = replay_docs(&mut engine, levels, &docs);
        print!("{}", t.to_yaml());
        return EXIT_OK;
    }
    let scripts = if cli.no_scripts {
        None
    } else {
        let dir = cli
            .scripts
            .or_else(|| spec.scripts_dir.map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_SCRIPTS_DIR));
        match validate_scripts(spec.source_name, &levels, &dir) {
            Ok(t) => Some(t),
            Err(code) => return code,
        }
    };
    serve(engine, levels, scripts, &cli.engine)
}
