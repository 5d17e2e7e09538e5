//! Transpiles the rules fixtures and a set of seeded random programs into
//! modules of this crate, so generated engines can be compared with the
//! interpreter inside one process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rips_core::gen::{random_program, seeded, ProgramOptions};
use rips_core::semantics::{compile, CompileOptions};
use rips_core::transpile::{rust_string_literal, transpile_program, TranspileOptions};

const FIXTURES: [&str; 5] = ["experiment1", "experiment2", "experiment3", "example", "intro"];
const RANDOM_PROGRAMS: u64 = 120;

fn main() {
    let manifest = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR"));
    let rules = manifest.join("../../rules").canonicalize().expect("rules directory");
    let out = PathBuf::from(std::env::var("OUT_DIR").expect("cargo sets OUT_DIR"));
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-changed={}", rules.display());

    let opts = TranspileOptions {
        generated_at: Some("1970-01-01T00:00:00Z".to_string()),
        ..TranspileOptions::module()
    };
    let mut registry = String::new();
    let _ = writeln!(registry, "pub const RULES_DIR: &str = {};", rust_string_literal(&rules.to_string_lossy()));

    let mut fixtures = Vec::new();
    for name in FIXTURES {
        let path = rules.join(format!("{name}.rul"));
        let source = std::fs::read_to_string(&path).expect("fixture readable");
        let copts = CompileOptions::new(format!("{name}.rul")).with_base_dir(&rules);
        emit(&mut registry, &out, &opts, &format!("fixture_{name}"), name, &source, &copts);
        fixtures.push(format!("fixture_{name}"));
    }

    let gen_opts = ProgramOptions {
        pattern_file: Some("yaraexp3.yar".to_string()),
        plugin: Some("/bin/true".to_string()),
        ..ProgramOptions::default()
    };
    let mut randoms = Vec::new();
    for seed in 0..RANDOM_PROGRAMS {
        let source = random_program(&mut seeded(seed), &gen_opts);
        let name = format!("random_{seed}");
        let copts = CompileOptions::new(format!("{name}.rul")).with_base_dir(&rules);
        emit(&mut registry, &out, &opts, &name, &name, &source, &copts);
        randoms.push(name);
    }

    for (table, mods) in [("FIXTURES", &fixtures), ("RANDOM", &randoms)] {
        let _ = writeln!(registry, "pub static {table}: &[Program] = &[");
        for m in mods {
            let _ = writeln!(registry, "    {m}::PROGRAM,");
        }
        let _ = writeln!(registry, "];");
    }
    std::fs::write(out.join("registry.rs"), registry).expect("registry written");
}

fn emit(
    registry: &mut String,
    out: &Path,
    opts: &TranspileOptions,
    module: &str,
    name: &str,
    source: &str,
    copts: &CompileOptions,
) {
    let checked = compile(source, copts).unwrap_or_else(|e| panic!("{name} does not compile:\n{source}\n{e}"));
    let generated = transpile_program(&checked, opts);
    std::fs::write(out.join(format!("{module}.rs")), generated.source).expect("module written");
    std::fs::write(out.join(format!("{module}.rul")), source).expect("source written");
    let _ = writeln!(
        registry,
        r#"#[allow(unused_variables, unused_parens, unreachable_code, dead_code, clippy::all)]
pub mod {module} {{
    include!(concat!(env!("OUT_DIR"), "/{module}.rs"));

    fn make() -> Result<Box<dyn rips_core::RuleEngine>, String> {{
        Ok(Box::new(Rules::load()?))
    }}

    pub const PROGRAM: crate::Program = crate::Program {{
        name: {name:?},
        source_name: SOURCE_NAME,
        source: include_str!(concat!(env!("OUT_DIR"), "/{module}.rul")),
        levels,
        make,
    }};
}}"#
    );
}
