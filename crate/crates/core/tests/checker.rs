//! Static analysis: every published listing is accepted, each class of
//! error is rejected with a positioned diagnostic, and the checker is
//! deterministic.

mod common;

use common::{listing, rules_dir};
use proptest::prelude::*;
use rips_core::gen::{random_program, seeded, ProgramOptions};
use rips_core::semantics::{compile, CompileError, CompileOptions};

fn check(src: &str) -> Result<rips_core::CheckedProgram, CompileError> {
    compile(src, &CompileOptions::new("t.rul").with_base_dir(rules_dir()))
}

/// Compile `vars` and `rules` under a fixed header and return the
/// diagnostics as `line:col: message`.
fn errors(vars: &str, rules: &str) -> Vec<String> {
    let src = format!("levels:\n  LOW;\n  HIGH;\nconsts:\n  K int = 3;\n  RE string = \"/a.*\";\nvars:\n{vars}\n{rules}");
    match check(&src) {
        Ok(_) => panic!("accepted:\n{src}"),
        Err(e) => e.diagnostics.iter().map(|d| format!("{}: {}", d.pos, d.message)).collect(),
    }
}

fn assert_error(vars: &str, rules: &str, at: &str, needle: &str) {
    let errs = errors(vars, rules);
    assert!(
        errs.iter().any(|e| e.starts_with(&format!("{at}: ")) && e.contains(needle)),
        "expected {needle:?} at {at}, got {errs:#?}"
    );
}

#[test]
fn published_listings_are_accepted() {
    for (name, levels, rules) in [
        ("intro.rul", 4, 8),
        ("example.rul", 4, 5),
        ("experiment1.rul", 2, 1),
        ("experiment2.rul", 2, 1),
        ("experiment3.rul", 2, 1),
    ] {
        let p = check(&listing(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(p.levels.len(), levels, "{name}");
        assert_eq!(p.rules.len(), rules, "{name}");
    }
}

#[test]
fn listings_pass_against_the_scripts_directory() {
    for name in ["example.rul", "experiment1.rul", "experiment2.rul", "experiment3.rul"] {
        let opts = CompileOptions::new(name).with_base_dir(rules_dir()).with_scripts(rules_dir().join("scripts"));
        compile(&listing(name), &opts).unwrap_or_else(|e| panic!("{e}"));
    }
}

#[test]
fn int_plus_float() {
    assert_error("  n int = 0;", "rules Graph:\n  true ?\n    set(n, n + 1.5);\n", "11:14", "float");
}

#[test]
fn string_compared_to_int() {
    assert_error("", "rules Graph:\n  \"a\" < K ?\n    alert(\"x\");\n", "10:7", "string");
}

#[test]
fn msg_builtin_in_graph_section() {
    assert_error("", "rules Graph:\n  topicin(\"/x\") ?\n    alert(\"x\");\n", "10:3", "topicin");
}

#[test]
fn external_builtin_in_msg_section() {
    assert_error("", "rules Msg:\n  signal(\"SIGUSR1\") ?\n    alert(\"x\");\n", "10:3", "signal");
}

#[test]
fn unused_variables() {
    assert_error("  idle int = 0;", "rules Graph:\n  true ?\n    alert(\"x\");\n", "8:3", "idle");
    assert_error("  wo int = 0;", "rules Graph:\n  true ?\n    set(wo, 1);\n", "8:3", "never read");
    assert_error("  ro int = 0;", "rules Graph:\n  ro > 0 ?\n    alert(\"x\");\n", "8:3", "ro");
}

#[test]
fn writes_to_read_only_names() {
    assert_error("", "rules Graph:\n  true ?\n    set(CurrLevel, 1);\n", "11:9", "CurrLevel");
    assert_error("", "rules Graph:\n  true ?\n    set(K, 4);\n", "11:9", "K");
    assert_error("", "rules Graph:\n  true ?\n    set(Uptime, 4);\n", "11:9", "Uptime");
}

#[test]
fn non_constant_resource_arguments() {
    assert_error(
        "  re string = \"/a.*\";",
        "rules Msg:\n  topicmatches(re) ?\n    set(re, \"/b\");\n",
        "10:16",
        "constant",
    );
    assert_error(
        "  p string = \"x.yar\";",
        "rules Msg:\n  payload(p) ?\n    set(p, \"y\");\n",
        "10:11",
        "constant",
    );
}

#[test]
fn constant_resource_arguments_are_validated() {
    assert_error("", "rules Msg:\n  topicmatches(\"(\") ?\n    alert(\"x\");\n", "10:16", "regular expression");
    assert_error("", "rules Msg:\n  payload(\"missing.yar\") ?\n    alert(\"x\");\n", "10:11", "missing.yar");
    assert_error("", "rules Msg:\n  plugin(\"/nonexistent/plugin\") ?\n    alert(\"x\");\n", "10:10", "plugin");
    assert_error("", "rules External:\n  signal(\"SIGHUP\") ?\n    alert(\"x\");\n", "10:10", "SIGHUP");
}

#[test]
fn regex_through_a_constant_is_accepted() {
    let src = "levels:\n  L;\nconsts:\n  RE string = \"/pose.*\";\nvars:\nrules Msg:\n  topicmatches(RE) ?\n    alert(\"x\");\n";
    check(src).unwrap();
}

#[test]
fn missing_transition_script() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["LOW.to", "LOW.from", "HIGH.from"] {
        let p = dir.path().join(name);
        std::fs::write(&p, "#!/bin/sh\n").unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    let src = "levels:\n  LOW;\n  HIGH;\nconsts:\nvars:\n";
    let err = compile(src, &CompileOptions::new("t.rul").with_scripts(dir.path())).unwrap_err();
    assert_eq!(err.diagnostics.len(), 1, "{err}");
    assert_eq!(err.diagnostics[0].pos.line, 3);
    assert!(err.diagnostics[0].message.contains("HIGH.to"), "{err}");
}

#[test]
fn undeclared_names_and_arity() {
    assert_error("", "rules Graph:\n  true ?\n    set(ghost, 1);\n", "11:9", "ghost");
    assert_error("", "rules Graph:\n  nodecount(1) ?\n    alert(\"x\");\n", "10:3", "nodecount");
    assert_error("", "rules Graph:\n  true ?\n    launch(\"x\");\n", "11:5", "launch");
}

#[test]
fn trigger_needs_a_level() {
    assert_error("", "rules Graph:\n  true ?\n    trigger(K);\n", "11:13", "level");
    assert_error("", "rules Graph:\n  true ?\n    trigger(1);\n", "11:13", "level");
}

#[test]
fn trigger_must_be_boolean() {
    assert_error("", "rules Graph:\n  K + 1 ?\n    alert(\"x\");\n", "10:5", "bool");
}

#[test]
fn set_keeps_the_variable_type() {
    assert_error("  s string = \"\";", "rules Graph:\n  s == \"\" ?\n    set(s, 3);\n", "11:12", "int");
}

#[test]
fn constant_division_by_zero() {
    let err = check("levels:\n  L;\nconsts:\n  Z int = 4 / 0;\nvars:\n").unwrap_err();
    assert!(err.to_string().contains("division by zero"), "{err}");
    assert_eq!(err.diagnostics[0].pos.line, 4);
}

#[test]
fn syntax_errors_are_positioned() {
    let err = check("levels:\n  L;\nconsts:\nvars:\nrules Graph:\n  true ?\n    alert(\"x\")\n").unwrap_err();
    assert_eq!(err.diagnostics.len(), 1);
    assert!(err.to_string().starts_with("t.rul:"), "{err}");
}

#[test]
fn every_error_is_reported_not_just_the_first() {
    let errs = errors(
        "  a int = 0;",
        "rules Graph:\n  topicin(\"/x\") ?\n    set(a, 1.0), set(CurrLevel, 2);\n",
    );
    assert!(errs.len() >= 3, "{errs:#?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Same source, same diagnostics, in the same order.
    #[test]
    fn checker_is_deterministic(seed in any::<u64>(), cut in 0usize..400, junk in "[a-z(){};+*=!<>\" ]{0,6}") {
        let opts = ProgramOptions {
            pattern_file: Some("yaraexp3.yar".into()),
            plugin: Some("/bin/true".into()),
            ..ProgramOptions::default()
        };
        let mut src = random_program(&mut seeded(seed), &opts);
        let at = src.char_indices().map(|(i, _)| i).nth(cut % src.chars().count().max(1)).unwrap_or(0);
        src.insert_str(at, &junk);
        let a = check(&src).err();
        let b = check(&src).err();
        prop_assert_eq!(a, b);
    }
}
