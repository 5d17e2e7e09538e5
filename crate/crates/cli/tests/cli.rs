//! The `rips` command line: exit statuses, subcommands and the classic
//! argument forms, including hash-bang execution of a rules file.

use std::io::{Read, Write};
use std::os::unix::fs::PermissionsExt;
use std::os::unix::net::UnixStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output};
use std::time::{Duration, Instant};

use rips_core::wire::{decode_outcome, encode_event, FrameSplitter};
use rips_core::{GraphContext, InboundEvent, Node, OutcomeKind, Topic};

const RIPS: &str = env!("CARGO_BIN_EXE_rips");

fn rules(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../rules").join(name)
}

fn rips(args: &[&str]) -> Output {
    Command::new(RIPS)
        .args(args)
        .env_remove("RIPSWHITELIST")
        .env_remove("RIPSBLACKLIST")
        .env_remove("RIPSPOLLING")
        .output()
        .expect("rips runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_accepts_experiment_listing_with_scripts() {
    let o = rips(&["check", path(&rules("experiment1.rul")), path(&rules("scripts"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 levels, 2 consts, 0 vars, 1 rules"));
}

#[test]
fn check_names_undeclared_identifier() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rul");
    std::fs::write(&bad, "levels:\n  __DEFAULT__;\nconsts:\nvars:\nrules Graph:\n  true ?\n    set(ghost, 1);\n").unwrap();
    let o = rips(&["check", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("ghost"), "{err}");
    assert!(err.contains("bad.rul:7:"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rips(&["check"]).status.code(), Some(2));
    assert_eq!(rips(&["simulate", "a.rul", "b.yaml", "--polling", "-1"]).status.code(), Some(2));
    assert_eq!(rips(&["bench", "a.rul", "c.yaml", "--rounds", "0"]).status.code(), Some(2));
}

#[test]
fn missing_rules_file_is_an_io_error() {
    assert_eq!(rips(&["check", "/nonexistent/rules.rul"]).status.code(), Some(4));
}

#[test]
fn missing_scripts_are_static_errors() {
    let empty = tempfile::tempdir().unwrap();
    let o = rips(&["check", path(&rules("experiment1.rul")), path(empty.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("__DEFAULT__.to"), "{}", stderr(&o));
}

#[test]
fn compile_emits_program_with_manifest() {
    let o = rips(&["compile", path(&rules("experiment3.rul")), "-c", path(&rules("scripts"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let src = stdout(&o);
    assert!(src.starts_with("// Rules engine generated by rips"));
    assert!(src.contains("// generated-at: "));
    assert!(src.contains("fn main()"));
    assert!(src.contains("yaraexp3.yar"));
}

#[test]
fn classic_compile_form_matches_subcommand() {
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("// generated-at:")).collect::<Vec<_>>().join("\n");
    let a = rips(&[path(&rules("example.rul")), "-c", path(&rules("scripts"))]);
    let b = rips(&["compile", path(&rules("example.rul")), "-c", path(&rules("scripts"))]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn module_output_has_no_main() {
    let o = rips(&[
        "compile",
        path(&rules("intro.rul")),
        "-c",
        path(&rules("scripts")),
        "--module",
        "--crate-path",
        "crate",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let src = stdout(&o);
    assert!(!src.contains("fn main()"));
    assert!(src.contains("use crate::support::*;"));
}

#[test]
fn simulate_reports_experiment_one() {
    let o = rips(&[
        "simulate",
        path(&rules("experiment1.rul")),
        path(&rules("scenarios/exp1-attack.yaml")),
        "--dry-run",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("level COMPROMISED (ordinal 1"), "{out}");
    assert!(out.contains("result: PASS"));
}

#[test]
fn simulate_failure_has_its_own_status() {
    let o = rips(&[
        "simulate",
        path(&rules("experiment3.rul")),
        path(&rules("scenarios/exp3-camera.yaml")),
        "--dry-run",
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("result: FAIL"));
}

#[test]
fn simulate_honours_environment_filters_and_polling() {
    let o = Command::new(RIPS)
        .args([
            "simulate",
            path(&rules("experiment3.rul")),
            path(&rules("scenarios/exp3-camera.yaml")),
            "--dry-run",
        ])
        .env("RIPSWHITELIST", "/commands")
        .env("RIPSPOLLING", "0.25")
        .env_remove("RIPSBLACKLIST")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("polling: 0.25s"));
}

#[test]
fn subscribe_minimal_keeps_topics_of_unconstrained_rules() {
    let o = rips(&[
        "simulate",
        path(&rules("experiment3.rul")),
        path(&rules("scenarios/exp3-camera.yaml")),
        "--dry-run",
        "--subscribe-minimal",
    ]);
    // The payload rule names no topic, so every topic stays subscribed.
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn simulate_generated_engine_agrees() {
    let run = |engine: &str| {
        let o = rips(&[
            "simulate",
            path(&rules("experiment2.rul")),
            path(&rules("scenarios/exp2-attack.yaml")),
            "--dry-run",
            "--engine",
            engine,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(run("interpreted"), run("generated"));
}

#[test]
fn bench_reports_both_engines() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.yaml");
    let o = rips(&["gen-corpus", "--events", "300", "-o", path(&corpus)]);
    assert_eq!(o.status.code(), Some(0));
    let o = rips(&["bench", path(&rules("example.rul")), path(&corpus), "--rounds", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("events: 300\n"), "{out}");
    assert!(out.contains("interpreted:") && out.contains("generated:"));
    assert!(out.contains("speedup (rules): "));
}

#[test]
fn bench_of_empty_corpus_has_no_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.yaml");
    std::fs::write(&corpus, "").unwrap();
    let o = rips(&["bench", path(&rules("example.rul")), path(&corpus), "--rounds", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("speedup (rules): n/a"));
}

#[test]
fn bench_without_generated_program_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let rules_file = dir.path().join("other.rul");
    std::fs::write(&rules_file, "levels:\n  __DEFAULT__;\nconsts:\nvars:\n").unwrap();
    let corpus = dir.path().join("c.yaml");
    std::fs::write(&corpus, "").unwrap();
    let o = rips(&["bench", path(&rules_file), path(&corpus)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--generated"));
}

fn wait_for_socket(sock: &Path, child: &mut Child) -> UnixStream {
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        if let Ok(s) = UnixStream::connect(sock) {
            return s;
        }
        if let Some(status) = child.try_wait().unwrap() {
            panic!("engine exited early with {status}");
        }
        assert!(Instant::now() < deadline, "socket never appeared");
        std::thread::sleep(Duration::from_millis(20));
    }
}

/// Stop the engine the way an init system would.
fn terminate(child: &mut Child) -> i32 {
    let sent = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(sent.success());
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        if let Some(status) = child.try_wait().unwrap() {
            return status.code().unwrap_or(-1);
        }
        if Instant::now() > deadline {
            child.kill().unwrap();
            panic!("engine ignored SIGTERM");
        }
        std::thread::sleep(Duration::from_millis(20));
    }
}

fn crowded_camera() -> InboundEvent {
    InboundEvent::graph(GraphContext {
        nodes: vec![Node::new("camera")],
        topics: vec![Topic::new("/coresense/image_raw")
            .with_publishers(["camera"])
            .with_subscribers(["a", "b", "c", "d", "intruder"])],
    })
}

/// Send one event and collect outcome documents until `want` arrives.
fn exchange(stream: &mut UnixStream, ev: &InboundEvent, want: usize) -> Vec<OutcomeKind> {
    stream.write_all(encode_event(ev).as_bytes()).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
    let mut split = FrameSplitter::new();
    let mut got = Vec::new();
    let mut buf = [0u8; 4096];
    while got.len() < want {
        let n = stream.read(&mut buf).expect("outcome before timeout");
        assert!(n > 0, "engine closed the socket");
        for doc in split.push(&buf[..n]) {
            got.push(decode_outcome(&doc.unwrap()).unwrap().kind);
        }
    }
    got
}

#[test]
fn classic_run_form_serves_the_socket() {
    let dir = tempfile::tempdir().unwrap();
    let sock = dir.path().join("sock.777");
    let mut child = Command::new(RIPS)
        .args([
            "-s",
            path(&sock),
            "--exec-timeout-ms",
            "100",
            path(&rules("scripts")),
            path(&rules("experiment1.rul")),
        ])
        .spawn()
        .unwrap();
    let mut stream = wait_for_socket(&sock, &mut child);
    let got = exchange(&mut stream, &crowded_camera(), 2);
    assert!(matches!(&got[0], OutcomeKind::LevelChange { level, .. } if level == "COMPROMISED"), "{got:?}");
    assert!(matches!(&got[1], OutcomeKind::Alert { text } if text.starts_with("too many subscribers")), "{got:?}");
    drop(stream);
    // The engine keeps its state for the next monitor: already
    // COMPROMISED, the same graph fires nothing, while the next outcome
    // proves the new connection is served.
    let mut again = wait_for_socket(&sock, &mut child);
    again.write_all(encode_event(&crowded_camera()).as_bytes()).unwrap();
    let quiet = Topic::new("/coresense/image_raw").with_subscribers(["a"]);
    let calm = InboundEvent::graph(GraphContext { nodes: Vec::new(), topics: vec![quiet] });
    again.write_all(encode_event(&calm).as_bytes()).unwrap();
    again.set_read_timeout(Some(Duration::from_millis(500))).unwrap();
    let mut buf = [0u8; 256];
    assert!(again.read(&mut buf).is_err(), "no outcome expected after reconnecting");
    assert_eq!(terminate(&mut child), 0);
}

#[test]
fn hash_bang_rules_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sock = dir.path().join("hb.sock");
    let script = dir.path().join("exp1.rul");
    let body = std::fs::read_to_string(rules("experiment1.rul")).unwrap();
    std::fs::write(&script, format!("#!{RIPS} -s {} --no-scripts --exec-timeout-ms 100\n{body}", path(&sock))).unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
    let mut child = Command::new(&script).spawn().unwrap();
    let mut stream = wait_for_socket(&sock, &mut child);
    let got = exchange(&mut stream, &crowded_camera(), 2);
    assert!(matches!(&got[0], OutcomeKind::LevelChange { level, .. } if level == "COMPROMISED"), "{got:?}");
    drop(stream);
    assert_eq!(terminate(&mut child), 0);
}

#[test]
fn crash_action_exits_3_and_dumps_vars() {
    let dir = tempfile::tempdir().unwrap();
    let sock = dir.path().join("crash.sock");
    let file = dir.path().join("crash.rul");
    std::fs::write(
        &file,
        "levels:\n  __DEFAULT__;\nconsts:\nvars:\n  seen int = 0;\nrules Graph:\n  seen >= 0 ?\n    set(seen, seen + 1), crash(\"stop here\");\n",
    )
    .unwrap();
    let mut child = Command::new(RIPS)
        .args(["run", "--no-scripts", "--dump-vars", "-s", path(&sock), path(&file)])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut stream = wait_for_socket(&sock, &mut child);
    let got = exchange(&mut stream, &crowded_camera(), 1);
    assert!(matches!(&got[0], OutcomeKind::Alert { text } if text == "stop here"), "{got:?}");
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("seen = 1"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("crash: stop here"));
}
