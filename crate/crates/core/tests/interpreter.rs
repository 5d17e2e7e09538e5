//! Interpreter behaviour on the published listings and on targeted
//! programs: action chains, levels, signals, faults, crashes and the
//! predefined registers.

mod common;

use std::os::unix::fs::PermissionsExt;

use common::{brief, graph_with_nodes, listing, message, Harness};
use proptest::prelude::*;
use rips_core::predicates::IdsConfig;
use rips_core::runtime::process::{InvocationKind, RunOutcome};
use rips_core::runtime::{RecordingRunner, RuntimeConfig, Sig, Stop};
use rips_core::{GraphContext, Node, RuleEngine, Topic};

const CONNECTORS: [&str; 3] = ["=>", "!>", ","];

/// Actions a chain runs, by the connector rule: `,` always continues,
/// `=>` continues after success and `!>` after failure.
fn chain_oracle(connectors: &[usize], results: &[bool]) -> usize {
    let mut ran = 1;
    for (k, &c) in connectors.iter().enumerate() {
        let go = match c {
            0 => results[k],
            1 => !results[k],
            _ => true,
        };
        if !go {
            break;
        }
        ran += 1;
    }
    ran
}

#[test]
fn chain_connectors_exhaustive_up_to_five_actions() {
    let mut cases = 0;
    for len in 1..=5usize {
        for code in 0..3usize.pow(len as u32 - 1) {
            let connectors: Vec<usize> = (0..len - 1).map(|k| code / 3usize.pow(k as u32) % 3).collect();
            let mut chain = String::from("exec(\"/p0\")");
            for (k, &c) in connectors.iter().enumerate() {
                chain.push_str(&format!(" {} exec(\"/p{}\")", CONNECTORS[c], k + 1));
            }
            let src = format!("levels:\n  L;\nconsts:\nvars:\nrules Graph:\n  true ?\n    {chain};\n");
            for mask in 0..(1u32 << len) {
                let results: Vec<bool> = (0..len).map(|k| mask & (1 << k) != 0).collect();
                let mut runner = RecordingRunner::new();
                for (k, ok) in results.iter().enumerate() {
                    runner = runner.with_result(format!("/p{k}"), RunOutcome::Exited(if *ok { 0 } else { 1 }));
                }
                let mut h = Harness::with(&src, runner, RuntimeConfig::default());
                assert!(h.graph(&GraphContext::default()).is_empty());
                let ran: Vec<String> = h.runner.invocations().into_iter().map(|i| i.program).collect();
                let want: Vec<String> = (0..chain_oracle(&connectors, &results)).map(|k| format!("/p{k}")).collect();
                assert_eq!(ran, want, "chain {chain} with results {results:?}");
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 2 + 3 * 4 + 9 * 8 + 27 * 16 + 81 * 32);
}

#[test]
fn unicode_connectors_behave_like_ascii() {
    let run = |src: &str| {
        let runner = RecordingRunner::new().with_result("/a", RunOutcome::Exited(1));
        let mut h = Harness::with(src, runner, RuntimeConfig::default());
        h.graph(&GraphContext::default());
        h.runner.invocations().into_iter().map(|i| i.program).collect::<Vec<_>>()
    };
    let head = "levels:\n  L;\nconsts:\nvars:\nrules Graph:\n  true ?\n";
    let ascii = run(&format!("{head}    exec(\"/a\") !> exec(\"/b\") => exec(\"/c\");\n"));
    let unicode = run(&format!("{head}    exec(\"/a\") \u{219B} exec(\"/b\") \u{2192} exec(\"/c\");\n"));
    assert_eq!(ascii, ["/a", "/b", "/c"]);
    assert_eq!(ascii, unicode);
}

#[test]
fn intro_listing_escalates_after_six_returns() {
    let mut h = Harness::new(&listing("intro.rul"));
    for round in 1..=6 {
        let up = brief(&h.graph(&graph_with_nodes(6)));
        assert_eq!(
            up,
            [
                "alert:detected more than 4 nodes: too many nodes, entering level ALERT",
                "level:ALERT"
            ],
            "round {round}"
        );
        let down = brief(&h.graph(&graph_with_nodes(3)));
        let mut want = vec!["alert:returning to default mode".to_string(), "level:__DEFAULT__".to_string()];
        if round == 6 {
            want.push("alert:too many transitions to alert".to_string());
            want.push("level:COMPROMISED".to_string());
        }
        assert_eq!(down, want, "round {round}");
        assert_eq!(h.var("descalated"), round.to_string());
    }
    let execs: Vec<_> = h
        .runner
        .invocations()
        .into_iter()
        .filter(|i| i.kind == InvocationKind::Exec)
        .collect();
    assert_eq!(execs.len(), 1);
    assert_eq!(execs[0].program, "/usr/bin/spd-say");
    assert_eq!(execs[0].args, ["too many transitions to alert"]);
    // COMPROMISED is not soft: nothing brings the engine back down.
    assert!(h.graph(&graph_with_nodes(3)).is_empty());
    assert_eq!(h.level(), "COMPROMISED");
}

#[test]
fn intro_listing_flags_unauthorized_corridor_publisher() {
    let mut h = Harness::new(&listing("intro.rul"));
    let mut m = message("/videocorridor", b"frame");
    m.graph.topics[0].publishers = vec!["corridorcamera".into(), "intruder".into()];
    let out = brief(&h.message(&m));
    assert_eq!(out, ["alert:unauthorized publisher in corridorcamera", "level:HALT"]);
    // Exact-set match: only corridorcamera is quiet.
    let mut h = Harness::new(&listing("intro.rul"));
    m.graph.topics[0].publishers = vec!["corridorcamera".into()];
    assert!(h.message(&m).is_empty());
}

#[test]
fn example_listing_counts_graphs_and_steps_down_from_soft_level() {
    let mut h = Harness::new(&listing("example.rul"));
    assert_eq!(h.level(), "A");
    for _ in 0..10 {
        assert!(h.graph(&GraphContext::default()).is_empty());
    }
    assert_eq!(
        brief(&h.graph(&GraphContext::default())),
        ["alert:too many graphs after bad topic rule:", "level:C"]
    );
    // "zzz" > "fff" holds for every message; C is soft so B is reachable.
    let out = brief(&h.message(&message("/other", b"")));
    assert_eq!(out, ["level:B"]);
    for _ in 0..2 {
        assert!(h.message(&message("/other", b"")).is_empty());
    }
    assert_eq!(h.var("nmsg"), "3");
    // Fourth message on a /pose topic: nmsg > 3 and the regex matches.
    let out = brief(&h.message(&message("/pose/left", b"")));
    assert_eq!(out, ["alert:topic matches"]);
    assert_eq!(h.var("lastrule"), "\"t.rul:Msg:1\"");
    let out = brief(&h.graph(&GraphContext::default()));
    assert_eq!(out, ["alert:too many graphs after bad topic rule:t.rul:Msg:1", "level:C"]);
    assert_eq!(h.var("ngraphs"), "12");
}

#[test]
fn experiment_three_halts_on_shellcode_only() {
    let shellcode = b"\x31\xc0\x50\x68\x2f\x2f\x73\x68\x68\x2f\x62\x69\x6e\x89\xe3\x50\x53\x89\xe1\xb0\x0b\xcd\x80";
    let mut h = Harness::new(&listing("experiment3.rul"));
    let mut payload = b"\x00\x11\x22".to_vec();
    payload.extend_from_slice(shellcode);
    let mut mutated = payload.clone();
    *mutated.last_mut().unwrap() ^= 1;
    assert!(h.message(&message("/commands", &mutated)).is_empty());
    let out = brief(&h.message(&message("/commands", &payload)));
    assert_eq!(out, ["level:HALT", "alert:malicious payload detected"]);
    let programs: Vec<String> = h.runner.invocations().into_iter().map(|i| i.program).collect();
    assert_eq!(programs, ["/usr/bin/spd-say", "/bin/sleep", "/usr/bin/audacious"]);
}

#[test]
fn graph_event_listing_does_not_trigger_experiment_one() {
    let doc = listing("graph-event.yaml");
    let ev = rips_core::wire::decode_event(&doc).unwrap();
    let rips_core::EventKind::Graph(g) = ev.kind else {
        panic!("graph event expected")
    };
    let mut h = Harness::new(&listing("experiment1.rul"));
    assert!(h.graph(&g).is_empty());
    let mut h = Harness::new(&listing("experiment2.rul"));
    assert!(h.graph(&g).is_empty());
}

#[test]
fn signal_rule_fires_once_per_pending_signal() {
    let src = "levels:\n  L;\nconsts:\nvars:\n  n int = 0;\nrules External:\n  signal(\"SIGUSR1\") ?\n    set(n, n + 1);\n";
    let mut h = Harness::new(src);
    h.signals.deliver(Sig::Usr1);
    h.signals.deliver(Sig::Usr1);
    h.signals.deliver(Sig::Usr2);
    for _ in 0..3 {
        h.tick();
    }
    assert_eq!(h.var("n"), "2");
    assert_eq!(h.signals.pending(Sig::Usr1), 0);
    assert_eq!(h.signals.pending(Sig::Usr2), 1);
}

#[test]
fn outcomes_follow_execution_order() {
    let src = "levels:\n  L0;\n  L1;\n  L2;\nconsts:\nvars:\nrules Graph:\n  true ?\n    alert(\"a\"), trigger(L1), alert(\"b\");\n  true ?\n    trigger(L2), alert(\"c\"), trigger(L0), alert(\"d\");\n";
    let mut h = Harness::new(src);
    assert_eq!(
        brief(&h.graph(&GraphContext::default())),
        ["alert:a", "level:L1", "alert:b", "level:L2", "alert:c", "alert:d"]
    );
}

#[test]
fn division_by_zero_skips_the_rule_with_an_alert() {
    let src = "levels:\n  L;\nconsts:\nvars:\n  d int = 0;\n  r int = 0;\nrules Graph:\n  10 / d > 1 ?\n    set(r, 1);\n  true ?\n    set(d, d + 0), set(r, r + 10);\n";
    let mut h = Harness::new(src);
    let out = brief(&h.graph(&GraphContext::default()));
    assert_eq!(out, ["alert:rule t.rul:Graph:0 skipped: division by zero"]);
    assert_eq!(h.var("r"), "10", "later rules still run");
}

#[test]
fn crash_flushes_queued_outcomes_and_stops() {
    let src = "levels:\n  L;\nconsts:\nvars:\n  n int = 0;\nrules Graph:\n  true ?\n    alert(\"before\"), crash(\"halt now\"), set(n, 1);\n  true ?\n    set(n, n + 2);\n";
    let mut h = Harness::new(src);
    let r = h.engine.on_graph(&mut h.rt, &GraphContext::default());
    assert_eq!(r, Err(Stop::Crash("halt now".into())));
    assert_eq!(brief(&h.rt.take_outcomes()), ["alert:before", "alert:halt now"]);
    assert_eq!(h.var("n"), "0");
}

#[test]
fn curr_rule_levelname_and_string() {
    let src = "levels:\n  LOW;\n  HIGH;\nconsts:\nvars:\n  s string = \"\";\nrules Graph:\n  s == \"\" ?\n    set(s, CurrRule + \"|\" + levelname(CurrLevel) + \"|\" + string(1.5) + \"|\" + string(HIGH)), trigger(HIGH);\n  true ?\n    alert(s + \"|\" + levelname(CurrLevel));\n";
    let mut h = Harness::new(src);
    let out = brief(&h.graph(&GraphContext::default()));
    assert_eq!(out, ["level:HIGH", "alert:t.rul:Graph:0|LOW|1.5|1|HIGH"]);
}

#[test]
fn exec_and_plugin_reach_the_runner() {
    let src = "levels:\n  L;\nconsts:\nvars:\nrules Msg:\n  plugin(\"/bin/true\") ?\n    exec(\"/bin/echo\", \"a b\", \"c\");\n";
    let runner = RecordingRunner::new().with_result("/bin/true", RunOutcome::Exited(0));
    let mut h = Harness::with(src, runner, RuntimeConfig::default());
    h.message(&message("/t", b"\x00payload"));
    let inv = h.runner.invocations();
    assert_eq!(inv.len(), 2);
    assert_eq!(inv[0].kind, InvocationKind::Plugin);
    assert_eq!(inv[0].stdin.as_deref(), Some(&b"\x00payload"[..]));
    assert_eq!(inv[1].kind, InvocationKind::Exec);
    assert_eq!(inv[1].args, ["a b", "c"]);
}

#[test]
fn plugin_exit_status_decides() {
    let dir = tempfile::tempdir().unwrap();
    let plugin = dir.path().join("magic");
    std::fs::write(&plugin, "#!/bin/sh\nhead -c 1 | grep -q M\n").unwrap();
    std::fs::set_permissions(&plugin, std::fs::Permissions::from_mode(0o755)).unwrap();
    let src = format!(
        "levels:\n  L;\nconsts:\nvars:\nrules Msg:\n  plugin(\"{}\") ?\n    alert(\"magic\");\n",
        plugin.display()
    );
    let runner = RecordingRunner::delegating(std::sync::Arc::new(rips_core::runtime::SystemRunner::quiet()));
    let mut h = Harness::with(&src, runner, RuntimeConfig::default());
    assert_eq!(brief(&h.message(&message("/t", b"Mxyz"))), ["alert:magic"]);
    assert!(h.message(&message("/t", b"xyzM")).is_empty());
}

#[test]
fn idsalert_scans_matching_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("snort/2026")).unwrap();
    std::fs::write(dir.path().join("snort/2026/alert.log"), "[**] ET SCAN nmap [**]\n").unwrap();
    std::fs::write(dir.path().join("snort/notes.txt"), "ET EXPLOIT\n").unwrap();
    let cfg = RuntimeConfig {
        ids: IdsConfig::parse(dir.path(), "alert*").unwrap(),
        ..RuntimeConfig::default()
    };
    let src = "levels:\n  L;\nconsts:\nvars:\nrules External:\n  idsalert(\"ET SCAN\") ?\n    alert(\"scan\");\n  idsalert(\"ET EXPLOIT\") ?\n    alert(\"exploit\");\n";
    let mut h = Harness::with(src, RecordingRunner::new(), cfg);
    assert_eq!(brief(&h.tick()), ["alert:scan"]);
}

#[test]
fn graph_rules_see_graph_predicates() {
    let src = "levels:\n  L;\nconsts:\nvars:\nrules Graph:\n  topicsubscribers(\"/cam\", \"a\", \"b\") && service(\"a\", \"/a/get\") && topicsinclude(\"/cam\", \"/x\") ?\n    alert(\"shape\");\n";
    let mut h = Harness::new(src);
    let mut a = Node::new("a");
    a.services.push(rips_core::Service {
        name: "/a/get".into(),
        params: Vec::new(),
    });
    let g = GraphContext {
        nodes: vec![a, Node::new("b")],
        topics: vec![Topic::new("/cam").with_subscribers(["b", "a"])],
    };
    assert_eq!(brief(&h.graph(&g)), ["alert:shape"]);
}

#[test]
fn transition_scripts_pair_from_then_to() {
    let src = "levels:\n  A;\n  B;\n  C soft;\n  D;\nconsts:\nvars:\n  step int = 0;\nrules Graph:\n  true ?\n    set(step, step + 1);\n  step == 1 ? trigger(C);\n  step == 2 ? trigger(B);\n  step == 3 ? trigger(A);\n  step == 4 ? trigger(D);\n";
    let dir = common::rules_dir().join("scripts");
    let names = ["A", "B", "C", "D"];
    let cfg = RuntimeConfig {
        scripts: Some(rips_core::semantics::ScriptTable::resolve(&dir, names)),
        ..RuntimeConfig::default()
    };
    let mut h = Harness::with(src, RecordingRunner::new(), cfg);
    for _ in 0..4 {
        h.graph(&GraphContext::default());
    }
    let ran: Vec<String> = h
        .runner
        .invocations()
        .into_iter()
        .map(|i| {
            let file = std::path::Path::new(&i.program).file_name().unwrap().to_string_lossy().into_owned();
            let env: Vec<String> = i.env.iter().map(|(_, v)| v.clone()).collect();
            format!("{file}[{}]", env.join(">"))
        })
        .collect();
    assert_eq!(
        ran,
        [
            "A.to[>A]",
            "A.from[A>C]",
            "C.to[A>C]",
            "C.from[C>B]",
            "B.to[C>B]",
            "B.from[B>D]",
            "D.to[B>D]"
        ]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Uptime never decreases and Time minus Uptime stays fixed.
    #[test]
    fn time_and_uptime_follow_the_clock(steps in proptest::collection::vec(0i64..5_000_000_000, 1..30)) {
        let src = "levels:\n  L;\nconsts:\nvars:\n  t int = 0;\n  u int = 0;\nrules External:\n  t <= Time && u <= Uptime ?\n    set(t, Time), set(u, Uptime);\n";
        let mut h = Harness::new(src);
        let mut last_u = -1i64;
        let mut offset = None;
        for s in steps {
            h.clock.advance(std::time::Duration::from_nanos(s as u64));
            h.tick();
            let t: i64 = h.var("t").parse().unwrap();
            let u: i64 = h.var("u").parse().unwrap();
            prop_assert!(u >= last_u);
            last_u = u;
            let d = t - u;
            prop_assert_eq!(*offset.get_or_insert(d), d);
        }
    }
}
