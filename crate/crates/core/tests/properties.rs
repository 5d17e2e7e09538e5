//! Invariants checked over generated programs, graphs and event streams.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use common::{checked, listing, rules_dir};
use proptest::prelude::*;
use proptest::sample::subsequence;
use rips_core::gen::vocab::{NODES, TOPICS};
use rips_core::gen::{random_graph, random_program, random_steps, seeded, CorpusOptions, ProgramOptions, Step};
use rips_core::predicates::{graph as gp, EventCtx};
use rips_core::runtime::{DryRunner, LevelSpec, ManualClock, RecordingRunner, RuntimeConfig, SignalCounters};
use rips_core::syntax::ast::SectionKind;
use rips_core::sim::{run_steps, simulate, Scenario, SimOptions, SIM_EPOCH_NS};
use rips_core::transpile::{transpile_program, TranspileOptions};
use rips_core::wire::{decode_event, encode_event, EventKind};
use rips_core::{parse_source, GraphContext, InboundEvent, Interpreter, RuleEngine, Runtime, Value};

fn program_options() -> ProgramOptions {
    ProgramOptions {
        pattern_file: Some("yaraexp3.yar".into()),
        plugin: Some("/bin/true".into()),
        ..ProgramOptions::default()
    }
}

fn runtime(levels: Vec<LevelSpec>) -> Runtime {
    let mut rt = Runtime::new(
        levels,
        RuntimeConfig::default(),
        Arc::new(ManualClock::new(SIM_EPOCH_NS)),
        Arc::new(RecordingRunner::new()),
        Arc::new(SignalCounters::new()),
    );
    rt.start();
    rt
}

fn distinct<'a>(it: impl Iterator<Item = &'a str>) -> usize {
    it.collect::<BTreeSet<_>>().len()
}

fn scenario(name: &str) -> Scenario {
    Scenario::load(&rules_dir().join("scenarios").join(name)).unwrap()
}

fn sim_options(polling: Option<f64>, detect_at_poll: bool) -> SimOptions {
    SimOptions {
        polling,
        detect_at_poll,
        tick: Duration::from_millis(10),
        runner: Arc::new(DryRunner),
        ..SimOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Printing a parsed program and parsing it again gives the same tree.
    #[test]
    fn printer_round_trips(seed in any::<u64>()) {
        let src = random_program(&mut seeded(seed), &program_options());
        let first = parse_source(&src, "t.rul").unwrap();
        let printed = first.to_string();
        let second = parse_source(&printed, "t.rul").unwrap_or_else(|e| panic!("{e}\n{printed}"));
        prop_assert_eq!(first.without_positions(), second.without_positions());
    }

    /// Accepted programs never hit a runtime type mismatch.
    #[test]
    fn checked_programs_do_not_go_wrong(seed in any::<u64>()) {
        let prog = Arc::new(checked(&random_program(&mut seeded(seed), &program_options())));
        let plant = CorpusOptions { plant: Some(b"\x90\x90\x90\x90".to_vec()) };
        let steps = random_steps(&mut seeded(seed ^ 0x5eed), 60, &plant);
        let t = run_steps(&mut Interpreter::new(Arc::clone(&prog)), prog.levels.clone(), &steps);
        prop_assert!(t.outcomes.iter().all(|o| !o.contains("type mismatch")), "{:#?}", t.outcomes);

        let interp = Interpreter::new(Arc::clone(&prog));
        let rt = runtime(prog.levels.clone());
        for step in &steps {
            let Step::Event(ev) = step else { continue };
            for rule in &prog.rules {
                let ctx = match (&ev.kind, rule.kind) {
                    (EventKind::Graph(g), SectionKind::Graph) => EventCtx::Graph(g),
                    (EventKind::Message(m), SectionKind::Msg) => EventCtx::Msg(m),
                    _ => continue,
                };
                match interp.eval(&rule.trigger, &rt, ctx) {
                    Ok(Value::Bool(_)) => {}
                    Err(f) => prop_assert_eq!(f.to_string(), "division by zero"),
                    Ok(v) => prop_assert!(false, "{} evaluated to {v:?}", rule.id),
                }
            }
        }
    }

    /// Evaluating a condition changes neither variables, outcomes nor level.
    #[test]
    fn conditions_are_pure(seed in any::<u64>()) {
        let prog = Arc::new(checked(&random_program(&mut seeded(seed), &program_options())));
        let steps = random_steps(&mut seeded(seed.rotate_left(7)), 40, &CorpusOptions::default());
        let mut interp = Interpreter::new(Arc::clone(&prog));
        let mut rt = runtime(prog.levels.clone());
        for step in &steps {
            let Step::Event(ev) = step else { continue };
            // Debug text, since NaN is unequal to itself.
            let vars = format!("{:?}", interp.vars());
            let pending = rt.pending_outcomes().to_vec();
            let level = rt.levels().current();
            for rule in &prog.rules {
                let ctx = match (&ev.kind, rule.kind) {
                    (EventKind::Graph(g), SectionKind::Graph) => EventCtx::Graph(g),
                    (EventKind::Message(m), SectionKind::Msg) => EventCtx::Msg(m),
                    _ => continue,
                };
                let _ = interp.eval(&rule.trigger, &rt, ctx);
            }
            prop_assert_eq!(format!("{:?}", interp.vars()), vars);
            prop_assert_eq!(rt.pending_outcomes(), &pending[..]);
            prop_assert_eq!(rt.levels().current(), level);
            // Let the state move on so later steps see varied variables.
            let _ = match &ev.kind {
                EventKind::Graph(g) => interp.on_graph(&mut rt, g),
                EventKind::Message(m) => interp.on_message(&mut rt, m),
            };
            rt.take_outcomes();
        }
    }

    /// The level only rises, or steps down by one from a soft level.
    #[test]
    fn level_machine_is_safe(
        soft in prop::collection::vec(any::<bool>(), 1..7),
        targets in prop::collection::vec(-2i64..9, 0..60),
    ) {
        let levels: Vec<_> = soft.iter().enumerate().map(|(i, s)| LevelSpec::new(format!("L{i}"), *s)).collect();
        let mut rt = runtime(levels.clone());
        for t in targets {
            let from = rt.levels().current();
            let ok = rt.trigger(t);
            let to = rt.levels().current();
            let legal = usize::try_from(t).ok().filter(|&t| t < levels.len()).is_some_and(|t| {
                t >= from || (levels[from].soft && t + 1 == from)
            });
            prop_assert_eq!(ok, legal, "{} -> {}", from, t);
            prop_assert_eq!(to, if legal { t as usize } else { from });
            let changes = rt.take_outcomes();
            prop_assert_eq!(changes.len(), usize::from(to != from));
        }
    }

    /// Exact-set and membership predicates agree with each other and with
    /// the counting predicates.
    #[test]
    fn graph_predicates_are_consistent(
        seed in any::<u64>(),
        pick in subsequence(NODES.to_vec(), 0..=NODES.len()),
        topic in prop::sample::select(TOPICS.to_vec()),
    ) {
        let g = random_graph(&mut seeded(seed));
        let names: Vec<&str> = g.nodes.iter().map(|n| n.name.as_str()).collect();
        prop_assert!(gp::nodes(&g, &names));
        prop_assert!(gp::nodesinclude(&g, &names));
        let n = distinct(names.iter().copied()) as i64;
        prop_assert!(gp::nodecount(&g, n, n));
        prop_assert!(!gp::nodecount(&g, n + 1, n + 1));
        if gp::nodes(&g, &pick) {
            prop_assert!(gp::nodesinclude(&g, &pick));
        }

        let subs: Vec<&str> = g.topic(topic).map(|t| t.subscribers.iter().map(String::as_str).collect()).unwrap_or_default();
        prop_assert!(gp::topicsubscribers(&g, topic, &subs));
        let k = distinct(subs.iter().copied()) as i64;
        prop_assert!(gp::topicsubscribercount(&g, topic, k, k));
        if gp::topicsubscribers(&g, topic, &pick) {
            prop_assert!(gp::topicsubscribersinclude(&g, topic, &pick));
        }
        if gp::topicsubscribersinclude(&g, topic, &pick) {
            for i in 0..pick.len() {
                let mut fewer = pick.clone();
                fewer.remove(i);
                prop_assert!(gp::topicsubscribersinclude(&g, topic, &fewer));
            }
        }
        let in_topic = pick.iter().all(|p| subs.contains(p));
        prop_assert_eq!(gp::topicsubscribersinclude(&g, topic, &pick), in_topic);
    }

    /// Generated graphs survive the wire unchanged.
    #[test]
    fn graph_events_round_trip(seed in any::<u64>()) {
        let g = random_graph(&mut seeded(seed));
        let ev = InboundEvent {
            current_level: Some("LOW".into()),
            current_grav: Some(0.0),
            last_alert: None,
            kind: EventKind::Graph(g),
        };
        let back = decode_event(&encode_event(&ev)).unwrap();
        prop_assert_eq!(back, ev);
    }
}

#[test]
fn graph_event_listing_re_encodes_to_the_same_event() {
    let ev = decode_event(&listing("graph-event.yaml")).unwrap();
    let EventKind::Graph(g) = &ev.kind else { panic!("not a graph event") };
    assert_ne!(g, &GraphContext::default());
    assert_eq!(decode_event(&encode_event(&ev)).unwrap(), ev);
}

#[test]
fn transpiling_is_deterministic_apart_from_the_timestamp() {
    for name in ["intro.rul", "example.rul", "experiment1.rul", "experiment2.rul", "experiment3.rul"] {
        let prog = checked(&listing(name));
        let at = |t: &str| TranspileOptions {
            generated_at: Some(t.to_string()),
            ..TranspileOptions::default()
        };
        let a = transpile_program(&prog, &at("2024-01-01T00:00:00Z")).source;
        let b = transpile_program(&prog, &at("2024-01-01T00:00:00Z")).source;
        assert_eq!(a, b, "{name}");
        let c = transpile_program(&prog, &at("2025-06-30T12:00:00Z")).source;
        let differing: Vec<_> = a.lines().zip(c.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(differing.len(), 1, "{name}: {differing:#?}");
        assert!(differing[0].0.contains("generated-at"), "{name}");
    }
}

#[test]
fn scenarios_are_deterministic() {
    for (rules, scn) in [
        ("experiment1.rul", "exp1-attack.yaml"),
        ("experiment2.rul", "exp2-attack.yaml"),
        ("experiment3.rul", "exp3-attack.yaml"),
    ] {
        let prog = Arc::new(checked(&listing(rules)));
        let scn = scenario(scn);
        let run = || {
            simulate(Interpreter::new(Arc::clone(&prog)), prog.levels.clone(), &scn, &sim_options(None, false)).unwrap()
        };
        let first = run();
        assert!(first.passed(), "{}", first.render());
        assert_eq!(first, run(), "{rules}");
    }
}

#[test]
fn detection_latency_is_within_two_polling_periods() {
    for (rules, scn) in [("experiment1.rul", "exp1-attack.yaml"), ("experiment2.rul", "exp2-attack.yaml")] {
        let prog = Arc::new(checked(&listing(rules)));
        let scn = scenario(scn);
        for polling in [0.05, 0.1, 0.25, 0.5, 1.0] {
            let report = simulate(
                Interpreter::new(Arc::clone(&prog)),
                prog.levels.clone(),
                &scn,
                &sim_options(Some(polling), true),
            )
            .unwrap();
            assert!(report.passed(), "{}", report.render());
            for e in &report.expectations {
                let latency = e.latency.expect("latency measured");
                assert!(latency <= 2.0 * polling + 1e-9, "{rules} at {polling}s: {latency}s");
            }
        }
    }
}
