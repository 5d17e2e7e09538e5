//! Rule execution time of interpreted and generated engines, and the cost
//! of the YAML codec around them.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rips_bench::{fixture, DEFAULT_PROGRAM};
use rips_core::gen::{bench_events, random_events, seeded, CorpusOptions};
use rips_core::sim::bench::{bench_runtime, replay_events, write_corpus};
use rips_core::wire::{decode_event, encode_outcome};
use rips_core::{InboundEvent, Outcome, RuleEngine};

const EVENTS: usize = 1_000;

fn engines(c: &mut Criterion, group_name: &str, program: &str, events: &[InboundEvent]) {
    let p = fixture(program).expect("registered fixture");
    let mut group = c.benchmark_group(group_name);
    group.throughput(Throughput::Elements(events.len() as u64));
    group.bench_function("interpreted", |b| {
        b.iter_batched(
            || (p.interpreter().expect("fixture compiles"), bench_runtime((p.levels)())),
            |(mut e, mut rt)| replay_events(&mut e, &mut rt, events),
            BatchSize::LargeInput,
        )
    });
    group.bench_function("generated", |b| {
        b.iter_batched(
            || (p.generated(), bench_runtime((p.levels)())),
            |(mut e, mut rt)| replay_events(&mut e as &mut dyn RuleEngine, &mut rt, events),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn rules(c: &mut Criterion) {
    engines(c, "rules/default", DEFAULT_PROGRAM, &bench_events(EVENTS));
    let random = random_events(&mut seeded(9), EVENTS, &CorpusOptions::default());
    for name in ["intro", "experiment1", "experiment2"] {
        engines(c, &format!("rules/{name}"), name, &random);
    }
}

fn codec(c: &mut Criterion) {
    let events = bench_events(EVENTS);
    let text = write_corpus(&events);
    let docs = rips_core::sim::bench::split_corpus(text.as_bytes());
    let outcome = Outcome::alert("too many graphs after bad topic rule:example.rul:Msg:1", 1_700_000_000_000_000_000);
    let mut group = c.benchmark_group("codec");
    group.throughput(Throughput::Elements(docs.len() as u64));
    group.bench_function("decode", |b| {
        b.iter(|| {
            for d in &docs {
                black_box(decode_event(d).expect("corpus decodes"));
            }
        })
    });
    group.bench_function("encode", |b| {
        b.iter(|| {
            for _ in 0..docs.len() {
                black_box(encode_outcome(black_box(&outcome)));
            }
        })
    });
    group.finish();
}

criterion_group!(benches, rules, codec);
criterion_main!(benches);
