//! Random event streams: graph snapshots and messages over the shared
//! vocabulary, interleaved with ticks, signals and clock advances.

use rand::seq::SliceRandom;
use rand::Rng;

use super::vocab::{MSG_TYPES, NODES, SERVICES, TOPICS};
use crate::predicates::{GraphContext, MessageContext, Node, Service, Topic};
use crate::runtime::Sig;
use crate::wire::InboundEvent;

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Event(InboundEvent),
    /// Evaluate the External rules.
    Tick,
    Signal(Sig),
    /// Move the frozen clock forward by this many nanoseconds.
    Advance(i64),
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    /// Byte string planted in some message payloads.
    pub plant: Option<Vec<u8>>,
}

fn subset<R: Rng>(rng: &mut R, pool: &[&str], p: f64) -> Vec<String> {
    pool.iter().filter(|_| rng.gen_bool(p)).map(|s| s.to_string()).collect()
}

pub fn random_graph<R: Rng>(rng: &mut R) -> GraphContext {
    let names = subset(rng, &NODES, 0.6);
    let nodes = names
        .iter()
        .map(|n| Node {
            name: n.clone(),
            gids: (0..rng.gen_range(0..3)).map(|_| format!("{}", rng.gen_range(0..200))).collect(),
            services: subset(rng, &SERVICES, 0.3)
                .into_iter()
                .map(|s| Service {
                    name: s,
                    params: vec!["rcl_interfaces/srv/GetParameters".to_string()],
                })
                .collect(),
        })
        .collect();
    // Endpoints mostly come from present nodes; a few dangle.
    let endpoint_pool: Vec<&str> = if rng.gen_bool(0.9) && !names.is_empty() {
        names.iter().map(String::as_str).collect()
    } else {
        NODES.to_vec()
    };
    let topics = subset(rng, &TOPICS, 0.6)
        .into_iter()
        .map(|t| Topic {
            name: t,
            parameters: vec![MSG_TYPES.choose(rng).expect("types").to_string()],
            publishers: subset(rng, &endpoint_pool, 0.4),
            subscribers: subset(rng, &endpoint_pool, 0.5),
        })
        .collect();
    GraphContext { nodes, topics }
}

pub fn random_message<R: Rng>(rng: &mut R, graph: &GraphContext, opts: &CorpusOptions) -> MessageContext {
    let mut payload: Vec<u8> = (0..rng.gen_range(0..64)).map(|_| rng.gen()).collect();
    if let Some(p) = &opts.plant {
        if rng.gen_bool(0.2) {
            let at = rng.gen_range(0..=payload.len());
            payload.splice(at..at, p.iter().copied());
        }
    }
    MessageContext {
        topic: TOPICS.choose(rng).expect("topics").to_string(),
        msg_type: MSG_TYPES.choose(rng).expect("types").to_string(),
        payload,
        graph: graph.clone(),
    }
}

/// `events` events with ticks, signals and clock advances in between.
pub fn random_steps<R: Rng>(rng: &mut R, events: usize, opts: &CorpusOptions) -> Vec<Step> {
    let mut steps = Vec::with_capacity(events * 2);
    let mut graph = random_graph(rng);
    let mut n = 0;
    while n < events {
        match rng.gen_range(0..20) {
            0..=5 => {
                if rng.gen_bool(0.5) {
                    graph = random_graph(rng);
                }
                steps.push(Step::Event(InboundEvent::graph(graph.clone())));
                n += 1;
            }
            6..=13 => {
                steps.push(Step::Event(InboundEvent::message(random_message(rng, &graph, opts))));
                n += 1;
            }
            14 | 15 => steps.push(Step::Tick),
            16 => steps.push(Step::Signal(if rng.gen_bool(0.5) { Sig::Usr1 } else { Sig::Usr2 })),
            _ => steps.push(Step::Advance(rng.gen_range(1..200_000_000))),
        }
    }
    steps
}

/// Events only, for the benchmark corpus.
pub fn random_events<R: Rng>(rng: &mut R, events: usize, opts: &CorpusOptions) -> Vec<InboundEvent> {
    random_steps(rng, events, opts)
        .into_iter()
        .filter_map(|s| match s {
            Step::Event(e) => Some(e),
            _ => None,
        })
        .collect()
}

/// The default benchmark corpus: RIPS, a publisher of simple values and
/// its subscriber, with a graph snapshot every tenth event.
pub fn bench_events(events: usize) -> Vec<InboundEvent> {
    let mut rng = super::seeded(0x5eed);
    let graph = GraphContext {
        nodes: ["rips", "publisher", "subscriber"]
            .iter()
            .map(|n| Node {
                name: n.to_string(),
                gids: vec![format!("01.0f.{:02x}.00", n.len())],
                services: vec![Service {
                    name: format!("/{n}/get_parameters"),
                    params: vec!["rcl_interfaces/srv/GetParameters".to_string()],
                }],
            })
            .collect(),
        topics: vec![
            Topic {
                name: "/values".to_string(),
                parameters: vec!["std_msgs/msg/Int64".to_string()],
                publishers: vec!["publisher".to_string()],
                subscribers: vec!["subscriber".to_string(), "rips".to_string()],
            },
            Topic {
                name: "/pose".to_string(),
                parameters: vec!["geometry_msgs/msg/PoseStamped".to_string()],
                publishers: vec!["publisher".to_string()],
                subscribers: vec!["rips".to_string()],
            },
            Topic::new("/rosout").with_publishers(["rips", "publisher", "subscriber"]),
        ],
    };
    (0..events)
        .map(|i| {
            if i % 10 == 0 {
                return InboundEvent::graph(graph.clone());
            }
            let (topic, msg_type) = if rng.gen_bool(0.8) {
                ("/values", "std_msgs/msg/Int64")
            } else {
                ("/pose", "geometry_msgs/msg/PoseStamped")
            };
            InboundEvent::message(MessageContext {
                topic: topic.to_string(),
                msg_type: msg_type.to_string(),
                payload: rng.gen::<i64>().to_le_bytes().to_vec(),
                graph: graph.clone(),
            })
        })
        .collect()
}
