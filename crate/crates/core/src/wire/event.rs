//! YAML encoding of inbound events and outbound outcomes.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::predicates::{GraphContext, MessageContext, Node, Service, Topic};
use crate::runtime::{Outcome, OutcomeKind};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("invalid YAML: {0}")]
    Yaml(String),
    #[error("missing `{0}` key")]
    Missing(&'static str),
    #[error("unknown event kind `{0}`")]
    UnknownKind(String),
    #[error("payload is not valid base64: {0}")]
    Payload(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Graph(GraphContext),
    Message(MessageContext),
}

/// A decoded monitor event. The level fields echo the monitor's view and
/// are never interpreted by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct InboundEvent {
    pub current_level: Option<String>,
    pub current_grav: Option<f64>,
    pub last_alert: Option<String>,
    pub kind: EventKind,
}

impl InboundEvent {
    pub fn graph(g: GraphContext) -> Self {
        Self {
            current_level: None,
            current_grav: None,
            last_alert: None,
            kind: EventKind::Graph(g),
        }
    }

    pub fn message(m: MessageContext) -> Self {
        Self {
            kind: EventKind::Message(m),
            ..Self::graph(GraphContext::default())
        }
    }

    pub fn graph_context(&self) -> &GraphContext {
        match &self.kind {
            EventKind::Graph(g) => g,
            EventKind::Message(m) => &m.graph,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawEvent {
    #[serde(skip_serializing_if = "Option::is_none")]
    currentlevel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    currentgrav: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lastalert: Option<String>,
    event: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    topic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    msgtype: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
    context: Option<RawContext>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawContext {
    #[serde(default)]
    nodes: Option<Vec<Option<RawNode>>>,
    #[serde(default)]
    topics: Option<Vec<Option<RawTopic>>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawNode {
    node: String,
    #[serde(default)]
    gids: Option<Vec<Option<String>>>,
    #[serde(default)]
    services: Option<Vec<Option<RawService>>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawService {
    service: String,
    #[serde(default)]
    params: Option<Vec<Option<String>>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawTopic {
    topic: String,
    #[serde(default)]
    parameters: Option<Vec<Option<String>>>,
    #[serde(default)]
    publishers: Option<Vec<Option<String>>>,
    #[serde(default)]
    subscribers: Option<Vec<Option<String>>>,
}

/// Drop null entries: a list holding only `~` is the empty set.
fn names(list: Option<Vec<Option<String>>>) -> Vec<String> {
    list.unwrap_or_default().into_iter().flatten().collect()
}

/// The monitor writes an empty list as a single null entry.
fn raw_names(list: &[String]) -> Option<Vec<Option<String>>> {
    if list.is_empty() {
        Some(vec![None])
    } else {
        Some(list.iter().cloned().map(Some).collect())
    }
}

fn graph_from_raw(raw: RawContext) -> GraphContext {
    let nodes = raw
        .nodes
        .unwrap_or_default()
        .into_iter()
        .flatten()
        .map(|n| Node {
            name: n.node,
            gids: names(n.gids),
            services: n
                .services
                .unwrap_or_default()
                .into_iter()
                .flatten()
                .map(|s| Service {
                    name: s.service,
                    params: names(s.params),
                })
                .collect(),
        })
        .collect();
    let topics = raw
        .topics
        .unwrap_or_default()
        .into_iter()
        .flatten()
        .map(|t| Topic {
            name: t.topic,
            parameters: names(t.parameters),
            publishers: names(t.publishers),
            subscribers: names(t.subscribers),
        })
        .collect();
    GraphContext { nodes, topics }
}

fn graph_to_raw(g: &GraphContext) -> RawContext {
    RawContext {
        nodes: Some(
            g.nodes
                .iter()
                .map(|n| {
                    Some(RawNode {
                        node: n.name.clone(),
                        gids: raw_names(&n.gids),
                        services: Some(
                            n.services
                                .iter()
                                .map(|s| {
                                    Some(RawService {
                                        service: s.name.clone(),
                                        params: raw_names(&s.params),
                                    })
                                })
                                .collect(),
                        ),
                    })
                })
                .collect(),
        ),
        topics: Some(
            g.topics
                .iter()
                .map(|t| {
                    Some(RawTopic {
                        topic: t.name.clone(),
                        parameters: raw_names(&t.parameters),
                        publishers: raw_names(&t.publishers),
                        subscribers: raw_names(&t.subscribers),
                    })
                })
                .collect(),
        ),
    }
}

/// Decode one YAML document (with or without `---`/`...` markers).
pub fn decode_event(doc: &str) -> Result<InboundEvent, DecodeError> {
    let de = serde_yaml::Deserializer::from_str(doc);
    let mut unknown = Vec::new();
    let raw: RawEvent = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| DecodeError::Yaml(e.to_string()))?;
    for key in unknown {
        tracing::debug!(key, "ignoring unknown key in event");
    }
    let event = raw.event.ok_or(DecodeError::Missing("event"))?;
    let context = raw.context.ok_or(DecodeError::Missing("context"))?;
    let graph = graph_from_raw(context);
    let kind = match event.as_str() {
        "graph" => EventKind::Graph(graph),
        "message" => {
            let payload = match raw.payload.as_deref().map(str::trim) {
                None | Some("") => Vec::new(),
                Some(p) => BASE64.decode(p).map_err(|e| DecodeError::Payload(e.to_string()))?,
            };
            EventKind::Message(MessageContext {
                topic: raw.topic.ok_or(DecodeError::Missing("topic"))?,
                msg_type: raw.msgtype.unwrap_or_default(),
                payload,
                graph,
            })
        }
        other => return Err(DecodeError::UnknownKind(other.to_string())),
    };
    Ok(InboundEvent {
        current_level: raw.currentlevel,
        current_grav: raw.currentgrav,
        last_alert: raw.lastalert,
        kind,
    })
}

/// Encode an event as one framed YAML document, as the monitor does.
pub fn encode_event(ev: &InboundEvent) -> String {
    let mut raw = RawEvent {
        currentlevel: ev.current_level.clone(),
        currentgrav: ev.current_grav,
        lastalert: ev.last_alert.clone(),
        ..RawEvent::default()
    };
    match &ev.kind {
        EventKind::Graph(g) => {
            raw.event = Some("graph".into());
            raw.context = Some(graph_to_raw(g));
        }
        EventKind::Message(m) => {
            raw.event = Some("message".into());
            raw.topic = Some(m.topic.clone());
            raw.msgtype = Some(m.msg_type.clone());
            raw.payload = Some(BASE64.encode(&m.payload));
            raw.context = Some(graph_to_raw(&m.graph));
        }
    }
    frame(&serde_yaml::to_string(&raw).expect("event serializes"))
}

#[derive(Debug, Serialize, Deserialize)]
struct RawOutcome {
    event: String,
    level: Option<String>,
    ordinal: Option<u64>,
    gravity: Option<f64>,
    text: Option<String>,
    timestamp: i64,
}

/// One framed YAML document per outcome, keys in a fixed order.
pub fn encode_outcome(o: &Outcome) -> String {
    let raw = match &o.kind {
        OutcomeKind::LevelChange {
            level,
            ordinal,
            gravity,
        } => RawOutcome {
            event: "levelchange".into(),
            level: Some(level.clone()),
            ordinal: Some(*ordinal as u64),
            gravity: Some(*gravity),
            text: None,
            timestamp: o.timestamp,
        },
        OutcomeKind::Alert { text } => RawOutcome {
            event: "alert".into(),
            level: None,
            ordinal: None,
            gravity: None,
            text: Some(text.clone()),
            timestamp: o.timestamp,
        },
    };
    frame(&serde_yaml::to_string(&raw).expect("outcome serializes"))
}

pub fn decode_outcome(doc: &str) -> Result<Outcome, DecodeError> {
    let raw: RawOutcome = serde_yaml::from_str(doc).map_err(|e| DecodeError::Yaml(e.to_string()))?;
    let kind = match raw.event.as_str() {
        "levelchange" => OutcomeKind::LevelChange {
            level: raw.level.ok_or(DecodeError::Missing("level"))?,
            ordinal: raw.ordinal.ok_or(DecodeError::Missing("ordinal"))? as usize,
            gravity: raw.gravity.ok_or(DecodeError::Missing("gravity"))?,
        },
        "alert" => OutcomeKind::Alert {
            text: raw.text.ok_or(DecodeError::Missing("text"))?,
        },
        other => return Err(DecodeError::UnknownKind(other.to_string())),
    };
    Ok(Outcome {
        kind,
        timestamp: raw.timestamp,
    })
}

fn frame(body: &str) -> String {
    let mut s = String::with_capacity(body.len() + 9);
    s.push_str("---\n");
    s.push_str(body);
    if !body.ends_with('\n') {
        s.push('\n');
    }
    s.push_str("...\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_payload_is_base64() {
        let doc = "event: message\ntopic: /commands\nmsgtype: std_msgs/msg/String\npayload: aGV5\ncontext:\n  nodes: []\n  topics: []\n";
        let ev = decode_event(doc).unwrap();
        match ev.kind {
            EventKind::Message(m) => {
                assert_eq!(m.payload, b"hey");
                assert_eq!(m.topic, "/commands");
            }
            _ => panic!("expected a message"),
        }
    }

    #[test]
    fn empty_payload() {
        let doc = "event: message\ntopic: /t\npayload: ''\ncontext: {}\n";
        let EventKind::Message(m) = decode_event(doc).unwrap().kind else {
            panic!()
        };
        assert!(m.payload.is_empty());
    }

    #[test]
    fn missing_keys_are_errors() {
        assert_eq!(decode_event("context: {}"), Err(DecodeError::Missing("event")));
        assert_eq!(decode_event("event: graph"), Err(DecodeError::Missing("context")));
        assert!(matches!(decode_event("event: other\ncontext: {}"), Err(DecodeError::UnknownKind(_))));
        assert!(matches!(decode_event(": : :"), Err(DecodeError::Yaml(_))));
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let ev = decode_event("event: graph\nextra: 1\ncontext:\n  nodes: []\n  more: x\n").unwrap();
        assert_eq!(ev.kind, EventKind::Graph(GraphContext::default()));
    }

    #[test]
    fn numeric_looking_names_stay_text() {
        let ev = decode_event("event: graph\ncontext:\n  nodes:\n    - node: '12'\n      gids: [10.20, 3]\n").unwrap();
        assert_eq!(ev.graph_context().nodes[0].gids, vec!["10.20", "3"]);
    }

    #[test]
    fn outcome_documents() {
        let o = Outcome::level_change("COMPROMISED", 1, 1.0, 42);
        let doc = encode_outcome(&o);
        assert_eq!(
            doc,
            "---\nevent: levelchange\nlevel: COMPROMISED\nordinal: 1\ngravity: 1.0\ntext: null\ntimestamp: 42\n...\n"
        );
        assert_eq!(decode_outcome(&doc).unwrap(), o);
        let a = Outcome::alert("too many subscribers: unauthorized subscriber for the camera", 7);
        assert_eq!(decode_outcome(&encode_outcome(&a)).unwrap(), a);
        let tricky = Outcome::alert("a: b\n'c' \"d\" ~ null", 0);
        assert_eq!(decode_outcome(&encode_outcome(&tricky)).unwrap(), tricky);
    }

    #[test]
    fn event_roundtrip() {
        let g = GraphContext {
            nodes: vec![Node::new("n")],
            topics: vec![Topic::new("/t").with_subscribers(["n"])],
        };
        let m = MessageContext {
            topic: "/t".into(),
            msg_type: "std_msgs/msg/String".into(),
            payload: vec![0, 1, 2, 255],
            graph: g.clone(),
        };
        for ev in [InboundEvent::graph(g), InboundEvent::message(m)] {
            assert_eq!(decode_event(&encode_event(&ev)).unwrap(), ev);
        }
    }
}
