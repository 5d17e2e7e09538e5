//! Attack scenario files: an initial computation graph, a timeline of graph
//! edits, messages and signals, and the outcomes expected in order.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::Deserialize;

use crate::predicates::{GraphContext, Node, Service, Topic};
use crate::runtime::{Outcome, OutcomeKind, Sig};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid scenario: {0}")]
    Yaml(String),
    #[error("timeline entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Graph polling interval in seconds, below the command line and
    /// `RIPSPOLLING`.
    pub polling: Option<f64>,
    /// Seconds to keep running after the last timeline entry.
    pub grace: Option<f64>,
    pub graph: GraphContext,
    pub timeline: Vec<Entry>,
    pub expect: Vec<Matcher>,
    /// No outcome may go unmatched.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// Seconds since the scenario start.
    pub at: f64,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Replace the whole graph.
    Graph(GraphContext),
    AddNode(String),
    /// Remove a node and every endpoint it holds.
    RemoveNode(String),
    Subscribe { topic: String, node: String },
    Unsubscribe { topic: String, node: String },
    Advertise { topic: String, node: String },
    Unadvertise { topic: String, node: String },
    Message { topic: String, msg_type: String, payload: Vec<u8> },
    Signal(Sig),
}

impl Action {
    pub fn changes_graph(&self) -> bool {
        !matches!(self, Action::Message { .. } | Action::Signal(_))
    }

    /// Apply a graph edit; messages and signals leave the graph alone.
    pub fn apply(&self, g: &mut GraphContext) {
        match self {
            Action::Graph(new) => *g = new.clone(),
            Action::AddNode(name) => {
                if g.node(name).is_none() {
                    g.nodes.push(Node::new(name.clone()));
                }
            }
            Action::RemoveNode(name) => {
                g.nodes.retain(|n| &n.name != name);
                for t in &mut g.topics {
                    t.publishers.retain(|p| p != name);
                    t.subscribers.retain(|s| s != name);
                }
            }
            Action::Subscribe { topic, node } => push_unique(&mut topic_mut(g, topic).subscribers, node),
            Action::Unsubscribe { topic, node } => topic_mut(g, topic).subscribers.retain(|s| s != node),
            Action::Advertise { topic, node } => push_unique(&mut topic_mut(g, topic).publishers, node),
            Action::Unadvertise { topic, node } => topic_mut(g, topic).publishers.retain(|p| p != node),
            Action::Message { .. } | Action::Signal(_) => {}
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Action::Graph(g) => format!("graph ({} nodes, {} topics)", g.nodes.len(), g.topics.len()),
            Action::AddNode(n) => format!("add node {n}"),
            Action::RemoveNode(n) => format!("remove node {n}"),
            Action::Subscribe { topic, node } => format!("{node} subscribes to {topic}"),
            Action::Unsubscribe { topic, node } => format!("{node} unsubscribes from {topic}"),
            Action::Advertise { topic, node } => format!("{node} publishes on {topic}"),
            Action::Unadvertise { topic, node } => format!("{node} stops publishing on {topic}"),
            Action::Message { topic, payload, .. } => format!("message on {topic} ({} bytes)", payload.len()),
            Action::Signal(s) => format!("signal {}", s.name()),
        }
    }
}

fn topic_mut<'a>(g: &'a mut GraphContext, name: &str) -> &'a mut Topic {
    match g.topics.iter().position(|t| t.name == name) {
        Some(i) => &mut g.topics[i],
        None => {
            g.topics.push(Topic::new(name));
            g.topics.last_mut().expect("just pushed")
        }
    }
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matcher {
    pub want: Want,
    /// Measure latency from this instant instead of the latest timeline
    /// entry before the outcome.
    pub after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Want {
    /// A level change to the named level.
    Level(String),
    /// An alert whose text contains the substring.
    Alert(String),
}

impl Matcher {
    pub fn matches(&self, o: &Outcome) -> bool {
        match (&self.want, &o.kind) {
            (Want::Level(l), OutcomeKind::LevelChange { level, .. }) => l == level,
            (Want::Alert(s), OutcomeKind::Alert { text }) => text.contains(s.as_str()),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match &self.want {
            Want::Level(l) => format!("level {l}"),
            Want::Alert(s) => format!("alert {s:?}"),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = serde_yaml::from_str(text).map_err(|e| ScenarioError::Yaml(e.to_string()))?;
        raw.build()
    }

    /// Instant of the last timeline entry.
    pub fn end(&self) -> f64 {
        self.timeline.last().map_or(0.0, |e| e.at)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    polling: Option<f64>,
    grace: Option<f64>,
    #[serde(default)]
    graph: RawGraph,
    #[serde(default)]
    timeline: Vec<RawEntry>,
    #[serde(default)]
    expect: Vec<RawMatcher>,
    #[serde(default = "yes")]
    exact: bool,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    topics: Vec<RawTopic>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    #[serde(default)]
    gids: Vec<String>,
    #[serde(default)]
    services: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopic {
    name: String,
    #[serde(default)]
    types: Vec<String>,
    #[serde(default)]
    publishers: Vec<String>,
    #[serde(default)]
    subscribers: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Endpoint {
    topic: String,
    node: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMessage {
    topic: String,
    #[serde(default = "default_msg_type")]
    msgtype: String,
    payload: Option<String>,
    payload_hex: Option<String>,
    payload_base64: Option<String>,
}

fn default_msg_type() -> String {
    "std_msgs/msg/String".to_string()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    at: f64,
    graph: Option<RawGraph>,
    add_node: Option<String>,
    remove_node: Option<String>,
    subscribe: Option<Endpoint>,
    unsubscribe: Option<Endpoint>,
    advertise: Option<Endpoint>,
    unadvertise: Option<Endpoint>,
    message: Option<RawMessage>,
    signal: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatcher {
    level: Option<String>,
    alert: Option<String>,
    after: Option<f64>,
}

impl RawGraph {
    fn build(self) -> GraphContext {
        GraphContext {
            nodes: self
                .nodes
                .into_iter()
                .map(|n| Node {
                    name: n.name,
                    gids: n.gids,
                    services: n
                        .services
                        .into_iter()
                        .map(|name| Service {
                            name,
                            params: Vec::new(),
                        })
                        .collect(),
                })
                .collect(),
            topics: self
                .topics
                .into_iter()
                .map(|t| Topic {
                    name: t.name,
                    parameters: t.types,
                    publishers: t.publishers,
                    subscribers: t.subscribers,
                })
                .collect(),
        }
    }
}

impl RawMessage {
    fn build(self) -> Result<Action, String> {
        let payload = match (self.payload, self.payload_hex, self.payload_base64) {
            (Some(text), None, None) => text.into_bytes(),
            (None, Some(hex), None) => decode_hex(&hex)?,
            (None, None, Some(b)) => BASE64.decode(b.trim()).map_err(|e| format!("invalid payload_base64: {e}"))?,
            (None, None, None) => Vec::new(),
            _ => return Err("a message takes at most one of payload, payload_hex, payload_base64".to_string()),
        };
        Ok(Action::Message {
            topic: self.topic,
            msg_type: self.msgtype,
            payload,
        })
    }
}

/// Hex digits with optional whitespace between bytes.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, String> {
    let digits: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
    if digits.len() % 2 != 0 {
        return Err("payload_hex has an odd number of digits".to_string());
    }
    digits
        .chunks(2)
        .map(|pair| {
            let text = std::str::from_utf8(pair).map_err(|e| e.to_string())?;
            u8::from_str_radix(text, 16).map_err(|_| format!("invalid hex byte {text:?}"))
        })
        .collect()
}

impl RawEntry {
    fn build(self) -> Result<Entry, String> {
        let mut actions = Vec::new();
        if let Some(g) = self.graph {
            actions.push(Action::Graph(g.build()));
        }
        if let Some(n) = self.add_node {
            actions.push(Action::AddNode(n));
        }
        if let Some(n) = self.remove_node {
            actions.push(Action::RemoveNode(n));
        }
        if let Some(Endpoint { topic, node }) = self.subscribe {
            actions.push(Action::Subscribe { topic, node });
        }
        if let Some(Endpoint { topic, node }) = self.unsubscribe {
            actions.push(Action::Unsubscribe { topic, node });
        }
        if let Some(Endpoint { topic, node }) = self.advertise {
            actions.push(Action::Advertise { topic, node });
        }
        if let Some(Endpoint { topic, node }) = self.unadvertise {
            actions.push(Action::Unadvertise { topic, node });
        }
        if let Some(m) = self.message {
            actions.push(m.build()?);
        }
        if let Some(s) = self.signal {
            let sig = Sig::from_name(&s).ok_or_else(|| format!("unknown signal {s:?}; use SIGUSR1 or SIGUSR2"))?;
            actions.push(Action::Signal(sig));
        }
        if actions.len() != 1 {
            return Err(format!("expected exactly one action, found {}", actions.len()));
        }
        if !self.at.is_finite() || self.at < 0.0 {
            return Err(format!("`at` must be a non-negative number of seconds, found {}", self.at));
        }
        Ok(Entry {
            at: self.at,
            action: actions.remove(0),
        })
    }
}

impl RawScenario {
    fn build(self) -> Result<Scenario, ScenarioError> {
        let mut timeline = Vec::with_capacity(self.timeline.len());
        for (index, e) in self.timeline.into_iter().enumerate() {
            let e = e.build().map_err(|message| ScenarioError::Entry { index, message })?;
            if timeline.last().is_some_and(|prev: &Entry| prev.at > e.at) {
                return Err(ScenarioError::Entry {
                    index,
                    message: "timeline times must be non-decreasing".to_string(),
                });
            }
            timeline.push(e);
        }
        let expect = self
            .expect
            .into_iter()
            .map(|m| match (m.level, m.alert) {
                (Some(l), None) => Ok(Matcher {
                    want: Want::Level(l),
                    after: m.after,
                }),
                (None, Some(a)) => Ok(Matcher {
                    want: Want::Alert(a),
                    after: m.after,
                }),
                _ => Err(ScenarioError::Invalid(
                    "each expectation names exactly one of `level` or `alert`".to_string(),
                )),
            })
            .collect::<Result<_, _>>()?;
        for (what, v) in [("polling", self.polling), ("grace", self.grace)] {
            if let Some(x) = v {
                if !x.is_finite() || x < 0.0 || (what == "polling" && x == 0.0) {
                    return Err(ScenarioError::Invalid(format!("invalid {what} {x}")));
                }
            }
        }
        Ok(Scenario {
            name: self.name,
            polling: self.polling,
            grace: self.grace,
            graph: self.graph.build(),
            timeline,
            expect,
            exact: self.exact,
        })
    }
}
