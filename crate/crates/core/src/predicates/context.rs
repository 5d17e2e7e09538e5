//! Computation-graph and message contexts carried by inbound events.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphContext {
    pub nodes: Vec<Node>,
    pub topics: Vec<Topic>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub gids: Vec<String>,
    pub services: Vec<Service>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Service {
    pub name: String,
    /// Request/response type names.
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Topic {
    pub name: String,
    /// Message type names.
    pub parameters: Vec<String>,
    pub publishers: Vec<String>,
    pub subscribers: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageContext {
    pub topic: String,
    /// Full type string, e.g. `std_msgs/msg/String`.
    pub msg_type: String,
    pub payload: Vec<u8>,
    pub graph: GraphContext,
}

impl GraphContext {
    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn topic(&self, name: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.name == name)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> + Clone {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn topic_names(&self) -> impl Iterator<Item = &str> + Clone {
        self.topics.iter().map(|t| t.name.as_str())
    }

    /// Publisher/subscriber entries that name no node in the graph.
    pub fn dangling_endpoints(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for t in &self.topics {
            for n in t.publishers.iter().chain(&t.subscribers) {
                if self.node(n).is_none() {
                    out.push((t.name.as_str(), n.as_str()));
                }
            }
        }
        out
    }
}

impl Node {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn service_names(&self) -> impl Iterator<Item = &str> + Clone {
        self.services.iter().map(|s| s.name.as_str())
    }
}

impl Topic {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn with_publishers<S: Into<String>>(mut self, p: impl IntoIterator<Item = S>) -> Self {
        self.publishers = p.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_subscribers<S: Into<String>>(mut self, s: impl IntoIterator<Item = S>) -> Self {
        self.subscribers = s.into_iter().map(Into::into).collect();
        self
    }
}
