//! Predicates over the computation graph.
//!
//! `nodesinclude`, `topicsinclude` and `servicesinclude` are allow-list
//! checks: every present name must be among the arguments. The per-topic
//! `topicpublishersinclude` and `topicsubscribersinclude` are membership
//! checks: every argument must be among the topic's endpoints. A node or
//! topic that is absent has no services or endpoints.

use super::context::{GraphContext, Node, Topic};
use super::sets;

fn node_services<'a>(g: &'a GraphContext, node: &str) -> impl Iterator<Item = &'a str> + Clone {
    g.node(node).into_iter().flat_map(Node::service_names)
}

fn topic_pubs<'a>(g: &'a GraphContext, topic: &str) -> impl Iterator<Item = &'a str> + Clone {
    g.topic(topic).into_iter().flat_map(|t: &Topic| t.publishers.iter().map(String::as_str))
}

fn topic_subs<'a>(g: &'a GraphContext, topic: &str) -> impl Iterator<Item = &'a str> + Clone {
    g.topic(topic).into_iter().flat_map(|t: &Topic| t.subscribers.iter().map(String::as_str))
}

pub fn nodes(g: &GraphContext, names: &[&str]) -> bool {
    sets::same(g.node_names(), names)
}

pub fn nodesinclude(g: &GraphContext, names: &[&str]) -> bool {
    sets::within(g.node_names(), names)
}

pub fn nodecount(g: &GraphContext, min: i64, max: i64) -> bool {
    sets::count_between(g.node_names(), min, max)
}

pub fn service(g: &GraphContext, node: &str, srv: &str) -> bool {
    node_services(g, node).any(|s| s == srv)
}

pub fn services(g: &GraphContext, node: &str, srvs: &[&str]) -> bool {
    sets::same(node_services(g, node), srvs)
}

pub fn servicesinclude(g: &GraphContext, node: &str, srvs: &[&str]) -> bool {
    sets::within(node_services(g, node), srvs)
}

pub fn servicecount(g: &GraphContext, node: &str, min: i64, max: i64) -> bool {
    sets::count_between(node_services(g, node), min, max)
}

pub fn topics(g: &GraphContext, names: &[&str]) -> bool {
    sets::same(g.topic_names(), names)
}

pub fn topicsinclude(g: &GraphContext, names: &[&str]) -> bool {
    sets::within(g.topic_names(), names)
}

pub fn topiccount(g: &GraphContext, min: i64, max: i64) -> bool {
    sets::count_between(g.topic_names(), min, max)
}

pub fn topicpublishers(g: &GraphContext, topic: &str, nodes: &[&str]) -> bool {
    sets::same(topic_pubs(g, topic), nodes)
}

pub fn topicpublishersinclude(g: &GraphContext, topic: &str, nodes: &[&str]) -> bool {
    sets::contains_all(topic_pubs(g, topic), nodes)
}

pub fn topicpublishercount(g: &GraphContext, topic: &str, min: i64, max: i64) -> bool {
    sets::count_between(topic_pubs(g, topic), min, max)
}

pub fn topicsubscribers(g: &GraphContext, topic: &str, nodes: &[&str]) -> bool {
    sets::same(topic_subs(g, topic), nodes)
}

pub fn topicsubscribersinclude(g: &GraphContext, topic: &str, nodes: &[&str]) -> bool {
    sets::contains_all(topic_subs(g, topic), nodes)
}

pub fn topicsubscribercount(g: &GraphContext, topic: &str, min: i64, max: i64) -> bool {
    sets::count_between(topic_subs(g, topic), min, max)
}
