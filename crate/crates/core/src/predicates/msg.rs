//! Predicates over the message being processed. `publishers*` and
//! `subscribers*` refer to the message's own topic; a topic missing from
//! the graph snapshot has no endpoints.

use regex::Regex;

use super::context::{MessageContext, Topic};
use super::sets;

fn own_topic(m: &MessageContext) -> Option<&Topic> {
    m.graph.topic(&m.topic)
}

fn pubs(m: &MessageContext) -> impl Iterator<Item = &str> + Clone {
    own_topic(m).into_iter().flat_map(|t| t.publishers.iter().map(String::as_str))
}

fn subs(m: &MessageContext) -> impl Iterator<Item = &str> + Clone {
    own_topic(m).into_iter().flat_map(|t| t.subscribers.iter().map(String::as_str))
}

pub fn topicin(m: &MessageContext, topics: &[&str]) -> bool {
    topics.contains(&m.topic.as_str())
}

/// `re` must already be anchored for a full match.
pub fn topicmatches(m: &MessageContext, re: &Regex) -> bool {
    re.is_match(&m.topic)
}

pub fn msgtypein(m: &MessageContext, types: &[&str]) -> bool {
    types.contains(&m.msg_type.as_str())
}

/// Compares the package (first `/` segment) and the type name (last
/// segment) of the message type.
pub fn msgsubtype(m: &MessageContext, package: &str, name: &str) -> bool {
    let first = m.msg_type.split('/').next().unwrap_or("");
    let last = m.msg_type.rsplit('/').next().unwrap_or("");
    first == package && last == name
}

pub fn publishers(m: &MessageContext, nodes: &[&str]) -> bool {
    sets::same(pubs(m), nodes)
}

pub fn publishersinclude(m: &MessageContext, nodes: &[&str]) -> bool {
    sets::contains_all(pubs(m), nodes)
}

pub fn publishercount(m: &MessageContext, min: i64, max: i64) -> bool {
    sets::count_between(pubs(m), min, max)
}

pub fn subscribers(m: &MessageContext, nodes: &[&str]) -> bool {
    sets::same(subs(m), nodes)
}

pub fn subscribersinclude(m: &MessageContext, nodes: &[&str]) -> bool {
    sets::contains_all(subs(m), nodes)
}

pub fn subscribercount(m: &MessageContext, min: i64, max: i64) -> bool {
    sets::count_between(subs(m), min, max)
}
