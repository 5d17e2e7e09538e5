//! Signature table for every builtin action and expression function.

use super::types::{ExprType, ValueType};

/// Side-effecting builtins usable in action chains, in any section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Set,
    Crash,
    Alert,
    Exec,
    True,
    False,
    Trigger,
}

/// Pure builtins usable in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    // Msg
    MsgSubtype,
    MsgTypeIn,
    Payload,
    Plugin,
    PublisherCount,
    Publishers,
    PublishersInclude,
    SubscriberCount,
    Subscribers,
    SubscribersInclude,
    TopicIn,
    TopicMatches,
    // Graph
    Nodes,
    NodesInclude,
    NodeCount,
    Service,
    ServiceCount,
    Services,
    ServicesInclude,
    TopicCount,
    Topics,
    TopicsInclude,
    TopicPublisherCount,
    TopicPublishers,
    TopicPublishersInclude,
    TopicSubscriberCount,
    TopicSubscribers,
    TopicSubscribersInclude,
    // External
    IdsAlert,
    Signal,
    // Universal
    LevelName,
    String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Callable {
    Action(ActionKind),
    Expr(Builtin),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub name: &'static str,
    pub callable: Callable,
    /// Fixed leading parameters. `Universal` accepts any concrete type.
    pub params: &'static [ValueType],
    /// Type of the trailing variadic parameter (zero or more values).
    pub variadic: Option<ValueType>,
    pub ret: ValueType,
    pub expr_type: ExprType,
}

use ValueType::{Bool as B, Int as I, String as S, Universal as U};

const fn action(name: &'static str, kind: ActionKind, params: &'static [ValueType], variadic: Option<ValueType>) -> Signature {
    Signature {
        name,
        callable: Callable::Action(kind),
        params,
        variadic,
        ret: B,
        expr_type: ExprType::Universal,
    }
}

const fn expr(
    name: &'static str,
    b: Builtin,
    params: &'static [ValueType],
    variadic: Option<ValueType>,
    ret: ValueType,
    expr_type: ExprType,
) -> Signature {
    Signature {
        name,
        callable: Callable::Expr(b),
        params,
        variadic,
        ret,
        expr_type,
    }
}

const MSG: ExprType = ExprType::Msg;
const GRAPH: ExprType = ExprType::Graph;
const EXT: ExprType = ExprType::External;
const UNI: ExprType = ExprType::Universal;

pub static SIGNATURES: &[Signature] = &[
    // `set` takes a variable and a value of the variable's type; the checker
    // handles both arguments specially.
    action("set", ActionKind::Set, &[U, U], None),
    action("crash", ActionKind::Crash, &[S], None),
    action("alert", ActionKind::Alert, &[S], None),
    action("exec", ActionKind::Exec, &[S], Some(S)),
    action("True", ActionKind::True, &[], Some(U)),
    action("False", ActionKind::False, &[], Some(U)),
    action("trigger", ActionKind::Trigger, &[I], None),
    expr("msgsubtype", Builtin::MsgSubtype, &[S, S], None, B, MSG),
    expr("msgtypein", Builtin::MsgTypeIn, &[], Some(S), B, MSG),
    expr("payload", Builtin::Payload, &[S], None, B, MSG),
    expr("plugin", Builtin::Plugin, &[S], None, B, MSG),
    expr("publishercount", Builtin::PublisherCount, &[I, I], None, B, MSG),
    expr("publishers", Builtin::Publishers, &[], Some(S), B, MSG),
    expr("publishersinclude", Builtin::PublishersInclude, &[], Some(S), B, MSG),
    expr("subscribercount", Builtin::SubscriberCount, &[I, I], None, B, MSG),
    expr("subscribers", Builtin::Subscribers, &[], Some(S), B, MSG),
    expr("subscribersinclude", Builtin::SubscribersInclude, &[], Some(S), B, MSG),
    expr("topicin", Builtin::TopicIn, &[], Some(S), B, MSG),
    expr("topicmatches", Builtin::TopicMatches, &[S], None, B, MSG),
    expr("nodes", Builtin::Nodes, &[], Some(S), B, GRAPH),
    expr("nodesinclude", Builtin::NodesInclude, &[], Some(S), B, GRAPH),
    expr("nodecount", Builtin::NodeCount, &[I, I], None, B, GRAPH),
    expr("service", Builtin::Service, &[S, S], None, B, GRAPH),
    expr("servicecount", Builtin::ServiceCount, &[S, I, I], None, B, GRAPH),
    expr("services", Builtin::Services, &[S], Some(S), B, GRAPH),
    expr("servicesinclude", Builtin::ServicesInclude, &[S], Some(S), B, GRAPH),
    expr("topiccount", Builtin::TopicCount, &[I, I], None, B, GRAPH),
    expr("topics", Builtin::Topics, &[], Some(S), B, GRAPH),
    expr("topicsinclude", Builtin::TopicsInclude, &[], Some(S), B, GRAPH),
    expr("topicpublishercount", Builtin::TopicPublisherCount, &[S, I, I], None, B, GRAPH),
    expr("topicpublishers", Builtin::TopicPublishers, &[S], Some(S), B, GRAPH),
    expr("topicpublishersinclude", Builtin::TopicPublishersInclude, &[S], Some(S), B, GRAPH),
    expr("topicsubscribercount", Builtin::TopicSubscriberCount, &[S, I, I], None, B, GRAPH),
    expr("topicsubscribers", Builtin::TopicSubscribers, &[S], Some(S), B, GRAPH),
    expr("topicsubscribersinclude", Builtin::TopicSubscribersInclude, &[S], Some(S), B, GRAPH),
    expr("idsalert", Builtin::IdsAlert, &[S], None, B, EXT),
    expr("signal", Builtin::Signal, &[S], None, B, EXT),
    expr("levelname", Builtin::LevelName, &[I], None, S, UNI),
    expr("string", Builtin::String, &[U], None, S, UNI),
];

pub fn lookup(name: &str) -> Option<&'static Signature> {
    SIGNATURES.iter().find(|s| s.name == name)
}

pub fn signature_of(b: Builtin) -> &'static Signature {
    SIGNATURES
        .iter()
        .find(|s| s.callable == Callable::Expr(b))
        .expect("every builtin has a signature")
}

impl Builtin {
    pub fn name(self) -> &'static str {
        signature_of(self).name
    }
}

impl Signature {
    pub fn accepts_arity(&self, n: usize) -> bool {
        if self.variadic.is_some() {
            n >= self.params.len()
        } else {
            n == self.params.len()
        }
    }

    /// Expected type of argument `i`.
    pub fn param(&self, i: usize) -> Option<ValueType> {
        self.params.get(i).copied().or(self.variadic)
    }

    pub fn arity_text(&self) -> String {
        match self.variadic {
            Some(_) => format!("at least {}", self.params.len()),
            None => format!("exactly {}", self.params.len()),
        }
    }
}
