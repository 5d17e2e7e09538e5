//! Expression builtins and their event contexts.

pub mod context;
pub mod external;
pub mod graph;
pub mod msg;
pub mod pattern;
mod sets;

pub use context::{GraphContext, MessageContext, Node, Service, Topic};
pub use external::IdsConfig;
pub use pattern::{PatternError, PatternSet};

/// The context a rule is evaluated in.
#[derive(Debug, Clone, Copy)]
pub enum EventCtx<'a> {
    Graph(&'a GraphContext),
    Msg(&'a MessageContext),
    /// Periodic evaluation with no event.
    External,
}
