//! The monitor protocol: YAML documents over a Unix-domain socket, plus
//! signal registration.

pub mod event;
pub mod framing;
pub mod server;
pub mod signals;

pub use event::{decode_event, decode_outcome, encode_event, encode_outcome, DecodeError, EventKind, InboundEvent};
pub use framing::FrameSplitter;
pub use server::{SocketServer, SocketSink, DEFAULT_SOCKET};
pub use signals::{register_signals, SignalRegistration};
