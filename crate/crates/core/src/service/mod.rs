//! Local session server. [`SessionManager`] is the synchronous core (session
//! lifecycle, event ingestion, frame rendering, log export); [`router`]
//! exposes it over HTTP and a per-session WebSocket stream. The wire
//! protocol is documented in `docs/protocol.md`.

mod http;
mod session;

pub use http::{router, serve, Envelope, FRAME_SEQ_HEADER};
pub use session::{ClientEvent, EventReply, Frame, Rendered, Session, SessionConfig, SessionInfo, SessionManager};
