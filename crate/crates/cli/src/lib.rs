//! Command-line front end and live session server for GIML documents.

pub mod commands;
pub mod outputs;
pub mod server;
pub mod session;
pub mod viewport;
pub mod wire;

pub use session::{Clock, Session};
pub use wire::{ClientMessage, Message, PROTOCOL_VERSION};
