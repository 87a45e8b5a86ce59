//! Wire protocol between a projed session and UI clients: JSON messages
//! (`"v": 1`) in length-prefixed frames over TCP.

pub mod client;
pub mod frame;
pub mod server;
pub mod wire;

pub use client::Client;
pub use server::{handle_frame, Reply, Server, ShutdownHandle, DEFAULT_PORT};
pub use wire::{decode_event, encode_event, encode_scene, ClientMessage, ServerMessage, WireError};
