//! Blocking client, for tests and tools.

use std::io;
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use crate::frame::{read_frame, write_frame};
use crate::wire::{decode_server, encode_client, ClientMessage, ServerMessage};

pub struct Client {
    stream: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Client> {
        let stream = TcpStream::connect(addr)?;
        stream.set_read_timeout(Some(Duration::from_secs(10)))?;
        Ok(Client { stream })
    }

    pub fn send(&mut self, m: &ClientMessage) -> io::Result<()> {
        write_frame(&mut self.stream, &encode_client(m))
    }

    /// Sends bytes that need not be a valid message.
    pub fn send_raw(&mut self, bytes: &[u8]) -> io::Result<()> {
        write_frame(&mut self.stream, bytes)
    }

    pub fn recv(&mut self) -> io::Result<ServerMessage> {
        let frame = read_frame(&mut self.stream)?
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"))?;
        decode_server(&frame).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
