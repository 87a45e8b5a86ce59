//! TCP server hosting one session for any number of clients.
//!
//! Reader threads decode nothing; they forward raw frames to the thread that
//! owns the session, which is also the only one writing to sockets.

use std::collections::BTreeMap;
use std::io;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use projed::session::{Event, Outcome, Session};

use crate::frame::{read_frame, write_frame};
use crate::wire::{decode_client, encode_scene, encode_server, identity_of, wire_id, wire_menu, ClientMessage, ServerMessage};

pub const DEFAULT_PORT: u16 = 7155;

enum Incoming {
    Connected(u64, TcpStream),
    Frame(u64, Vec<u8>),
    Closed(u64),
}

/// Stops a running server from any thread.
#[derive(Clone)]
pub struct ShutdownHandle {
    flag: Arc<AtomicBool>,
    addr: SocketAddr,
}

impl ShutdownHandle {
    pub fn shutdown(&self) {
        if !self.flag.swap(true, Ordering::SeqCst) {
            // Wake the accept loop.
            let _ = TcpStream::connect(self.addr);
        }
    }
}

pub struct Server {
    listener: TcpListener,
    flag: Arc<AtomicBool>,
}

/// What the session owner does with one client frame.
#[derive(Debug, PartialEq)]
pub enum Reply {
    /// Send the scene to every client.
    Broadcast,
    /// Send this message to the sender only.
    ToSender(ServerMessage),
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Server> {
        Ok(Server { listener: TcpListener::bind(addr)?, flag: Arc::new(AtomicBool::new(false)) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn shutdown_handle(&self) -> io::Result<ShutdownHandle> {
        Ok(ShutdownHandle { flag: self.flag.clone(), addr: self.local_addr()? })
    }

    /// Serves until shut down and returns the session.
    pub fn run(self, mut session: Session) -> io::Result<Session> {
        let (tx, rx) = mpsc::channel();
        let listener = self.listener.try_clone()?;
        let flag = self.flag.clone();
        let acceptor = thread::spawn(move || accept_loop(listener, flag, tx));
        let result = owner_loop(&mut session, &rx, &self.flag);
        self.flag.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.local_addr()?);
        let _ = acceptor.join();
        result.map(|()| session)
    }
}

fn accept_loop(listener: TcpListener, flag: Arc<AtomicBool>, tx: Sender<Incoming>) {
    let mut next_id = 0;
    for stream in listener.incoming() {
        if flag.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        let Ok(mut reader) = stream.try_clone() else { continue };
        next_id += 1;
        let id = next_id;
        if tx.send(Incoming::Connected(id, stream)).is_err() {
            break;
        }
        let tx = tx.clone();
        thread::spawn(move || {
            while let Ok(Some(frame)) = read_frame(&mut reader) {
                if tx.send(Incoming::Frame(id, frame)).is_err() {
                    return;
                }
            }
            let _ = tx.send(Incoming::Closed(id));
        });
    }
}

fn owner_loop(session: &mut Session, rx: &Receiver<Incoming>, flag: &AtomicBool) -> io::Result<()> {
    let mut clients: BTreeMap<u64, TcpStream> = BTreeMap::new();
    let result = loop {
        if flag.load(Ordering::SeqCst) {
            break Ok(());
        }
        let msg = match rx.recv_timeout(Duration::from_millis(50)) {
            Ok(m) => m,
            Err(RecvTimeoutError::Timeout) => continue,
            Err(RecvTimeoutError::Disconnected) => break Ok(()),
        };
        match msg {
            Incoming::Connected(id, mut stream) => {
                if write_frame(&mut stream, &encode_scene(session.scene(), session.revision())).is_ok() {
                    clients.insert(id, stream);
                }
            }
            Incoming::Closed(id) => {
                clients.remove(&id);
            }
            Incoming::Frame(id, bytes) => match handle_frame(session, &bytes) {
                Reply::Broadcast => {
                    let frame = encode_scene(session.scene(), session.revision());
                    clients.retain(|_, s| write_frame(s, &frame).is_ok());
                }
                Reply::ToSender(m) => {
                    if let Some(s) = clients.get_mut(&id) {
                        if write_frame(s, &encode_server(&m)).is_err() {
                            clients.remove(&id);
                        }
                    }
                }
            },
        }
    };
    for s in clients.values() {
        let _ = s.shutdown(Shutdown::Both);
    }
    result
}

fn diagnostic(session: &Session, text: impl Into<String>) -> Reply {
    Reply::ToSender(ServerMessage::Diagnostic { revision: session.revision(), text: text.into(), path: None })
}

/// Applies one client frame to the session. Exactly one reply results.
pub fn handle_frame(session: &mut Session, bytes: &[u8]) -> Reply {
    let msg = match decode_client(bytes) {
        Ok(m) => m,
        Err(e) => return diagnostic(session, e.to_string()),
    };
    let (revision, event) = match msg {
        ClientMessage::Hello => {
            return Reply::ToSender(ServerMessage::Scene { revision: session.revision(), scene: session.scene().into() })
        }
        ClientMessage::Event { revision, event } => match event.to_event() {
            Ok(e) => (revision, e),
            Err(e) => return diagnostic(session, e.to_string()),
        },
        ClientMessage::MenuReply { revision, target, label } => {
            let target = match identity_of(&target) {
                Ok(t) => t,
                Err(e) => return diagnostic(session, e.to_string()),
            };
            let menu = match session.pending_menu_source() {
                Some(src) if *src == target => session.pending_menu().cloned(),
                _ => session.menu(&target),
            };
            match menu.and_then(|m| m.entries.into_iter().find(|e| e.label == label)) {
                Some(entry) => (revision, Event::MenuSelected { target, message: entry.message }),
                None => return diagnostic(session, format!("no menu entry `{label}` for {target}")),
            }
        }
    };
    if revision < session.revision() && !matches!(event, Event::DragNode { .. }) {
        return diagnostic(
            session,
            format!("event made against revision {revision} is stale (current {})", session.revision()),
        );
    }
    match session.dispatch(event) {
        Outcome::Applied => Reply::Broadcast,
        Outcome::Dropped(why) => diagnostic(session, why),
        Outcome::MenuPending(menu) => Reply::ToSender(ServerMessage::MenuRequest {
            revision: session.revision(),
            target: session.pending_menu_source().map(wire_id).unwrap_or_default(),
            choices: wire_menu(&menu),
        }),
        Outcome::Failed(e) => diagnostic(session, e.to_string()),
    }
}
