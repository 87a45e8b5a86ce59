//! JSON message types and their conversions to and from engine values.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use projed::scene::{Menu, MenuEntry, PrimKind, Primitive, Scene};
use projed::session::{Event, Key};
use projed::term::{Atom, ClauseRef, Hole, HoleSlot, Identity, Term};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("malformed message: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported protocol version {0}")]
    Version(u32),
    #[error("an identity needs at least one part")]
    EmptyIdentity,
    #[error("a character must be exactly one char, got {0:?}")]
    BadChar(String),
    #[error("unknown key {0:?}")]
    BadKey(String),
}

/// An identity part or atom: numbers, booleans and strings map to their JSON
/// counterparts, characters to `{"char": "x"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireAtom {
    Int(i64),
    Bool(bool),
    Str(String),
    Char { char: String },
}

impl From<&Atom> for WireAtom {
    fn from(a: &Atom) -> WireAtom {
        match a {
            Atom::Int(n) => WireAtom::Int(*n),
            Atom::Bool(b) => WireAtom::Bool(*b),
            Atom::Str(s) => WireAtom::Str(s.clone()),
            Atom::Char(c) => WireAtom::Char { char: c.to_string() },
        }
    }
}

impl WireAtom {
    pub fn to_atom(&self) -> Result<Atom, WireError> {
        Ok(match self {
            WireAtom::Int(n) => Atom::Int(*n),
            WireAtom::Bool(b) => Atom::Bool(*b),
            WireAtom::Str(s) => Atom::Str(s.clone()),
            WireAtom::Char { char } => {
                let mut cs = char.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Atom::Char(c),
                    _ => return Err(WireError::BadChar(char.clone())),
                }
            }
        })
    }
}

pub type WireId = Vec<WireAtom>;

pub fn wire_id(id: &Identity) -> WireId {
    id.parts().iter().map(WireAtom::from).collect()
}

pub fn identity_of(w: &[WireAtom]) -> Result<Identity, WireError> {
    let parts = w.iter().map(WireAtom::to_atom).collect::<Result<Vec<_>, _>>()?;
    Identity::new(parts).ok_or(WireError::EmptyIdentity)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WireSlot {
    Choice { clause: String, path: Vec<usize> },
    Repeat { clause: String, path: Vec<usize> },
    Text { text: String },
}

impl From<&HoleSlot> for WireSlot {
    fn from(s: &HoleSlot) -> WireSlot {
        match s {
            HoleSlot::Choice(r) => WireSlot::Choice { clause: r.clause.clone(), path: r.path.clone() },
            HoleSlot::Repeat(r) => WireSlot::Repeat { clause: r.clause.clone(), path: r.path.clone() },
            HoleSlot::Text(t) => WireSlot::Text { text: t.clone() },
        }
    }
}

impl From<&WireSlot> for HoleSlot {
    fn from(s: &WireSlot) -> HoleSlot {
        match s {
            WireSlot::Choice { clause, path } => HoleSlot::Choice(ClauseRef { clause: clause.clone(), path: path.clone() }),
            WireSlot::Repeat { clause, path } => HoleSlot::Repeat(ClauseRef { clause: clause.clone(), path: path.clone() }),
            WireSlot::Text { text } => HoleSlot::Text(text.clone()),
        }
    }
}

/// A term with its identities, as carried by menu entries and edge types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireTerm {
    Compound {
        functor: String,
        id: WireId,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        children: Vec<WireTerm>,
    },
    Hole {
        hole: WireId,
        slot: WireSlot,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        display: Option<Box<WireTerm>>,
    },
    Atom(WireAtom),
}

impl From<&Term> for WireTerm {
    fn from(t: &Term) -> WireTerm {
        match t {
            Term::Atom(a) => WireTerm::Atom(a.into()),
            Term::Compound(c) => WireTerm::Compound {
                functor: c.functor.clone(),
                id: wire_id(&c.identity),
                children: c.children.iter().map(WireTerm::from).collect(),
            },
            Term::Hole(h) => WireTerm::Hole {
                hole: wire_id(&h.identity),
                slot: (&h.slot).into(),
                display: h.display.as_ref().map(|d| Box::new(d.into())),
            },
        }
    }
}

impl WireTerm {
    pub fn to_term(&self) -> Result<Term, WireError> {
        Ok(match self {
            WireTerm::Atom(a) => Term::Atom(a.to_atom()?),
            WireTerm::Compound { functor, id, children } => {
                let kids = children.iter().map(WireTerm::to_term).collect::<Result<Vec<_>, _>>()?;
                Term::compound(functor.clone(), Some(identity_of(id)?), kids)
            }
            WireTerm::Hole { hole, slot, display } => {
                let display = display.as_ref().map(|d| d.to_term()).transpose()?;
                Term::Hole(Arc::new(Hole { identity: identity_of(hole)?, slot: slot.into(), display }))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMenuEntry {
    pub label: String,
    pub message: WireTerm,
}

pub fn wire_menu(m: &Menu) -> Vec<WireMenuEntry> {
    m.entries.iter().map(|e| WireMenuEntry { label: e.label.clone(), message: (&e.message).into() }).collect()
}

pub fn menu_of(entries: &[WireMenuEntry]) -> Result<Menu, WireError> {
    let entries = entries
        .iter()
        .map(|e| Ok(MenuEntry { label: e.label.clone(), message: e.message.to_term()? }))
        .collect::<Result<Vec<_>, WireError>>()?;
    Ok(Menu { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WirePrimKind {
    Text { text: String, size: f64 },
    Line { x1: f64, y1: f64, x2: f64, y2: f64 },
    BoxFrame { border: f64 },
    Rectangle { fill: bool },
    Ellipse { fill: bool },
    Image { path: String },
    Arrowhead { points: [(f64, f64); 3] },
    Hole { slot: WireSlot },
    NodeFrame { node_type: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirePrimitive {
    #[serde(flatten)]
    pub kind: WirePrimKind,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<WireId>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "abstract")]
    pub abstract_id: Option<WireId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<Vec<WireMenuEntry>>,
    pub selectable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit_target: Option<WireId>,
}

impl From<&Primitive> for WirePrimitive {
    fn from(p: &Primitive) -> WirePrimitive {
        let kind = match &p.kind {
            PrimKind::Text { text, size } => WirePrimKind::Text { text: text.clone(), size: *size },
            PrimKind::Line { x1, y1, x2, y2 } => WirePrimKind::Line { x1: *x1, y1: *y1, x2: *x2, y2: *y2 },
            PrimKind::BoxFrame { border } => WirePrimKind::BoxFrame { border: *border },
            PrimKind::Rectangle { fill } => WirePrimKind::Rectangle { fill: *fill },
            PrimKind::Ellipse { fill } => WirePrimKind::Ellipse { fill: *fill },
            PrimKind::Image { path } => WirePrimKind::Image { path: path.clone() },
            PrimKind::Arrowhead { points } => WirePrimKind::Arrowhead { points: *points },
            PrimKind::Hole { slot } => WirePrimKind::Hole { slot: slot.into() },
            PrimKind::NodeFrame { node_type } => WirePrimKind::NodeFrame { node_type: node_type.clone() },
        };
        WirePrimitive {
            kind,
            x: p.rect.x,
            y: p.rect.y,
            w: p.rect.w,
            h: p.rect.h,
            id: p.concrete.as_ref().map(wire_id),
            abstract_id: p.abstract_id.as_ref().map(wire_id),
            menu: p.menu.as_ref().map(wire_menu),
            selectable: p.selectable,
            edit_target: p.edit_target.as_ref().map(wire_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireNode {
    pub id: WireId,
    #[serde(rename = "abstract")]
    pub abstract_id: WireId,
    pub node_type: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub graph: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEdgeType {
    pub name: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireScene {
    pub width: f64,
    pub height: f64,
    pub primitives: Vec<WirePrimitive>,
    pub nodes: Vec<WireNode>,
    pub graphs: Vec<Vec<WireEdgeType>>,
}

impl From<&Scene> for WireScene {
    fn from(s: &Scene) -> WireScene {
        WireScene {
            width: s.width,
            height: s.height,
            primitives: s.primitives.iter().map(WirePrimitive::from).collect(),
            nodes: s
                .nodes
                .iter()
                .map(|n| WireNode {
                    id: wire_id(&n.id),
                    abstract_id: wire_id(&n.abstract_id),
                    node_type: n.node_type.clone(),
                    x: n.rect.x,
                    y: n.rect.y,
                    w: n.rect.w,
                    h: n.rect.h,
                    graph: n.graph,
                })
                .collect(),
            graphs: s
                .graphs
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|e| WireEdgeType { name: e.name.clone(), source: e.source.clone(), target: e.target.clone() })
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WireEvent {
    /// `key` is a single character or a named key such as `up`.
    KeyPressed { selected: Option<WireId>, key: String },
    DoubleClick { target: WireId },
    NewEdge { edge_type: WireTerm, source: WireId, target: WireId },
    MenuSelected { target: WireId, message: WireTerm },
    DragNode { node: WireId, x: f64, y: f64 },
    EditText { target: WireId, text: String },
    EdgeDrag { source: WireId, target: WireId },
}

impl From<&Event> for WireEvent {
    fn from(e: &Event) -> WireEvent {
        match e {
            Event::KeyPressed { selected, key } => {
                WireEvent::KeyPressed { selected: selected.as_ref().map(wire_id), key: key.to_string() }
            }
            Event::DoubleClick { target } => WireEvent::DoubleClick { target: wire_id(target) },
            Event::NewEdge { edge_type, source, target } => {
                WireEvent::NewEdge { edge_type: edge_type.into(), source: wire_id(source), target: wire_id(target) }
            }
            Event::MenuSelected { target, message } => {
                WireEvent::MenuSelected { target: wire_id(target), message: message.into() }
            }
            Event::DragNode { node, x, y } => WireEvent::DragNode { node: wire_id(node), x: *x, y: *y },
            Event::EditText { target, text } => WireEvent::EditText { target: wire_id(target), text: text.clone() },
            Event::EdgeDrag { source, target } => WireEvent::EdgeDrag { source: wire_id(source), target: wire_id(target) },
        }
    }
}

impl WireEvent {
    pub fn to_event(&self) -> Result<Event, WireError> {
        Ok(match self {
            WireEvent::KeyPressed { selected, key } => Event::KeyPressed {
                selected: selected.as_deref().map(identity_of).transpose()?,
                key: Key::parse(key).ok_or_else(|| WireError::BadKey(key.clone()))?,
            },
            WireEvent::DoubleClick { target } => Event::DoubleClick { target: identity_of(target)? },
            WireEvent::NewEdge { edge_type, source, target } => Event::NewEdge {
                edge_type: edge_type.to_term()?,
                source: identity_of(source)?,
                target: identity_of(target)?,
            },
            WireEvent::MenuSelected { target, message } => {
                Event::MenuSelected { target: identity_of(target)?, message: message.to_term()? }
            }
            WireEvent::DragNode { node, x, y } => Event::DragNode { node: identity_of(node)?, x: *x, y: *y },
            WireEvent::EditText { target, text } => Event::EditText { target: identity_of(target)?, text: text.clone() },
            WireEvent::EdgeDrag { source, target } => {
                Event::EdgeDrag { source: identity_of(source)?, target: identity_of(target)? }
            }
        })
    }
}

/// Messages from the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ServerMessage {
    Scene { revision: u64, scene: WireScene },
    Diagnostic {
        revision: u64,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<Vec<usize>>,
    },
    MenuRequest { revision: u64, target: WireId, choices: Vec<WireMenuEntry> },
}

/// Messages from a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ClientMessage {
    Hello,
    Event { revision: u64, event: WireEvent },
    MenuReply { revision: u64, target: WireId, label: String },
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

fn encode<T: Serialize>(body: &T) -> Vec<u8> {
    serde_json::to_vec(&Envelope { v: PROTOCOL_VERSION, body }).expect("wire types always serialize")
}

fn decode<'a, T: Deserialize<'a>>(bytes: &'a [u8]) -> Result<T, WireError> {
    let env: Envelope<T> = serde_json::from_slice(bytes)?;
    if env.v != PROTOCOL_VERSION {
        return Err(WireError::Version(env.v));
    }
    Ok(env.body)
}

pub fn encode_server(m: &ServerMessage) -> Vec<u8> {
    encode(m)
}

pub fn decode_server(bytes: &[u8]) -> Result<ServerMessage, WireError> {
    decode(bytes)
}

pub fn encode_client(m: &ClientMessage) -> Vec<u8> {
    encode(m)
}

pub fn decode_client(bytes: &[u8]) -> Result<ClientMessage, WireError> {
    decode(bytes)
}

/// A scene message for `scene` at `revision`.
pub fn encode_scene(scene: &Scene, revision: u64) -> Vec<u8> {
    encode_server(&ServerMessage::Scene { revision, scene: scene.into() })
}

/// An event message generated against `revision`.
pub fn encode_event(event: &Event, revision: u64) -> Vec<u8> {
    encode_client(&ClientMessage::Event { revision, event: event.into() })
}

/// Decodes an event message into the event and the revision it was made
/// against.
pub fn decode_event(bytes: &[u8]) -> Result<(Event, u64), WireError> {
    match decode_client(bytes)? {
        ClientMessage::Event { revision, event } => Ok((event.to_event()?, revision)),
        other => Err(WireError::Json(serde::de::Error::custom(format!("expected an event, got {other:?}")))),
    }
}
