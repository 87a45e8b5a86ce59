use std::fmt;

use crate::term::{Atom, Hole, Identity, Path, Term};

/// A checked normal form: the display language reduce rules must produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Nf {
    NewLine,
    Text(String),
    Font { up: bool, body: Box<Nf> },
    Seq(Vec<Nf>),
    Tab(Vec<Nf>),
    Indent(i64, Vec<Nf>),
    Box(BoxNf),
    Ellipse(ShapeNf),
    Rectangle(ShapeNf),
    Image { id: Identity, w: i64, h: i64, path: String },
    Underline(Vec<Nf>),
    /// An editable text run. `target` is the text hole the edits go to.
    Chars { id: Identity, text: String, target: Option<Identity> },
    Thumbnail { x: i64, y: i64, w: i64, h: i64, body: Box<Nf> },
    Tree(Box<Nf>, Vec<Nf>),
    Graph(GraphNf),
    Hole(Hole),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxKind {
    Box,
    VBox,
    HBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos {
    Left,
    Right,
    Top,
    Bot,
    Centre,
    Align,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxNf {
    pub kind: BoxKind,
    pub id: Identity,
    pub border: Option<i64>,
    pub fixed: bool,
    pub menu: Option<Menu>,
    pub items: Vec<(Pos, Nf)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeNf {
    pub id: Identity,
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub fill: bool,
    pub selectable: bool,
}

/// Menu entries pair a label with the message sent when it is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Menu {
    pub entries: Vec<MenuEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenuEntry {
    pub label: String,
    pub message: Term,
}

impl Menu {
    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn entry(&self, label: &str) -> Option<&MenuEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNf {
    pub edge_types: Vec<EdgeType>,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// `(name (source-type) (target-type))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeType {
    pub name: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: Identity,
    pub node_type: String,
    pub abstract_id: Identity,
    pub display: Nf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoration {
    Arrow,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLabel {
    pub id: Identity,
    pub end: End,
    pub body: Nf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub id: Identity,
    pub edge_type: Option<String>,
    pub source: Identity,
    pub source_dec: Decoration,
    pub target: Identity,
    pub target_dec: Decoration,
    pub labels: Vec<EdgeLabel>,
}

/// A term that does not fit the normal-form grammar.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct NotNormalForm {
    pub path: Path,
    pub found: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for NotNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a normal form at path {:?}: found {}, expected ", self.path, self.found)?;
        f.write_str(&self.expected.join(" | "))
    }
}

const NF_FORMS: &[&str] = &[
    "(nl)", "string", "int", "bool", "char", "(space)", "(font +/- nf)", "(seq nf ...)", "(tab nf ...)",
    "(indent int nf ...)", "(box ...)", "(vbox ...)", "(hbox ...)", "(ellipse x y w h fill sel)",
    "(rectangle x y w h fill sel)", "(image w h path)", "(underline nf ...)", "(chars string)",
    "(thumbnail x y w h nf)", "(tree nf nf ...)", "(graph (edge-types ...) node ... edge ...)", "hole",
];

/// Checks `t` against the normal-form grammar.
pub fn validate_nf(t: &Term) -> Result<Nf, NotNormalForm> {
    let mut path = Vec::new();
    Checker { path: &mut path }.nf(t)
}

struct Checker<'p> {
    path: &'p mut Path,
}

impl Checker<'_> {
    fn fail<T>(&self, t: &Term, expected: &[&'static str]) -> Result<T, NotNormalForm> {
        Err(NotNormalForm { path: self.path.clone(), found: t.to_string(), expected: expected.to_vec() })
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> Result<T, NotNormalForm>) -> Result<T, NotNormalForm> {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    fn nfs(&mut self, kids: &[Term], offset: usize) -> Result<Vec<Nf>, NotNormalForm> {
        kids.iter()
            .enumerate()
            .map(|(i, k)| self.child(i + offset, |c| c.nf(k)))
            .collect()
    }

    fn int(&mut self, t: &Term, i: usize) -> Result<i64, NotNormalForm> {
        match t {
            Term::Atom(Atom::Int(n)) => Ok(*n),
            _ => self.child(i, |c| c.fail(t, &["int"])),
        }
    }

    fn bool(&mut self, t: &Term, i: usize) -> Result<bool, NotNormalForm> {
        match t {
            Term::Atom(Atom::Bool(b)) => Ok(*b),
            _ => self.child(i, |c| c.fail(t, &["bool"])),
        }
    }

    fn nf(&mut self, t: &Term) -> Result<Nf, NotNormalForm> {
        let c = match t {
            Term::Atom(a) => return Ok(Nf::Text(a.display_text())),
            Term::Hole(h) => return Ok(Nf::Hole((**h).clone())),
            Term::Compound(c) => c,
        };
        let kids = c.children.as_slice();
        match (c.functor.as_str(), kids) {
            ("nl", []) => Ok(Nf::NewLine),
            ("space", []) => Ok(Nf::Text(" ".into())),
            ("font", [dir, body]) => {
                let up = match dir.functor() {
                    Some("+") if dir.children().is_empty() => true,
                    Some("-") if dir.children().is_empty() => false,
                    _ => return self.child(0, |c| c.fail(dir, &["(+)", "(-)"])),
                };
                Ok(Nf::Font { up, body: Box::new(self.child(1, |c| c.nf(body))?) })
            }
            ("seq", _) => Ok(Nf::Seq(self.nfs(kids, 0)?)),
            ("tab", [_, ..]) => Ok(Nf::Tab(self.nfs(kids, 0)?)),
            ("indent", [n, _, ..]) => {
                let n = self.int(n, 0)?;
                Ok(Nf::Indent(n, self.nfs(&kids[1..], 1)?))
            }
            ("underline", [_, ..]) => Ok(Nf::Underline(self.nfs(kids, 0)?)),
            ("box", _) => self.boxed(BoxKind::Box, t),
            ("vbox", _) => self.boxed(BoxKind::VBox, t),
            ("hbox", _) => self.boxed(BoxKind::HBox, t),
            ("ellipse" | "rectangle", [x, y, w, h, fill, sel]) => {
                let shape = ShapeNf {
                    id: c.identity.clone(),
                    x: self.int(x, 0)?,
                    y: self.int(y, 1)?,
                    w: self.int(w, 2)?,
                    h: self.int(h, 3)?,
                    fill: self.bool(fill, 4)?,
                    selectable: self.bool(sel, 5)?,
                };
                Ok(if c.functor == "ellipse" { Nf::Ellipse(shape) } else { Nf::Rectangle(shape) })
            }
            ("image", [w, h, p]) => {
                let w = self.int(w, 0)?;
                let h = self.int(h, 1)?;
                let Term::Atom(Atom::Str(path)) = p else {
                    return self.child(2, |c| c.fail(p, &["string"]));
                };
                Ok(Nf::Image { id: c.identity.clone(), w, h, path: path.clone() })
            }
            ("chars", [s]) => match s {
                Term::Atom(a) => Ok(Nf::Chars { id: c.identity.clone(), text: a.display_text(), target: None }),
                Term::Hole(h) if h.text().is_some() => Ok(Nf::Chars {
                    id: c.identity.clone(),
                    text: h.text().unwrap_or_default().to_string(),
                    target: Some(h.identity.clone()),
                }),
                _ => self.child(0, |c| c.fail(s, &["string", "text hole"])),
            },
            ("thumbnail", [x, y, w, h, body]) => Ok(Nf::Thumbnail {
                x: self.int(x, 0)?,
                y: self.int(y, 1)?,
                w: self.int(w, 2)?,
                h: self.int(h, 3)?,
                body: Box::new(self.child(4, |c| c.nf(body))?),
            }),
            ("tree", [root, rest @ ..]) => {
                let root = self.child(0, |c| c.nf(root))?;
                Ok(Nf::Tree(Box::new(root), self.nfs(rest, 1)?))
            }
            ("graph", [types, rest @ ..]) => self.graph(types, rest),
            _ => self.fail(t, NF_FORMS),
        }
    }

    fn boxed(&mut self, kind: BoxKind, t: &Term) -> Result<Nf, NotNormalForm> {
        let mut b = BoxNf {
            kind,
            id: t.identity().cloned().expect("compound"),
            border: None,
            fixed: false,
            menu: None,
            items: Vec::new(),
        };
        for (i, item) in t.children().iter().enumerate() {
            let f = item.functor().unwrap_or_default();
            let kids = item.children();
            let pos = match f {
                "left" => Some(Pos::Left),
                "right" => Some(Pos::Right),
                "top" => Some(Pos::Top),
                "bot" | "bottom" => Some(Pos::Bot),
                "centre" | "center" => Some(Pos::Centre),
                "align" => Some(Pos::Align),
                _ => None,
            };
            match (f, kids, pos) {
                ("border" | "outline", [n], _) if b.items.is_empty() => {
                    b.border = Some(self.child(i, |c| c.int(n, 0))?);
                }
                ("fixed", [], _) if b.items.is_empty() => b.fixed = true,
                ("menu", entries, _) if b.items.is_empty() => {
                    b.menu = Some(self.child(i, |c| c.menu(entries))?);
                }
                (_, [body], Some(pos)) => {
                    let nf = self.child(i, |c| c.child(0, |c| c.nf(body)))?;
                    b.items.push((pos, nf));
                }
                _ => {
                    return self.child(i, |c| {
                        c.fail(item, &["(border n)", "(outline n)", "(fixed)", "(menu ...)", "(pos nf)"])
                    })
                }
            }
        }
        Ok(Nf::Box(b))
    }

    fn menu(&mut self, entries: &[Term]) -> Result<Menu, NotNormalForm> {
        let mut menu = Menu::default();
        for (i, e) in entries.iter().enumerate() {
            match (e.functor(), e.children()) {
                (Some(label), [message]) => menu.entries.push(MenuEntry { label: label.to_string(), message: message.clone() }),
                _ => return self.child(i, |c| c.fail(e, &["(label message)"])),
            }
        }
        Ok(menu)
    }

    fn graph(&mut self, types: &Term, rest: &[Term]) -> Result<Nf, NotNormalForm> {
        if types.functor() != Some("edge-types") {
            return self.child(0, |c| c.fail(types, &["(edge-types (name (type) (type)) ...)"]));
        }
        let mut g = GraphNf { edge_types: Vec::new(), nodes: Vec::new(), edges: Vec::new() };
        for (i, et) in types.children().iter().enumerate() {
            let parsed = match (et.functor(), et.children()) {
                (Some(name), [s, t]) => match (s.functor(), t.functor()) {
                    (Some(s), Some(t)) => Some(EdgeType { name: name.into(), source: s.into(), target: t.into() }),
                    _ => None,
                },
                _ => None,
            };
            match parsed {
                Some(e) => g.edge_types.push(e),
                None => return self.child(0, |c| c.child(i, |c| c.fail(et, &["(name (type) (type))"]))),
            }
        }
        for (i, item) in rest.iter().enumerate() {
            let i = i + 1;
            match item.functor() {
                Some("node") if g.edges.is_empty() => {
                    let node = self.child(i, |c| c.node(item))?;
                    g.nodes.push(node);
                }
                Some("edge") => {
                    let edge = self.child(i, |c| c.edge(item))?;
                    g.edges.push(edge);
                }
                _ => return self.child(i, |c| c.fail(item, &["((node id ...) (type) abstract-id nf)", "(edge ...)"])),
            }
        }
        Ok(Nf::Graph(g))
    }

    fn abstract_id(&mut self, t: &Term, i: usize) -> Result<Identity, NotNormalForm> {
        match Identity::from_term(t) {
            Some(id) => Ok(id),
            None => self.child(i, |c| c.fail(t, &["atom", "(list atom ...)"])),
        }
    }

    fn node(&mut self, t: &Term) -> Result<GraphNode, NotNormalForm> {
        let [ty, abs, display] = t.children() else {
            return self.fail(t, &["((node id ...) (type) abstract-id nf)"]);
        };
        let node_type = match ty.functor() {
            Some(f) => f.to_string(),
            None => return self.child(0, |c| c.fail(ty, &["(type)"])),
        };
        Ok(GraphNode {
            id: t.identity().cloned().expect("compound"),
            node_type,
            abstract_id: self.abstract_id(abs, 1)?,
            display: self.child(2, |c| c.nf(display))?,
        })
    }

    fn decoration(&mut self, t: &Term, i: usize) -> Result<Decoration, NotNormalForm> {
        match decoration_of(t) {
            Some(d) => Ok(d),
            None => self.child(i, |c| c.fail(t, &["(arrow)", "(none)"])),
        }
    }

    fn edge(&mut self, t: &Term) -> Result<GraphEdge, NotNormalForm> {
        let kids = t.children();
        // The type is optional; without it the second child is a decoration.
        let typed = kids.len() >= 5 && decoration_of(&kids[1]).is_none();
        let (edge_type, at) = if typed {
            match kids[0].functor() {
                Some(f) => (Some(f.to_string()), 1),
                None => return self.child(0, |c| c.fail(&kids[0], &["(type)"])),
            }
        } else {
            (None, 0)
        };
        if kids.len() < at + 4 {
            return self.fail(t, &["(edge [type] source dec target dec [label ...])"]);
        }
        let mut e = GraphEdge {
            id: t.identity().cloned().expect("compound"),
            edge_type,
            source: self.abstract_id(&kids[at], at)?,
            source_dec: self.decoration(&kids[at + 1], at + 1)?,
            target: self.abstract_id(&kids[at + 2], at + 2)?,
            target_dec: self.decoration(&kids[at + 3], at + 3)?,
            labels: Vec::new(),
        };
        for (i, l) in kids.iter().enumerate().skip(at + 4) {
            let label = match (l.functor(), l.children()) {
                (Some("label"), [end, body]) => {
                    let end = match end.functor() {
                        Some("source") => End::Source,
                        Some("target") => End::Target,
                        _ => return self.child(i, |c| c.child(0, |c| c.fail(end, &["(source)", "(target)"]))),
                    };
                    let body = self.child(i, |c| c.child(1, |c| c.nf(body)))?;
                    EdgeLabel { id: l.identity().cloned().expect("compound"), end, body }
                }
                _ => return self.child(i, |c| c.fail(l, &["(label end nf)"])),
            };
            e.labels.push(label);
        }
        Ok(e)
    }
}

fn decoration_of(t: &Term) -> Option<Decoration> {
    match (t.functor(), t.children().is_empty()) {
        (Some("arrow"), true) => Some(Decoration::Arrow),
        (Some("none"), true) => Some(Decoration::None),
        _ => None,
    }
}
