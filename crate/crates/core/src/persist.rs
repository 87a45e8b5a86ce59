//! XML save and load for terms and sessions, and language file loading.
//!
//! Output is canonical: UTF-8, LF line endings, two-space indentation and a
//! fixed attribute order, so saving the same value twice gives equal bytes.

use std::path::Path as FsPath;
use std::sync::Arc;

use quick_xml::escape::unescape;
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use crate::langdef::{load_language, LanguageDef, ParseError};
use crate::rewrite::Fuel;
use crate::scene::{LayoutCache, Viewport};
use crate::session::{Session, SessionError};
use crate::term::{advance_identity_counter, Atom, ClauseRef, Hole, HoleSlot, Identity, Term};

const HEADER: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("session is for language `{found}` but `{expected}` was loaded")]
    LanguageMismatch { expected: String, found: String },
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, thiserror::Error)]
pub enum LanguageFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
}

/// Reads and parses a `.pld` file.
pub fn read_language_file(path: &FsPath) -> Result<LanguageDef, LanguageFileError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LanguageFileError::Io { path: shown.clone(), source })?;
    load_language(&text).map_err(|source| LanguageFileError::Parse { path: shown, source })
}

// ---- writing ----

fn escape_attr(s: &str, escape_commas: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            ',' if escape_commas => out.push_str("&#44;"),
            _ => out.push(c),
        }
    }
    out
}

fn encode_part(a: &Atom) -> String {
    match a {
        Atom::Int(n) => n.to_string(),
        Atom::Bool(true) => "#t".into(),
        Atom::Bool(false) => "#f".into(),
        Atom::Char(c) => format!("#\\{c}"),
        Atom::Str(s) => {
            let ambiguous = s.is_empty() || s.starts_with('\'') || s.starts_with('#') || s.parse::<i64>().is_ok();
            if ambiguous {
                format!("'{s}")
            } else {
                s.clone()
            }
        }
    }
}

fn decode_part(s: &str) -> Option<Atom> {
    if let Some(rest) = s.strip_prefix('\'') {
        return Some(Atom::Str(rest.to_string()));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Some(Atom::Int(n));
    }
    match s {
        "#t" => return Some(Atom::Bool(true)),
        "#f" => return Some(Atom::Bool(false)),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix("#\\") {
        let mut cs = rest.chars();
        return match (cs.next(), cs.next()) {
            (Some(c), None) => Some(Atom::Char(c)),
            _ => None,
        };
    }
    if s.starts_with('#') {
        return None;
    }
    Some(Atom::Str(s.to_string()))
}

fn encode_identity(id: &Identity) -> String {
    id.parts().iter().map(|p| escape_attr(&encode_part(p), true)).collect::<Vec<_>>().join(",")
}

/// Writes an identity as comma-joined parts, the form used in session files
/// (without XML escaping). Parts containing commas do not survive
/// [`parse_identity`].
pub fn format_identity(id: &Identity) -> String {
    id.parts().iter().map(encode_part).collect::<Vec<_>>().join(",")
}

/// Reads the form written by [`format_identity`].
pub fn parse_identity(s: &str) -> Option<Identity> {
    Identity::new(s.split(',').map(decode_part).collect::<Option<Vec<_>>>()?)
}

fn write_term(t: &Term, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match t {
        Term::Atom(a) => {
            let (tag, v) = match a {
                Atom::Str(s) => ("str", s.clone()),
                Atom::Int(n) => ("int", n.to_string()),
                Atom::Bool(b) => ("bool", if *b { "#t" } else { "#f" }.to_string()),
                Atom::Char(c) => ("char", c.to_string()),
            };
            out.push_str(&format!("{pad}<{tag} v=\"{}\"/>\n", escape_attr(&v, false)));
        }
        Term::Compound(c) => {
            let open = format!("{pad}<term functor=\"{}\" id=\"{}\"", escape_attr(&c.functor, false), encode_identity(&c.identity));
            if c.children.is_empty() {
                out.push_str(&open);
                out.push_str("/>\n");
            } else {
                out.push_str(&open);
                out.push_str(">\n");
                for child in &c.children {
                    write_term(child, depth + 1, out);
                }
                out.push_str(&format!("{pad}</term>\n"));
            }
        }
        Term::Hole(h) => {
            let mut open = format!("{pad}<hole id=\"{}\"", encode_identity(&h.identity));
            match &h.slot {
                HoleSlot::Choice(r) | HoleSlot::Repeat(r) => {
                    let kind = if matches!(h.slot, HoleSlot::Choice(_)) { "choice" } else { "repeat" };
                    let path: Vec<String> = r.path.iter().map(usize::to_string).collect();
                    open += &format!(
                        " kind=\"{kind}\" clause=\"{}\" path=\"{}\"",
                        escape_attr(&r.clause, false),
                        path.join(".")
                    );
                }
                HoleSlot::Text(s) => open += &format!(" kind=\"text\" text=\"{}\"", escape_attr(s, false)),
            }
            match &h.display {
                None => {
                    out.push_str(&open);
                    out.push_str("/>\n");
                }
                Some(d) => {
                    out.push_str(&open);
                    out.push_str(">\n");
                    write_term(d, depth + 1, out);
                    out.push_str(&format!("{pad}</hole>\n"));
                }
            }
        }
    }
}

/// Encodes a term as a standalone XML document.
pub fn save_term(t: &Term) -> String {
    let mut out = HEADER.to_string();
    write_term(t, 0, &mut out);
    out
}

/// Encodes the abstract tree, start clause and node positions.
pub fn save_session(s: &Session) -> String {
    let mut out = HEADER.to_string();
    out.push_str(&format!(
        "<session language=\"{}\" start=\"{}\">\n",
        escape_attr(&s.language().name, false),
        escape_attr(s.start_clause(), false)
    ));
    out.push_str("  <abstract>\n");
    write_term(s.abstract_tree(), 2, &mut out);
    out.push_str("  </abstract>\n");
    // Positions of nodes that are gone are not worth keeping.
    let positions: Vec<_> = s.layout_cache().positions.iter().filter(|(id, _)| s.position_is_live(id)).collect();
    if positions.is_empty() {
        out.push_str("  <layout/>\n");
    } else {
        out.push_str("  <layout>\n");
        for (id, (x, y)) in positions {
            out.push_str(&format!("    <pos id=\"{}\" x=\"{x}\" y=\"{y}\"/>\n", encode_identity(id)));
        }
        out.push_str("  </layout>\n");
    }
    out.push_str("</session>\n");
    out
}

// ---- reading ----

/// A parsed element: name, attributes (raw, still escaped) and children.
#[derive(Debug)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
}

fn xml_err(e: impl std::fmt::Display) -> PersistError {
    PersistError::Xml(e.to_string())
}

fn element_of(start: &BytesStart) -> Result<Element, PersistError> {
    let name = String::from_utf8(start.name().as_ref().to_vec()).map_err(xml_err)?;
    let mut attrs = Vec::new();
    for a in start.attributes() {
        let a = a.map_err(xml_err)?;
        let key = String::from_utf8(a.key.as_ref().to_vec()).map_err(xml_err)?;
        let raw = String::from_utf8(a.value.to_vec()).map_err(xml_err)?;
        attrs.push((key, raw));
    }
    Ok(Element { name, attrs, children: Vec::new() })
}

fn parse_document(text: &str) -> Result<Element, PersistError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root = None;
    loop {
        match reader.read_event().map_err(xml_err)? {
            XmlEvent::Start(s) => stack.push(element_of(&s)?),
            XmlEvent::Empty(s) => {
                let e = element_of(&s)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(e),
                    None if root.is_none() => root = Some(e),
                    None => return Err(PersistError::Xml("more than one root element".into())),
                }
            }
            XmlEvent::End(_) => {
                let e = stack.pop().ok_or_else(|| PersistError::Xml("unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(e),
                    None if root.is_none() => root = Some(e),
                    None => return Err(PersistError::Xml("more than one root element".into())),
                }
            }
            XmlEvent::Text(t) => {
                if !t.iter().all(u8::is_ascii_whitespace) {
                    return Err(PersistError::Xml("unexpected text content".into()));
                }
            }
            XmlEvent::CData(_) => return Err(PersistError::Xml("unexpected CDATA".into())),
            XmlEvent::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(PersistError::Xml("unclosed element".into()));
    }
    root.ok_or_else(|| PersistError::Xml("empty document".into()))
}

struct Loader {
    max_int: i64,
}

impl Loader {
    fn schema<T>(path: &str, message: impl Into<String>) -> Result<T, PersistError> {
        Err(PersistError::Schema { path: path.to_string(), message: message.into() })
    }

    fn raw<'e>(e: &'e Element, key: &str, path: &str) -> Result<&'e str, PersistError> {
        match e.attrs.iter().find(|(k, _)| k == key) {
            Some((_, v)) => Ok(v),
            None => Loader::schema(path, format!("missing attribute `{key}`")),
        }
    }

    fn attr(e: &Element, key: &str, path: &str) -> Result<String, PersistError> {
        let raw = Loader::raw(e, key, path)?;
        unescape(raw).map(|c| c.into_owned()).map_err(xml_err)
    }

    fn identity(&mut self, e: &Element, path: &str) -> Result<Identity, PersistError> {
        let raw = Loader::raw(e, "id", path)?;
        let mut parts = Vec::new();
        for p in raw.split(',') {
            let text = unescape(p).map_err(xml_err)?;
            let Some(atom) = decode_part(&text) else {
                return Loader::schema(path, format!("bad identity part `{text}`"));
            };
            if let Atom::Int(n) = atom {
                self.max_int = self.max_int.max(n);
            }
            parts.push(atom);
        }
        match Identity::new(parts) {
            Some(id) => Ok(id),
            None => Loader::schema(path, "empty identity"),
        }
    }

    fn term(&mut self, e: &Element, path: &str) -> Result<Term, PersistError> {
        let here = format!("{path}/{}", e.name);
        let leaf = |tag: &str| -> Result<String, PersistError> {
            if !e.children.is_empty() {
                return Loader::schema(&here, format!("<{tag}> has no children"));
            }
            Loader::attr(e, "v", &here)
        };
        match e.name.as_str() {
            "str" => Ok(Term::Atom(Atom::Str(leaf("str")?))),
            "int" => match leaf("int")?.parse() {
                Ok(n) => Ok(Term::int(n)),
                Err(_) => Loader::schema(&here, "bad integer"),
            },
            "bool" => match leaf("bool")?.as_str() {
                "#t" => Ok(Term::Atom(Atom::Bool(true))),
                "#f" => Ok(Term::Atom(Atom::Bool(false))),
                _ => Loader::schema(&here, "bad boolean"),
            },
            "char" => {
                let v = leaf("char")?;
                let mut cs = v.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok(Term::Atom(Atom::Char(c))),
                    _ => Loader::schema(&here, "a character must be exactly one char"),
                }
            }
            "term" => {
                let functor = Loader::attr(e, "functor", &here)?;
                if functor.is_empty() {
                    return Loader::schema(&here, "empty functor");
                }
                let id = self.identity(e, &here)?;
                let mut kids = Vec::new();
                for (i, c) in e.children.iter().enumerate() {
                    kids.push(self.term(c, &format!("{here}[{i}]"))?);
                }
                Ok(Term::compound(functor, Some(id), kids))
            }
            "hole" => {
                let id = self.identity(e, &here)?;
                let slot = match Loader::attr(e, "kind", &here)?.as_str() {
                    "text" => HoleSlot::Text(Loader::attr(e, "text", &here)?),
                    kind @ ("choice" | "repeat") => {
                        let clause = Loader::attr(e, "clause", &here)?;
                        let raw_path = Loader::attr(e, "path", &here)?;
                        let mut steps = Vec::new();
                        for s in raw_path.split('.').filter(|s| !s.is_empty()) {
                            match s.parse() {
                                Ok(n) => steps.push(n),
                                Err(_) => return Loader::schema(&here, format!("bad path `{raw_path}`")),
                            }
                        }
                        let r = ClauseRef { clause, path: steps };
                        if kind == "choice" {
                            HoleSlot::Choice(r)
                        } else {
                            HoleSlot::Repeat(r)
                        }
                    }
                    other => return Loader::schema(&here, format!("unknown hole kind `{other}`")),
                };
                let display = match e.children.as_slice() {
                    [] => None,
                    [d] => Some(self.term(d, &here)?),
                    _ => return Loader::schema(&here, "a hole has at most one display child"),
                };
                Ok(Term::Hole(Arc::new(Hole { identity: id, slot, display })))
            }
            other => Loader::schema(&here, format!("unknown element <{other}>")),
        }
    }
}

/// Decodes a document written by [`save_term`]. Identities are kept and the
/// fresh-identity counter is moved past every integer part seen.
pub fn load_term(doc: &str) -> Result<Term, PersistError> {
    let root = parse_document(doc)?;
    let mut loader = Loader { max_int: 0 };
    let t = loader.term(&root, "")?;
    advance_identity_counter(loader.max_int);
    Ok(t)
}

/// Decodes a session saved by [`save_session`] against `def`. Cached
/// positions of nodes that no longer exist are dropped.
pub fn load_session(doc: &str, def: Arc<LanguageDef>, fuel: Fuel, viewport: Viewport) -> Result<Session, PersistError> {
    let root = parse_document(doc)?;
    if root.name != "session" {
        return Loader::schema(&format!("/{}", root.name), "expected <session>");
    }
    let language = Loader::attr(&root, "language", "/session")?;
    if language != def.name {
        return Err(PersistError::LanguageMismatch { expected: def.name.clone(), found: language });
    }
    let start = Loader::attr(&root, "start", "/session")?;
    let mut loader = Loader { max_int: 0 };
    let mut tree = None;
    let mut cache = LayoutCache::default();
    for child in &root.children {
        match child.name.as_str() {
            "abstract" => match child.children.as_slice() {
                [t] => tree = Some(loader.term(t, "/session/abstract")?),
                _ => return Loader::schema("/session/abstract", "expected exactly one tree"),
            },
            "layout" => {
                for (i, pos) in child.children.iter().enumerate() {
                    let path = format!("/session/layout/pos[{i}]");
                    if pos.name != "pos" {
                        return Loader::schema(&path, format!("unknown element <{}>", pos.name));
                    }
                    let id = loader.identity(pos, &path)?;
                    let coord = |k: &str| -> Result<f64, PersistError> {
                        let v = Loader::attr(pos, k, &path)?;
                        match v.parse::<f64>() {
                            Ok(f) if f.is_finite() => Ok(f),
                            _ => Loader::schema(&path, format!("bad coordinate `{v}`")),
                        }
                    };
                    cache.positions.insert(id, (coord("x")?, coord("y")?));
                }
            }
            other => return Loader::schema("/session", format!("unknown element <{other}>")),
        }
    }
    let Some(tree) = tree else {
        return Loader::schema("/session", "missing <abstract>");
    };
    advance_identity_counter(loader.max_int);
    let mut s = Session::with_options(def, &start, Some(tree), cache, fuel, viewport)?;
    s.prune_layout_cache();
    Ok(s)
}
