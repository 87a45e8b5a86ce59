//! Line-oriented event scripts.
//!
//! ```text
//! # comment
//! key <target|-1> <char|name>
//! dblclick <target>
//! edge <source> <target> [type]
//! menu <target> <label>
//! drag <target> <x> <y>
//! edit <target> <text to end of line>
//! snapshot <name>
//! ```
//!
//! A target is an identity written as comma-joined parts (`7`, `b,7`) or a
//! selector resolved against the session when the line is replayed:
//! `@hole[N]` (holes of the abstract tree in pre-order), `@abs[N]` (abstract
//! compounds in pre-order), `@node[N]` (graph nodes on screen standing for
//! elements) and
//! `@click[N]` (selectable primitives in draw order). Negative indices count
//! from the end.

use std::fmt;

use projed::persist::parse_identity;
use projed::session::{Event, Key, Session};
use projed::term::{Identity, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKind {
    Hole,
    Abs,
    Node,
    Click,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Id(Identity),
    Select(SelectorKind, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Key { selected: Option<Target>, key: Key },
    DoubleClick(Target),
    Edge { source: Target, target: Target, edge_type: Option<String> },
    Menu { target: Target, label: String },
    Drag { target: Target, x: f64, y: f64 },
    Edit { target: Target, text: String },
    Snapshot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ScriptError {}

fn parse_target(s: &str) -> Result<Target, String> {
    if let Some(rest) = s.strip_prefix('@') {
        let (name, index) = rest
            .strip_suffix(']')
            .and_then(|r| r.split_once('['))
            .ok_or_else(|| format!("bad selector `{s}`"))?;
        let kind = match name {
            "hole" => SelectorKind::Hole,
            "abs" => SelectorKind::Abs,
            "node" => SelectorKind::Node,
            "click" => SelectorKind::Click,
            _ => return Err(format!("unknown selector `@{name}`")),
        };
        let index = index.parse().map_err(|_| format!("bad selector index in `{s}`"))?;
        return Ok(Target::Select(kind, index));
    }
    parse_identity(s).map(Target::Id).ok_or_else(|| format!("bad identity `{s}`"))
}

fn parse_key(s: &str) -> Result<Key, String> {
    if s == "space" {
        return Ok(Key::Char(' '));
    }
    Key::parse(s).ok_or_else(|| format!("unknown key `{s}`"))
}

fn parse_number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad number `{s}`"))
}

/// Splits off the first whitespace-separated word.
fn word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

fn parse_line(line: &str) -> Result<Option<Step>, String> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let (cmd, rest) = word(trimmed);
    let args: Vec<&str> = rest.split_whitespace().collect();
    let arity = |n: std::ops::RangeInclusive<usize>| {
        if n.contains(&args.len()) {
            Ok(())
        } else {
            Err(format!("`{cmd}` takes {} to {} arguments, got {}", n.start(), n.end(), args.len()))
        }
    };
    let step = match cmd {
        "key" => {
            arity(2..=2)?;
            let selected = if args[0] == "-1" { None } else { Some(parse_target(args[0])?) };
            Step::Key { selected, key: parse_key(args[1])? }
        }
        "dblclick" => {
            arity(1..=1)?;
            Step::DoubleClick(parse_target(args[0])?)
        }
        "edge" => {
            arity(2..=3)?;
            Step::Edge {
                source: parse_target(args[0])?,
                target: parse_target(args[1])?,
                edge_type: args.get(2).map(|s| s.to_string()),
            }
        }
        "menu" | "edit" => {
            let (target, rest) = word(rest);
            if target.is_empty() {
                return Err(format!("`{cmd}` needs a target"));
            }
            let target = parse_target(target)?;
            // The remainder after one separating space is taken verbatim.
            let text = rest.strip_prefix(|c: char| c.is_whitespace()).unwrap_or(rest).to_string();
            if cmd == "menu" {
                if text.trim().is_empty() {
                    return Err("`menu` needs a label".into());
                }
                Step::Menu { target, label: text.trim().to_string() }
            } else {
                Step::Edit { target, text }
            }
        }
        "drag" => {
            arity(3..=3)?;
            Step::Drag { target: parse_target(args[0])?, x: parse_number(args[1])?, y: parse_number(args[2])? }
        }
        "snapshot" => {
            arity(1..=1)?;
            let name = args[0];
            if name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(format!("snapshot name `{name}` must be a plain file name"));
            }
            Step::Snapshot(name.to_string())
        }
        _ => return Err(format!("unknown command `{cmd}`")),
    };
    Ok(Some(step))
}

/// Parses a whole script; the first bad line is reported.
pub fn parse_script(text: &str) -> Result<Vec<Step>, ScriptError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match parse_line(line) {
            Ok(Some(step)) => out.push(step),
            Ok(None) => {}
            Err(message) => return Err(ScriptError { line: i + 1, message }),
        }
    }
    Ok(out)
}

fn pick<T: Clone>(items: &[T], index: i64) -> Option<T> {
    let i = if index < 0 { items.len() as i64 + index } else { index };
    usize::try_from(i).ok().and_then(|i| items.get(i)).cloned()
}

/// Resolves a target. `concrete` asks for the concrete identity of a graph
/// node rather than its abstract one, as double clicks carry.
pub fn resolve(s: &Session, t: &Target, concrete: bool) -> Result<Identity, String> {
    let Target::Select(kind, index) = t else {
        let Target::Id(id) = t else { unreachable!() };
        return Ok(id.clone());
    };
    let found = match kind {
        SelectorKind::Hole | SelectorKind::Abs => {
            let mut ids = Vec::new();
            s.abstract_tree().walk(&mut |x, _| match (kind, x) {
                (SelectorKind::Hole, Term::Hole(h)) => ids.push(h.identity.clone()),
                (SelectorKind::Abs, Term::Compound(c)) => ids.push(c.identity.clone()),
                _ => {}
            });
            pick(&ids, *index)
        }
        SelectorKind::Node => {
            // Placeholders for repetition holes are drawn as nodes too; only
            // nodes standing for elements are counted.
            let nodes: Vec<_> = s
                .scene()
                .nodes
                .iter()
                .filter(|n| s.lookup(&n.abstract_id).is_some_and(|t| t.as_hole().is_none()))
                .collect();
            pick(&nodes, *index).map(|n| if concrete { n.id.clone() } else { n.abstract_id.clone() })
        }
        SelectorKind::Click => {
            let ids: Vec<Identity> =
                s.scene().primitives.iter().filter(|p| p.selectable).filter_map(|p| p.concrete.clone()).collect();
            pick(&ids, *index)
        }
    };
    found.ok_or_else(|| format!("selector {t} matches nothing"))
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Id(id) => write!(f, "{}", projed::persist::format_identity(id)),
            Target::Select(kind, i) => {
                let name = match kind {
                    SelectorKind::Hole => "hole",
                    SelectorKind::Abs => "abs",
                    SelectorKind::Node => "node",
                    SelectorKind::Click => "click",
                };
                write!(f, "@{name}[{i}]")
            }
        }
    }
}

/// The event a step stands for, once its targets are resolved. Menu steps
/// look their label up in the menu currently offered on the target.
pub fn to_event(s: &Session, step: &Step) -> Result<Option<Event>, String> {
    Ok(Some(match step {
        Step::Key { selected, key } => {
            Event::KeyPressed { selected: selected.as_ref().map(|t| resolve(s, t, false)).transpose()?, key: *key }
        }
        Step::DoubleClick(t) => Event::DoubleClick { target: resolve(s, t, true)? },
        Step::Edge { source, target, .. } => {
            Event::EdgeDrag { source: resolve(s, source, false)?, target: resolve(s, target, false)? }
        }
        Step::Menu { target, label } => {
            let target = resolve(s, target, false)?;
            let menu = s.menu(&target).ok_or_else(|| format!("no menu on {target}"))?;
            let entry = menu.entries.into_iter().find(|e| &e.label == label).ok_or_else(|| {
                format!("menu on {target} has no `{label}`")
            })?;
            Event::MenuSelected { target, message: entry.message }
        }
        Step::Drag { target, x, y } => Event::DragNode { node: resolve(s, target, false)?, x: *x, y: *y },
        Step::Edit { target, text } => Event::EditText { target: resolve(s, target, false)?, text: text.clone() },
        Step::Snapshot(_) => return Ok(None),
    }))
}
