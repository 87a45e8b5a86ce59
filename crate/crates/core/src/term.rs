//! Identity-bearing syntax trees.
//!
//! A [`Term`] is shared by every layer of the engine: abstract syntax,
//! normal forms, patterns reified as data, and events. Compounds and holes
//! carry an [`Identity`]; atoms never do. Terms are immutable and cheap to
//! clone (children live behind `Arc`).

use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

/// Leaf payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Str(String),
    Int(i64),
    Bool(bool),
    Char(char),
}

impl Atom {
    pub fn str(s: impl Into<String>) -> Atom {
        Atom::Str(s.into())
    }

    /// Text used when the atom is displayed.
    pub fn display_text(&self) -> String {
        match self {
            Atom::Str(s) => s.clone(),
            Atom::Int(n) => n.to_string(),
            Atom::Bool(true) => "true".to_string(),
            Atom::Bool(false) => "false".to_string(),
            Atom::Char(c) => c.to_string(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Str(s) => write!(f, "{s:?}"),
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Bool(true) => f.write_str("#t"),
            Atom::Bool(false) => f.write_str("#f"),
            Atom::Char(c) => write!(f, "#\\{c}"),
        }
    }
}

/// A non-empty sequence of atoms naming a compound or hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(Vec<Atom>);

static NEXT_ID: AtomicI64 = AtomicI64::new(1);

impl Identity {
    /// Returns `None` for an empty part list.
    pub fn new(parts: Vec<Atom>) -> Option<Identity> {
        if parts.is_empty() {
            None
        } else {
            Some(Identity(parts))
        }
    }

    pub fn single(part: Atom) -> Identity {
        Identity(vec![part])
    }

    pub fn parts(&self) -> &[Atom] {
        &self.0
    }

    /// The identity as a term: a bare atom for single-part identities,
    /// `(list a1 a2 ...)` otherwise.
    pub fn reify(&self) -> Term {
        if let [only] = self.0.as_slice() {
            Term::Atom(only.clone())
        } else {
            Term::compound(
                "list",
                None,
                self.0.iter().cloned().map(Term::Atom).collect(),
            )
        }
    }

    /// Inverse of [`Identity::reify`]. Nested `list` terms are flattened.
    pub fn from_term(t: &Term) -> Option<Identity> {
        let mut parts = Vec::new();
        collect_id_parts(t, &mut parts)?;
        Identity::new(parts)
    }
}

fn collect_id_parts(t: &Term, out: &mut Vec<Atom>) -> Option<()> {
    match t {
        Term::Atom(a) => {
            out.push(a.clone());
            Some(())
        }
        Term::Compound(c) if c.functor == "list" => {
            for child in &c.children {
                collect_id_parts(child, out)?;
            }
            Some(())
        }
        _ => None,
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Coins a single-part identity never returned before in this process.
pub fn fresh_identity() -> Identity {
    Identity::single(Atom::Int(NEXT_ID.fetch_add(1, Ordering::Relaxed)))
}

/// Makes sure later fresh identities are strictly greater than `n`.
pub fn advance_identity_counter(n: i64) {
    NEXT_ID.fetch_max(n.saturating_add(1), Ordering::Relaxed);
}

/// Where a hole sits in the language definition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClauseRef {
    pub clause: String,
    /// Child indices from the clause body down to the `*` or `or` element.
    pub path: Vec<usize>,
}

impl fmt::Display for ClauseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.clause)?;
        for step in &self.path {
            write!(f, "/{step}")?;
        }
        Ok(())
    }
}

/// The kind of user choice a hole stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HoleSlot {
    /// An `or` point: replace the hole with one alternative.
    Choice(ClauseRef),
    /// A `*` point: insert repetitions before the hole.
    Repeat(ClauseRef),
    /// An editable string leaf holding its current text.
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compound {
    pub functor: String,
    pub identity: Identity,
    pub children: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hole {
    pub identity: Identity,
    pub slot: HoleSlot,
    /// `None` for a live hole in abstract syntax. The rendered view of a hole
    /// (what a `((hole i) h)` pattern binds to `h`) carries a label here and
    /// is no longer matched by `hole` patterns.
    pub display: Option<Term>,
}

impl Hole {
    pub fn text(&self) -> Option<&str> {
        match &self.slot {
            HoleSlot::Text(s) => Some(s),
            _ => None,
        }
    }

    /// The rendered form exposed as the single child of a live hole.
    pub fn rendered(&self) -> Term {
        let label = match &self.slot {
            HoleSlot::Choice(r) | HoleSlot::Repeat(r) => r.clause.clone(),
            HoleSlot::Text(s) => s.clone(),
        };
        Term::Hole(Arc::new(Hole {
            identity: self.identity.clone(),
            slot: self.slot.clone(),
            display: Some(Term::Atom(Atom::Str(label))),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Atom(Atom),
    Compound(Arc<Compound>),
    Hole(Arc<Hole>),
}

/// Child indices from a root.
pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("path {path:?} does not address a subtree (corrupted cache?)")]
pub struct InvalidPath {
    pub path: Path,
}

impl Term {
    /// Builds a compound; a fresh identity is coined when `identity` is `None`.
    pub fn compound(functor: impl Into<String>, identity: Option<Identity>, children: Vec<Term>) -> Term {
        let functor = functor.into();
        debug_assert!(!functor.is_empty(), "functor names are non-empty");
        Term::Compound(Arc::new(Compound {
            functor,
            identity: identity.unwrap_or_else(fresh_identity),
            children,
        }))
    }

    pub fn hole(identity: Option<Identity>, slot: HoleSlot) -> Term {
        Term::Hole(Arc::new(Hole {
            identity: identity.unwrap_or_else(fresh_identity),
            slot,
            display: None,
        }))
    }

    pub fn str(s: impl Into<String>) -> Term {
        Term::Atom(Atom::Str(s.into()))
    }

    pub fn int(n: i64) -> Term {
        Term::Atom(Atom::Int(n))
    }

    pub fn identity(&self) -> Option<&Identity> {
        match self {
            Term::Atom(_) => None,
            Term::Compound(c) => Some(&c.identity),
            Term::Hole(h) => Some(&h.identity),
        }
    }

    pub fn functor(&self) -> Option<&str> {
        match self {
            Term::Compound(c) => Some(&c.functor),
            _ => None,
        }
    }

    pub fn children(&self) -> &[Term] {
        match self {
            Term::Compound(c) => &c.children,
            _ => &[],
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_hole(&self) -> Option<&Hole> {
        match self {
            Term::Hole(h) => Some(h),
            _ => None,
        }
    }

    /// Same functor and identity, new children.
    pub fn with_children(&self, children: Vec<Term>) -> Term {
        match self {
            Term::Compound(c) => Term::Compound(Arc::new(Compound {
                functor: c.functor.clone(),
                identity: c.identity.clone(),
                children,
            })),
            other => other.clone(),
        }
    }

    /// Identity-blind equality.
    pub fn structurally_equal(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Compound(a), Term::Compound(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.functor == b.functor
                        && a.children.len() == b.children.len()
                        && a.children
                            .iter()
                            .zip(&b.children)
                            .all(|(x, y)| x.structurally_equal(y)))
            }
            (Term::Hole(a), Term::Hole(b)) => {
                a.slot == b.slot
                    && match (&a.display, &b.display) {
                        (None, None) => true,
                        (Some(x), Some(y)) => x.structurally_equal(y),
                        _ => false,
                    }
            }
            _ => false,
        }
    }

    /// Structure and identities both equal.
    pub fn identical(&self, other: &Term) -> bool {
        self == other
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = cur.children().get(i)?;
        }
        Some(cur)
    }

    /// First compound or hole with identity `id`, in pre-order.
    pub fn find_by_identity(&self, id: &Identity) -> Option<(&Term, Path)> {
        let mut path = Vec::new();
        self.find_rec(id, &mut path).map(|t| (t, path))
    }

    fn find_rec<'a>(&'a self, id: &Identity, path: &mut Path) -> Option<&'a Term> {
        if self.identity() == Some(id) {
            return Some(self);
        }
        for (i, child) in self.children().iter().enumerate() {
            path.push(i);
            if let Some(found) = child.find_rec(id, path) {
                return Some(found);
            }
            path.pop();
        }
        None
    }

    /// Copy of `self` with the subtree at `path` replaced. Untouched
    /// subtrees are shared, so their identities are unchanged.
    pub fn replace_at_path(&self, path: &[usize], replacement: Term) -> Result<Term, InvalidPath> {
        self.replace_rec(path, replacement).ok_or_else(|| InvalidPath { path: path.to_vec() })
    }

    fn replace_rec(&self, path: &[usize], replacement: Term) -> Option<Term> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(replacement);
        };
        let child = self.children().get(first)?;
        let new_child = child.replace_rec(rest, replacement)?;
        let mut children = self.children().to_vec();
        children[first] = new_child;
        Some(self.with_children(children))
    }

    /// Visits every node in pre-order with its path.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Term, &[usize])) {
        let mut path = Vec::new();
        self.walk_rec(&mut path, f);
    }

    fn walk_rec<'a>(&'a self, path: &mut Path, f: &mut dyn FnMut(&'a Term, &[usize])) {
        f(self, path);
        for (i, child) in self.children().iter().enumerate() {
            path.push(i);
            child.walk_rec(path, f);
            path.pop();
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }
}

impl From<Atom> for Term {
    fn from(a: Atom) -> Term {
        Term::Atom(a)
    }
}

/// S-expression rendering without identities, e.g. `(gene (a) "x" ?)`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(a) => write!(f, "{a}"),
            Term::Compound(c) => {
                write!(f, "({}", c.functor)?;
                for child in &c.children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
            Term::Hole(h) => match &h.slot {
                HoleSlot::Text(s) => write!(f, "?{s:?}"),
                HoleSlot::Choice(r) => write!(f, "?or:{r}"),
                HoleSlot::Repeat(r) => write!(f, "?*:{r}"),
            },
        }
    }
}
