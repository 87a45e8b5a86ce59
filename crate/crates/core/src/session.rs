//! The editor loop: abstract tree, caches, hole menus and event dispatch.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::langdef::{instantiate_clause, instantiate_element, GElement, InstantiateError, LanguageDef};
use crate::rewrite::{reduce, transform, Fuel, RewriteError, Status};
use crate::scene::{layout, LayoutCache, Menu, MenuEntry, NotNormalForm, PrimKind, Scene, Viewport};
use crate::term::{Atom, ClauseRef, HoleSlot, Identity, Path, Term};

/// Keys with names rather than characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedKey {
    Up,
    Down,
    Left,
    Right,
    Enter,
    Backspace,
}

impl NamedKey {
    pub const ALL: [NamedKey; 6] =
        [NamedKey::Up, NamedKey::Down, NamedKey::Left, NamedKey::Right, NamedKey::Enter, NamedKey::Backspace];

    pub fn name(self) -> &'static str {
        match self {
            NamedKey::Up => "up",
            NamedKey::Down => "down",
            NamedKey::Left => "left",
            NamedKey::Right => "right",
            NamedKey::Enter => "enter",
            NamedKey::Backspace => "backspace",
        }
    }

    pub fn from_name(s: &str) -> Option<NamedKey> {
        NamedKey::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Key {
    Char(char),
    Named(NamedKey),
}

impl Key {
    /// A single character, or one of the key names.
    pub fn parse(s: &str) -> Option<Key> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Some(Key::Char(c)),
            _ => NamedKey::from_name(s).map(Key::Named),
        }
    }

    /// Characters become character atoms, named keys strings.
    pub fn reify(self) -> Term {
        match self {
            Key::Char(c) => Term::Atom(Atom::Char(c)),
            Key::Named(k) => Term::Atom(Atom::str(k.name())),
        }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Char(c) => write!(f, "{c}"),
            Key::Named(k) => f.write_str(k.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    KeyPressed { selected: Option<Identity>, key: Key },
    DoubleClick { target: Identity },
    NewEdge { edge_type: Term, source: Identity, target: Identity },
    MenuSelected { target: Identity, message: Term },
    DragNode { node: Identity, x: f64, y: f64 },
    EditText { target: Identity, text: String },
    EdgeDrag { source: Identity, target: Identity },
}

/// Message carried by hole menu entries.
pub fn hole_choice_message(label: &str) -> Term {
    // A fixed identity keeps scenes equal across refreshes.
    let id = Identity::new(vec![Atom::str("hole-choice"), Atom::str(label)]);
    Term::compound("hole-choice", id, vec![Term::str(label)])
}

fn hole_choice_label(message: &Term) -> Option<&str> {
    match (message.functor(), message.children()) {
        (Some("hole-choice"), [Term::Atom(Atom::Str(s))]) => Some(s),
        _ => None,
    }
}

pub const DELETE_LABEL: &str = "delete";
pub const EDIT_LABEL: &str = "edit";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("unknown start clause `{0}`")]
    UnknownClause(String),
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("{0} is not a hole")]
    NotAHole(Identity),
    #[error("`{label}` is not an option here (options: {})", options.join(", "))]
    InvalidChoice { label: String, options: Vec<String> },
    #[error("{0} is not editable text")]
    NotEditable(Identity),
    #[error("{0} is not a graph node")]
    NotANode(Identity),
    #[error("the language definition has no element at {0}")]
    BadClauseRef(ClauseRef),
}

impl From<NotNormalForm> for SessionError {
    fn from(e: NotNormalForm) -> SessionError {
        SessionError::Rewrite(RewriteError::NotNormalForm(e))
    }
}

impl SessionError {
    pub fn is_fuel(&self) -> bool {
        matches!(self, SessionError::Rewrite(RewriteError::FuelExhausted { .. }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Applied,
    /// Nothing changed; the reason says why.
    Dropped(String),
    /// The user has to choose from this menu first.
    MenuPending(Menu),
    /// The previous state was kept.
    Failed(SessionError),
}

#[derive(Debug, Clone)]
pub struct Session {
    def: Arc<LanguageDef>,
    start: String,
    abstract_tree: Term,
    abstract_cache: HashMap<Identity, Path>,
    layout_cache: LayoutCache,
    fuel: Fuel,
    viewport: Viewport,
    nf: Term,
    scene: Scene,
    pending_edge: Option<(Identity, Menu)>,
    diagnostics: Vec<SessionError>,
    revision: u64,
}

impl Session {
    /// Starts from a fresh instance of `start`.
    pub fn new(def: Arc<LanguageDef>, start: &str) -> Result<Session, SessionError> {
        Session::with_options(def, start, None, LayoutCache::default(), Fuel::default(), Viewport::default())
    }

    /// Starts from `tree` when given, else from a fresh instance of `start`.
    pub fn with_options(
        def: Arc<LanguageDef>,
        start: &str,
        tree: Option<Term>,
        layout_cache: LayoutCache,
        fuel: Fuel,
        viewport: Viewport,
    ) -> Result<Session, SessionError> {
        if def.clause(start).is_none() {
            return Err(SessionError::UnknownClause(start.to_string()));
        }
        let abstract_tree = match tree {
            Some(t) => t,
            None => instantiate_clause(&def, start)?,
        };
        let mut s = Session {
            def,
            start: start.to_string(),
            abstract_tree,
            abstract_cache: HashMap::new(),
            layout_cache,
            fuel,
            viewport,
            nf: Term::compound("seq", None, Vec::new()),
            scene: Scene::default(),
            pending_edge: None,
            diagnostics: Vec::new(),
            revision: 0,
        };
        s.refresh()?;
        Ok(s)
    }

    pub fn language(&self) -> &LanguageDef {
        &self.def
    }

    pub fn language_arc(&self) -> Arc<LanguageDef> {
        Arc::clone(&self.def)
    }

    pub fn start_clause(&self) -> &str {
        &self.start
    }

    pub fn abstract_tree(&self) -> &Term {
        &self.abstract_tree
    }

    /// The reduced tree behind the current scene.
    pub fn normal_form(&self) -> &Term {
        &self.nf
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn layout_cache(&self) -> &LayoutCache {
        &self.layout_cache
    }

    pub fn fuel(&self) -> Fuel {
        self.fuel
    }

    pub fn viewport(&self) -> Viewport {
        self.viewport
    }

    /// Bumped every time the scene is recomputed.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn diagnostics(&self) -> &[SessionError] {
        &self.diagnostics
    }

    pub fn pending_menu(&self) -> Option<&Menu> {
        self.pending_edge.as_ref().map(|(_, m)| m)
    }

    /// Node whose edge drag published the pending menu.
    pub fn pending_menu_source(&self) -> Option<&Identity> {
        self.pending_edge.as_ref().map(|(id, _)| id)
    }

    pub fn path_of(&self, id: &Identity) -> Option<&Path> {
        self.abstract_cache.get(id)
    }

    pub fn lookup(&self, id: &Identity) -> Option<&Term> {
        self.abstract_tree.subterm(self.abstract_cache.get(id)?)
    }

    /// Pre-order walk recording the first path of every identity.
    pub fn rebuild_abstract_cache(&mut self) {
        let mut cache = HashMap::new();
        self.abstract_tree.walk(&mut |t, path| {
            if let Some(id) = t.identity() {
                cache.entry(id.clone()).or_insert_with(|| path.to_vec());
            }
        });
        self.abstract_cache = cache;
    }

    /// Reduces the abstract tree and lays out the result.
    fn refresh(&mut self) -> Result<(), SessionError> {
        self.rebuild_abstract_cache();
        let nf_term = reduce(&self.def, &self.abstract_tree, self.fuel)?;
        let nf = crate::scene::validate_nf(&nf_term)?;
        let out = layout(&nf, &self.layout_cache, self.viewport);
        for (id, pos) in out.placements {
            self.layout_cache.positions.insert(id, pos);
        }
        self.nf = nf_term;
        self.scene = out.scene;
        self.attach_hole_menus();
        self.revision += 1;
        Ok(())
    }

    /// Lays out the current normal form again (after a cache change).
    fn relayout(&mut self) {
        let nf = crate::scene::validate_nf(&self.nf).expect("normal form was validated when stored");
        let out = layout(&nf, &self.layout_cache, self.viewport);
        for (id, pos) in out.placements {
            self.layout_cache.positions.insert(id, pos);
        }
        self.scene = out.scene;
        self.attach_hole_menus();
        self.revision += 1;
    }

    /// Gives every hole primitive on screen its choice menu.
    fn attach_hole_menus(&mut self) {
        let mut scene = std::mem::take(&mut self.scene);
        for p in &mut scene.primitives {
            if let (PrimKind::Hole { .. }, Some(id)) = (&p.kind, &p.concrete) {
                p.menu = self.hole_options(id).ok();
            }
        }
        self.scene = scene;
    }

    /// Whether a cached position still belongs to something: its node is on
    /// screen, or one of its identity parts names an abstract element.
    pub fn position_is_live(&self, id: &Identity) -> bool {
        self.scene.node(id).is_some() || id.parts().iter().any(|p| self.abstract_cache.contains_key(&Identity::single(p.clone())))
    }

    /// Drops cached positions that no longer belong to anything.
    pub fn prune_layout_cache(&mut self) {
        let mut cache = std::mem::take(&mut self.layout_cache);
        cache.positions.retain(|id, _| self.position_is_live(id));
        cache.waypoints.retain(|id, _| self.position_is_live(id));
        self.layout_cache = cache;
        self.relayout();
    }

    fn hole(&self, id: &Identity) -> Result<&crate::term::Hole, SessionError> {
        self.lookup(id).and_then(Term::as_hole).ok_or_else(|| SessionError::NotAHole(id.clone()))
    }

    /// The menu offered on a hole.
    pub fn hole_options(&self, hole: &Identity) -> Result<Menu, SessionError> {
        let labels: Vec<String> = self.choices(hole)?.into_iter().map(|c| c.label).collect();
        Ok(Menu {
            entries: labels.into_iter().map(|l| MenuEntry { message: hole_choice_message(&l), label: l }).collect(),
        })
    }

    /// The menu for `target`: its hole options, a pending edge choice, or
    /// the custom menu of the primitive with that identity.
    pub fn menu(&self, target: &Identity) -> Option<Menu> {
        if let Ok(m) = self.hole_options(target) {
            return Some(m);
        }
        if let Some((src, m)) = &self.pending_edge {
            if src == target {
                return Some(m.clone());
            }
        }
        self.scene.primitive(target).and_then(|p| p.menu.clone())
    }

    fn choices(&self, hole: &Identity) -> Result<Vec<Choice>, SessionError> {
        let h = self.hole(hole)?;
        let def = &self.def;
        let resolve = |r: &ClauseRef| def.resolve(r).ok_or_else(|| SessionError::BadClauseRef(r.clone()));
        let mut out = Vec::new();
        match &h.slot {
            HoleSlot::Text(_) => out.push(Choice { label: EDIT_LABEL.into(), action: ChoiceAction::Edit }),
            HoleSlot::Choice(r) => {
                let GElement::Or(alts) = resolve(r)? else { return Err(SessionError::BadClauseRef(r.clone())) };
                for (i, alt) in alts.iter().enumerate() {
                    let at = ClauseRef { clause: r.clause.clone(), path: child_path(&r.path, i) };
                    out.push(Choice { label: alt.label(), action: ChoiceAction::Replace(alt.clone(), at) });
                }
            }
            HoleSlot::Repeat(r) => {
                let GElement::Star(items) = resolve(r)? else { return Err(SessionError::BadClauseRef(r.clone())) };
                for (i, item) in items.iter().enumerate() {
                    let at = ClauseRef { clause: r.clause.clone(), path: child_path(&r.path, i) };
                    let (target, target_at) = self.deref(item, &at);
                    match target {
                        GElement::Or(alts) => {
                            for (j, alt) in alts.iter().enumerate() {
                                let alt_at = ClauseRef { clause: target_at.clause.clone(), path: child_path(&target_at.path, j) };
                                out.push(Choice { label: alt.label(), action: ChoiceAction::Insert(alt.clone(), alt_at) });
                            }
                        }
                        _ => out.push(Choice { label: item.label(), action: ChoiceAction::Insert(item.clone(), at) }),
                    }
                }
                if self.repetitions_before(hole)? > 0 {
                    out.push(Choice { label: DELETE_LABEL.into(), action: ChoiceAction::DeletePrevious });
                }
            }
        }
        Ok(out)
    }

    /// Follows clause references, tracking where the final element lives.
    fn deref<'a>(&'a self, e: &'a GElement, at: &ClauseRef) -> (&'a GElement, ClauseRef) {
        let mut cur = e;
        let mut cur_at = at.clone();
        let mut seen: Vec<&str> = Vec::new();
        while let GElement::ClauseRef(name) = cur {
            if seen.contains(&name.as_str()) {
                break;
            }
            seen.push(name);
            match self.def.clause(name) {
                Some(c) => {
                    cur = &c.body;
                    cur_at = ClauseRef { clause: name.clone(), path: Vec::new() };
                }
                None => break,
            }
        }
        (cur, cur_at)
    }

    /// How many elements the repetition ending at `hole` currently has.
    fn repetitions_before(&self, hole: &Identity) -> Result<usize, SessionError> {
        let h = self.hole(hole)?;
        let path = &self.abstract_cache[hole];
        let Some((&k, parent_path)) = path.split_last() else { return Ok(0) };
        let parent = self.abstract_tree.subterm(parent_path).expect("cached path");
        let siblings = parent.children();
        let after_prev_star = siblings[..k]
            .iter()
            .rposition(|t| matches!(t.as_hole(), Some(h) if matches!(h.slot, HoleSlot::Repeat(_))))
            .map(|p| p + 1);
        let star_index = match &h.slot {
            HoleSlot::Repeat(r) => r.path.last().copied().unwrap_or(0),
            _ => k,
        };
        let start = after_prev_star.unwrap_or(star_index).min(k);
        Ok(k - start)
    }

    /// Applies a hole menu choice.
    pub fn expand_hole(&mut self, hole: &Identity, label: &str) -> Result<(), SessionError> {
        let choices = self.choices(hole)?;
        let Some(choice) = choices.iter().find(|c| c.label == label) else {
            return Err(SessionError::InvalidChoice {
                label: label.to_string(),
                options: choices.iter().map(|c| c.label.clone()).collect(),
            });
        };
        let path = self.abstract_cache[hole].clone();
        let tree = match &choice.action {
            ChoiceAction::Edit => return Ok(()),
            ChoiceAction::Replace(e, at) => {
                let new = instantiate_element(&self.def, e, at)?;
                self.abstract_tree.replace_at_path(&path, new).expect("cached path")
            }
            ChoiceAction::Insert(e, at) => {
                let new = instantiate_element(&self.def, e, at)?;
                self.splice_siblings(&path, |kids, k| kids.insert(k, new))
            }
            ChoiceAction::DeletePrevious => self.splice_siblings(&path, |kids, k| {
                kids.remove(k - 1);
            }),
        };
        self.commit(tree)
    }

    fn splice_siblings(&self, path: &[usize], f: impl FnOnce(&mut Vec<Term>, usize)) -> Term {
        let (&k, parent_path) = path.split_last().expect("repetition holes have a parent");
        let parent = self.abstract_tree.subterm(parent_path).expect("cached path");
        let mut kids = parent.children().to_vec();
        f(&mut kids, k);
        self.abstract_tree.replace_at_path(parent_path, parent.with_children(kids)).expect("cached path")
    }

    fn commit(&mut self, tree: Term) -> Result<(), SessionError> {
        let saved = self.abstract_tree.clone();
        self.abstract_tree = tree;
        if let Err(e) = self.refresh() {
            self.abstract_tree = saved;
            self.rebuild_abstract_cache();
            return Err(e);
        }
        Ok(())
    }

    /// The text hole behind `target`, which may be the hole itself or a
    /// primitive editing it.
    fn text_target(&self, target: &Identity) -> Option<Identity> {
        if matches!(self.lookup(target).and_then(Term::as_hole), Some(h) if h.text().is_some()) {
            return Some(target.clone());
        }
        let via = self.scene.primitive(target)?.edit_target.clone()?;
        self.lookup(&via).and_then(Term::as_hole).and_then(|h| h.text()).map(|_| via)
    }

    /// Replaces the text of an editable hole. No transform rules run.
    pub fn edit_string(&mut self, target: &Identity, text: &str) -> Result<(), SessionError> {
        let hole = self.text_target(target).ok_or_else(|| SessionError::NotEditable(target.clone()))?;
        let path = self.abstract_cache[&hole].clone();
        let new = Term::hole(Some(hole), HoleSlot::Text(text.to_string()));
        let tree = self.abstract_tree.replace_at_path(&path, new).expect("cached path");
        self.commit(tree)
    }

    /// Edge types the current graph allows from `source` to `target`.
    pub fn allowed_edge_types(&self, source: &Identity, target: &Identity) -> Result<Vec<Term>, SessionError> {
        let s = self.scene.node(source).ok_or_else(|| SessionError::NotANode(source.clone()))?;
        let t = self.scene.node(target).ok_or_else(|| SessionError::NotANode(target.clone()))?;
        let types = self.scene.graphs.get(s.graph).map(Vec::as_slice).unwrap_or_default();
        Ok(types
            .iter()
            .filter(|e| e.source == s.node_type && e.target == t.node_type)
            .map(|e| Term::compound(e.name.clone(), None, Vec::new()))
            .collect())
    }

    /// Runs one event through the loop. On failure the previous state is
    /// kept and the error is also recorded in [`Session::diagnostics`].
    pub fn dispatch(&mut self, event: Event) -> Outcome {
        let saved = self.clone();
        let pending = self.pending_edge.take();
        match self.dispatch_inner(event, pending) {
            Ok(outcome) => outcome,
            Err(e) => {
                let mut diagnostics = std::mem::take(&mut self.diagnostics);
                *self = saved;
                diagnostics.push(e.clone());
                self.diagnostics = diagnostics;
                Outcome::Failed(e)
            }
        }
    }

    fn dispatch_inner(&mut self, event: Event, pending: Option<(Identity, Menu)>) -> Result<Outcome, SessionError> {
        match event {
            Event::KeyPressed { selected, key } => {
                if let Some(sel) = &selected {
                    if let Some(outcome) = self.key_on_hole(sel, key)? {
                        return Ok(outcome);
                    }
                }
                let sel = match &selected {
                    Some(id) => self.event_identity(id).reify(),
                    None => Term::int(-1),
                };
                self.send(Term::compound("key-pressed", None, vec![sel, key.reify()]))
            }
            Event::DoubleClick { target } => self.send(Term::compound("double-click", None, vec![target.reify()])),
            Event::NewEdge { edge_type, source, target } => {
                self.send(Term::compound("new-edge", None, vec![edge_type, source.reify(), target.reify()]))
            }
            Event::MenuSelected { target, message } => {
                if let Some(label) = hole_choice_label(&message) {
                    if self.hole(&target).is_ok() {
                        self.expand_hole(&target, label)?;
                        return Ok(Outcome::Applied);
                    }
                }
                if let Some((src, menu)) = &pending {
                    if src == &target {
                        if let Some(entry) = menu.entries.iter().find(|e| e.message.structurally_equal(&message)) {
                            return self.send(entry.message.clone());
                        }
                    }
                }
                self.send(message)
            }
            Event::DragNode { node, x, y } => {
                let Some(n) = self.scene.node(&node) else {
                    return Ok(Outcome::Dropped(format!("{node} is not a graph node on screen")));
                };
                self.layout_cache.positions.insert(n.id.clone(), (x, y));
                self.relayout();
                Ok(Outcome::Applied)
            }
            Event::EditText { target, text } => {
                self.edit_string(&target, &text)?;
                Ok(Outcome::Applied)
            }
            Event::EdgeDrag { source, target } => {
                let types = self.allowed_edge_types(&source, &target)?;
                let src = self.scene.node(&source).expect("checked").abstract_id.clone();
                let tgt = self.scene.node(&target).expect("checked").abstract_id.clone();
                match types.len() {
                    0 => Ok(Outcome::Dropped("no edge type connects these nodes".into())),
                    1 => {
                        let t = types.into_iter().next().expect("one type");
                        self.dispatch_inner(Event::NewEdge { edge_type: t, source: src, target: tgt }, None)
                    }
                    _ => {
                        let menu = Menu {
                            entries: types
                                .into_iter()
                                .map(|t| MenuEntry {
                                    label: t.functor().unwrap_or_default().to_string(),
                                    message: Term::compound("new-edge", None, vec![t, src.reify(), tgt.reify()]),
                                })
                                .collect(),
                        };
                        self.pending_edge = Some((source, menu.clone()));
                        Ok(Outcome::MenuPending(menu))
                    }
                }
            }
        }
    }

    /// Key presses aimed at a selected hole: typing into text holes and
    /// first-letter shortcuts on choice and repetition holes.
    fn key_on_hole(&mut self, sel: &Identity, key: Key) -> Result<Option<Outcome>, SessionError> {
        if let Some(hole) = self.text_target(sel) {
            let current = self.hole(&hole)?.text().unwrap_or_default().to_string();
            let edited = match key {
                Key::Char(c) if !c.is_control() => format!("{current}{c}"),
                Key::Named(NamedKey::Backspace) => {
                    let mut s = current;
                    s.pop();
                    s
                }
                _ => return Ok(None),
            };
            self.edit_string(&hole, &edited)?;
            return Ok(Some(Outcome::Applied));
        }
        let Key::Char(c) = key else { return Ok(None) };
        if self.hole(sel).is_err() {
            return Ok(None);
        }
        let labels: Vec<String> = self
            .choices(sel)?
            .into_iter()
            .map(|ch| ch.label)
            .filter(|l| l != DELETE_LABEL && l.starts_with(c))
            .collect();
        match labels.as_slice() {
            [only] => {
                let only = only.clone();
                self.expand_hole(sel, &only)?;
                Ok(Some(Outcome::Applied))
            }
            _ => Ok(None),
        }
    }

    /// The abstract identity behind a selected primitive.
    fn event_identity(&self, id: &Identity) -> Identity {
        self.scene.primitive(id).and_then(|p| p.event_identity()).cloned().unwrap_or_else(|| id.clone())
    }

    /// Wraps `event` in `send`, transforms, and installs the result.
    fn send(&mut self, event: Term) -> Result<Outcome, SessionError> {
        let wrapped = Term::compound("send", None, vec![self.abstract_tree.clone(), event]);
        let out = transform(&self.def, &wrapped, self.fuel)?;
        if out.status == Status::FuelExhausted {
            return Err(RewriteError::FuelExhausted { steps: out.steps_used, last: out.result }.into());
        }
        let (tree, consumed) = match out.result.functor() {
            Some("send") if !out.result.children().is_empty() => (out.result.children()[0].clone(), false),
            _ => (out.result, true),
        };
        if !consumed {
            // Discarded events leave the session, and its revision, alone.
            return Ok(Outcome::Dropped("no rule handled the event".into()));
        }
        self.commit(tree)?;
        Ok(Outcome::Applied)
    }
}

#[derive(Debug, Clone)]
struct Choice {
    label: String,
    action: ChoiceAction,
}

#[derive(Debug, Clone)]
enum ChoiceAction {
    Edit,
    Replace(GElement, ClauseRef),
    Insert(GElement, ClauseRef),
    DeletePrevious,
}

fn child_path(p: &[usize], i: usize) -> Vec<usize> {
    let mut v = p.to_vec();
    v.push(i);
    v
}
