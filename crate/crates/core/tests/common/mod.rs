#![allow(dead_code)]

pub mod lambda_oracle;
pub mod props;

use std::sync::Arc;

use projed::langdef::{complete_repetitions, load_language, term_from_sexpr};
use projed::rewrite::Fuel;
use projed::scene::{LayoutCache, Viewport};
use projed::sexpr::read_sexpr;
use projed::session::{Event, Key, Outcome, Session};
use projed::term::{Atom, Identity, Term};

pub fn parse(src: &str) -> Term {
    term_from_sexpr(&read_sexpr(src).unwrap()[0]).unwrap()
}

/// A session over `lang`, optionally seeded with a hand-written tree.
pub fn session(lang: &str, start: &str, tree: Option<&str>) -> Session {
    let def = Arc::new(load_language(lang).unwrap());
    let tree = tree.map(|t| complete_repetitions(&def, start, &parse(t)).unwrap());
    Session::with_options(def, start, tree, LayoutCache::default(), Fuel::default(), Viewport::default()).unwrap()
}

/// Hole identities in pre-order.
pub fn holes(t: &Term) -> Vec<Identity> {
    let mut v = Vec::new();
    t.walk(&mut |x, _| {
        if let Some(h) = x.as_hole() {
            v.push(h.identity.clone())
        }
    });
    v
}

/// Concrete identity `(tag, id...)` as built by `((box tag i) ...)`.
pub fn tagged(tag: &str, id: &Identity) -> Identity {
    let mut parts = vec![Atom::str(tag)];
    parts.extend(id.parts().iter().cloned());
    Identity::new(parts).unwrap()
}

pub fn press(s: &mut Session, key: &str) -> Outcome {
    s.dispatch(Event::KeyPressed { selected: None, key: Key::parse(key).unwrap() })
}

/// Identities of the non-hole children of `t`.
pub fn element_ids(t: &Term) -> Vec<Identity> {
    t.children().iter().filter(|c| c.as_hole().is_none()).filter_map(|c| c.identity().cloned()).collect()
}

/// The session's scene with identities coined during reduction cleared;
/// identities that name abstract elements are kept.
pub fn stable_scene(s: &Session) -> projed::scene::Scene {
    let mut scene = s.scene().clone();
    for p in &mut scene.primitives {
        if p.concrete.as_ref().is_some_and(|c| s.lookup(c).is_none()) {
            p.concrete = None;
        }
    }
    scene
}
