//! Pattern matching over terms and evaluation of rule bodies.
//!
//! Matching backtracks fully: sequence patterns try splits in the order
//! produced by [`enumerate_splits`], and a later failure anywhere in the
//! enclosing pattern moves on to the next split. The first complete match
//! wins.

mod eval;
mod splits;

pub use eval::{apply_local, eval_case, eval_expr, EvalError};
pub use splits::{enumerate_splits, Slot, Splits};

use std::collections::BTreeMap;
use std::fmt;

use crate::langdef::Pattern;
use crate::term::{Atom, HoleSlot, Term};

/// A variable's value: one term, or one binding per ellipsis repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Single(Term),
    Multi(Vec<Binding>),
}

impl Binding {
    pub fn depth(&self) -> usize {
        match self {
            Binding::Single(_) => 0,
            Binding::Multi(items) => 1 + items.first().map_or(0, Binding::depth),
        }
    }

    pub fn as_single(&self) -> Option<&Term> {
        match self {
            Binding::Single(t) => Some(t),
            Binding::Multi(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    bindings: BTreeMap<String, Binding>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn bind(&mut self, name: impl Into<String>, b: Binding) {
        self.bindings.insert(name.into(), b);
    }

    pub fn single(&self, name: &str) -> Option<&Term> {
        self.get(name).and_then(Binding::as_single)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Binding)> {
        self.bindings.iter()
    }
}

/// Extends `env` so that `p` matches `t`; `None` on failure.
pub fn match_pattern(p: &Pattern, t: &Term, env: &Env) -> Option<Env> {
    let mut found = None;
    match_one(p, t, env.clone(), &mut |e| {
        found = Some(e);
        true
    });
    found
}

/// Matches a pattern sequence (which may contain segments) against terms.
pub fn match_sequence(ps: &[Pattern], ts: &[Term], env: &Env) -> Option<Env> {
    let mut found = None;
    match_seq(ps, ts, env.clone(), &mut |e| {
        found = Some(e);
        true
    });
    found
}

/// Success continuation; returns `true` to accept and stop searching.
type Cont<'a> = dyn FnMut(Env) -> bool + 'a;

fn match_one(p: &Pattern, t: &Term, mut env: Env, k: &mut Cont<'_>) -> bool {
    match p {
        Pattern::Wildcard => k(env),
        Pattern::Var(name) => match env.get(name) {
            Some(Binding::Single(prev)) => prev.structurally_equal(t) && k(env),
            Some(Binding::Multi(_)) => false,
            None => {
                env.bind(name.clone(), Binding::Single(t.clone()));
                k(env)
            }
        },
        Pattern::Literal(a) => literal_matches(a, t) && k(env),
        Pattern::Comp { functor, id, children } => match t {
            Term::Compound(c) if &c.functor == functor => match id {
                None => match_seq(children, &c.children, env, k),
                Some(ids) => {
                    let children = children.as_slice();
                    let kids = c.children.as_slice();
                    match_identity(ids, t, env, &mut |e| match_seq(children, kids, e, k))
                }
            },
            Term::Hole(h) if functor == "hole" && h.display.is_none() => {
                let view = [h.rendered()];
                match id {
                    None => match_seq(children, &view, env, k),
                    Some(ids) => {
                        let children = children.as_slice();
                        match_identity(ids, t, env, &mut |e| match_seq(children, &view, e, k))
                    }
                }
            }
            _ => false,
        },
        // A segment outside a sequence matches like its element.
        Pattern::Segment(inner) => match_one(inner, t, env, k),
    }
}

fn literal_matches(a: &Atom, t: &Term) -> bool {
    match (a, t) {
        (_, Term::Atom(b)) => a == b,
        (Atom::Str(s), Term::Hole(h)) => matches!(&h.slot, HoleSlot::Text(x) if x == s),
        _ => false,
    }
}

fn match_identity(ids: &[Pattern], t: &Term, env: Env, k: &mut Cont<'_>) -> bool {
    let Some(identity) = t.identity() else { return false };
    match ids {
        // A lone identity pattern sees the whole identity, reified.
        [single] if !matches!(single, Pattern::Segment(_)) => match_one(single, &identity.reify(), env, k),
        _ => {
            let parts: Vec<Term> = identity.parts().iter().cloned().map(Term::Atom).collect();
            match_seq(ids, &parts, env, k)
        }
    }
}

fn shape_of(ps: &[Pattern]) -> Vec<Slot> {
    ps.iter()
        .map(|p| if matches!(p, Pattern::Segment(_)) { Slot::Ellipsis } else { Slot::Fixed })
        .collect()
}

fn match_seq(ps: &[Pattern], ts: &[Term], env: Env, k: &mut Cont<'_>) -> bool {
    if !ps.iter().any(|p| matches!(p, Pattern::Segment(_))) {
        return ps.len() == ts.len() && match_slots(ps, ts, &[], env, k);
    }
    for ranges in enumerate_splits(ts.len(), &shape_of(ps)) {
        if match_slots(ps, ts, &ranges, env.clone(), k) {
            return true;
        }
    }
    false
}

/// Matches slot `0` of `ps` against its range, then the rest. An empty
/// `ranges` means the one-to-one layout.
fn match_slots(ps: &[Pattern], ts: &[Term], ranges: &[std::ops::Range<usize>], env: Env, k: &mut Cont<'_>) -> bool {
    let Some((p, rest)) = ps.split_first() else {
        return k(env);
    };
    let (range, rest_ranges) = match ranges.split_first() {
        Some((r, rr)) => (r.clone(), rr),
        None => (0..1, &[][..]),
    };
    let (here, rest_ts) = if ranges.is_empty() {
        (&ts[..1], &ts[1..])
    } else {
        (&ts[range.clone()], ts)
    };
    let mut next = |e: Env| match_slots(rest, rest_ts, rest_ranges, e, k);
    match p {
        Pattern::Segment(inner) => {
            let fresh: Vec<String> = inner.variables().into_iter().filter(|v| env.get(v).is_none()).collect();
            match_run(inner, here, &fresh, env, Vec::new(), &mut next)
        }
        _ => match_one(p, &here[0], env, &mut next),
    }
}

/// Matches every term of a segment run against `inner`, collecting the
/// per-element bindings of the variables first bound inside the segment.
fn match_run(inner: &Pattern, run: &[Term], fresh: &[String], env: Env, acc: Vec<Env>, k: &mut Cont<'_>) -> bool {
    let Some((first, rest)) = run.split_first() else {
        let mut env = env;
        for v in fresh {
            let items = acc
                .iter()
                .map(|e| e.get(v).cloned().unwrap_or(Binding::Multi(Vec::new())))
                .collect();
            env.bind(v.clone(), Binding::Multi(items));
        }
        return k(env);
    };
    match_one(inner, first, env.clone(), &mut |element_env: Env| {
        // Keep outer bindings fixed; element-local ones go into `acc`.
        let mut acc = acc.clone();
        acc.push(element_env);
        match_run(inner, rest, fresh, env.clone(), acc, k)
    })
}

/// Why a pattern failed to match, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchFailure {
    pub reason: FailureReason,
    pub pattern: String,
    pub term: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    FunctorMismatch,
    Arity,
    Literal,
    NonlinearInequality,
    NoSplit,
}

impl fmt::Display for MatchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match self.reason {
            FailureReason::FunctorMismatch => "functor mismatch",
            FailureReason::Arity => "arity mismatch",
            FailureReason::Literal => "literal mismatch",
            FailureReason::NonlinearInequality => "repeated variable bound to unequal values",
            FailureReason::NoSplit => "no ellipsis split matches",
        };
        write!(f, "{why}: pattern {} against {}", self.pattern, self.term)
    }
}

/// Explains a failed match by locating the first point of disagreement.
/// Returns `None` if the pattern actually matches.
pub fn explain_failure(p: &Pattern, t: &Term, env: &Env) -> Option<MatchFailure> {
    if match_pattern(p, t, env).is_some() {
        return None;
    }
    let fail = |reason| Some(MatchFailure { reason, pattern: pattern_text(p), term: t.to_string() });
    match p {
        Pattern::Wildcard => None,
        Pattern::Var(_) => fail(FailureReason::NonlinearInequality),
        Pattern::Literal(_) => fail(FailureReason::Literal),
        Pattern::Segment(inner) => explain_failure(inner, t, env),
        Pattern::Comp { functor, children, .. } => {
            let kids: Vec<Term> = match t {
                Term::Compound(c) if &c.functor == functor => c.children.clone(),
                Term::Hole(h) if functor == "hole" && h.display.is_none() => vec![h.rendered()],
                _ => return fail(FailureReason::FunctorMismatch),
            };
            let has_segments = children.iter().any(|c| matches!(c, Pattern::Segment(_)));
            if has_segments {
                return fail(FailureReason::NoSplit);
            }
            if children.len() != kids.len() {
                return fail(FailureReason::Arity);
            }
            let mut env = env.clone();
            for (cp, ct) in children.iter().zip(&kids) {
                match match_pattern(cp, ct, &env) {
                    Some(e) => env = e,
                    None => return explain_failure(cp, ct, &env).or_else(|| fail(FailureReason::NonlinearInequality)),
                }
            }
            fail(FailureReason::NonlinearInequality)
        }
    }
}

pub(crate) fn pattern_text(p: &Pattern) -> String {
    match p {
        Pattern::Var(v) => v.clone(),
        Pattern::Wildcard => "_".into(),
        Pattern::Literal(a) => a.to_string(),
        Pattern::Segment(inner) => format!("{} ...", pattern_text(inner)),
        Pattern::Comp { functor, id, children } => {
            let head = match id {
                None => functor.clone(),
                Some(ids) => {
                    let ids: Vec<String> = ids.iter().map(pattern_text).collect();
                    format!("({functor} {})", ids.join(" "))
                }
            };
            let mut s = format!("({head}");
            for c in children {
                s.push(' ');
                s.push_str(&pattern_text(c));
            }
            s.push(')');
            s
        }
    }
}
