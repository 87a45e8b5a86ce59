use super::{GElement, LanguageDef};
use crate::term::{Atom, ClauseRef, HoleSlot, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstantiateError {
    #[error("unknown clause `{0}`")]
    UnknownClause(String),
    #[error("clause `{0}` cannot be instantiated: it reaches itself without passing a `*` or `or`")]
    NonInstantiable(String),
}

/// Builds the starting tree for `clause`: fixed structure is created
/// eagerly, every `*`, `or` and `str` position becomes a hole.
pub fn instantiate_clause(def: &LanguageDef, clause: &str) -> Result<Term, InstantiateError> {
    let mut stack = Vec::new();
    let mut out = Vec::new();
    enter_clause(def, clause, &mut stack, &mut out)?;
    Ok(single(out))
}

/// Instantiates one element found at `at` (used when a hole is expanded).
pub fn instantiate_element(def: &LanguageDef, element: &GElement, at: &ClauseRef) -> Result<Term, InstantiateError> {
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut path = at.path.clone();
    build(def, element, &at.clause, &mut path, &mut stack, &mut out)?;
    Ok(single(out))
}

fn single(mut items: Vec<Term>) -> Term {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        // Only reachable for a bare `*` at top level, which yields its hole.
        Term::compound("seq", None, items)
    }
}

fn enter_clause(def: &LanguageDef, name: &str, stack: &mut Vec<String>, out: &mut Vec<Term>) -> Result<(), InstantiateError> {
    let clause = def.clause(name).ok_or_else(|| InstantiateError::UnknownClause(name.to_string()))?;
    if stack.iter().any(|s| s == name) {
        return Err(InstantiateError::NonInstantiable(name.to_string()));
    }
    stack.push(name.to_string());
    let mut path = Vec::new();
    build(def, &clause.body, name, &mut path, stack, out)?;
    stack.pop();
    Ok(())
}

fn build(
    def: &LanguageDef,
    e: &GElement,
    clause: &str,
    path: &mut Vec<usize>,
    stack: &mut Vec<String>,
    out: &mut Vec<Term>,
) -> Result<(), InstantiateError> {
    let here = || ClauseRef { clause: clause.to_string(), path: path.clone() };
    match e {
        GElement::ClauseRef(name) => enter_clause(def, name, stack, out),
        GElement::StrLeaf => {
            out.push(Term::hole(None, HoleSlot::Text(String::new())));
            Ok(())
        }
        GElement::Star(_) => {
            out.push(Term::hole(None, HoleSlot::Repeat(here())));
            Ok(())
        }
        GElement::Or(_) => {
            out.push(Term::hole(None, HoleSlot::Choice(here())));
            Ok(())
        }
        GElement::Node(functor, items) => {
            let mut children = Vec::new();
            for (i, item) in items.iter().enumerate() {
                path.push(i);
                build(def, item, clause, path, stack, &mut children)?;
                path.pop();
            }
            out.push(Term::compound(functor.clone(), None, children));
            Ok(())
        }
    }
}

/// Adds the trailing repetition hole to every `*` segment of a tree that was
/// written by hand, so that it can be extended like an edited one. Parts of
/// `t` that do not fit the grammar are left as they are.
pub fn complete_repetitions(def: &LanguageDef, clause: &str, t: &Term) -> Result<Term, InstantiateError> {
    let c = def.clause(clause).ok_or_else(|| InstantiateError::UnknownClause(clause.to_string()))?;
    Ok(complete(def, &c.body, clause, &mut Vec::new(), t, 0))
}

// Clause references are followed at most this deep, which bounds the walk on
// grammars like `[a (or b a)]`.
const MAX_CLAUSE_DEPTH: usize = 64;

fn fits(def: &LanguageDef, e: &GElement, t: &Term, depth: usize) -> bool {
    if t.as_hole().is_some() {
        return true;
    }
    match e {
        GElement::ClauseRef(n) => {
            depth < MAX_CLAUSE_DEPTH && def.clause(n).is_some_and(|c| fits(def, &c.body, t, depth + 1))
        }
        GElement::StrLeaf => matches!(t, Term::Atom(Atom::Str(_))),
        GElement::Node(f, _) => t.functor() == Some(f.as_str()),
        GElement::Or(alts) => alts.iter().any(|a| fits(def, a, t, depth)),
        GElement::Star(_) => false,
    }
}

fn complete(def: &LanguageDef, e: &GElement, clause: &str, path: &mut Vec<usize>, t: &Term, depth: usize) -> Term {
    if t.as_hole().is_some() || depth > MAX_CLAUSE_DEPTH {
        return t.clone();
    }
    match e {
        GElement::ClauseRef(n) => match def.clause(n) {
            Some(c) => complete(def, &c.body, n, &mut Vec::new(), t, depth + 1),
            None => t.clone(),
        },
        GElement::Or(alts) => match alts.iter().position(|a| fits(def, a, t, depth)) {
            Some(i) => {
                path.push(i);
                let out = complete(def, &alts[i], clause, path, t, depth);
                path.pop();
                out
            }
            None => t.clone(),
        },
        GElement::Node(f, items) if t.functor() == Some(f.as_str()) => {
            let kids = t.children();
            let mut out = Vec::new();
            let mut j = 0;
            for (i, item) in items.iter().enumerate() {
                path.push(i);
                match item {
                    GElement::Star(inner) => {
                        let repeated = inner.first();
                        while j < kids.len() && !is_repeat_hole(&kids[j]) {
                            match repeated {
                                Some(r) if fits(def, r, &kids[j], depth) => {
                                    path.push(0);
                                    out.push(complete(def, r, clause, path, &kids[j], depth));
                                    path.pop();
                                    j += 1;
                                }
                                _ => break,
                            }
                        }
                        if j < kids.len() && is_repeat_hole(&kids[j]) {
                            out.push(kids[j].clone());
                            j += 1;
                        } else {
                            out.push(Term::hole(None, HoleSlot::Repeat(ClauseRef { clause: clause.to_string(), path: path.clone() })));
                        }
                    }
                    _ if j < kids.len() => {
                        out.push(complete(def, item, clause, path, &kids[j], depth));
                        j += 1;
                    }
                    _ => {}
                }
                path.pop();
            }
            out.extend(kids[j..].iter().cloned());
            t.with_children(out)
        }
        _ => t.clone(),
    }
}

fn is_repeat_hole(t: &Term) -> bool {
    t.as_hole().is_some_and(|h| matches!(h.slot, HoleSlot::Repeat(_)))
}
