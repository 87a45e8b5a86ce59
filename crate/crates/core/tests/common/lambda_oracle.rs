//! A direct interpreter for the λ-calculus stepping rules, written without
//! the rewrite engine, used to check the bundled language against.

use projed::term::{Atom, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lam {
    Const(String),
    Pair(Box<Lam>, Box<Lam>),
    Ident(String),
    Apply(Box<Lam>, Box<Lam>),
    Lambda(String, Box<Lam>),
}

use Lam::*;

fn text(t: &Term) -> Option<String> {
    match t.as_atom()? {
        Atom::Str(s) => Some(s.clone()),
        _ => None,
    }
}

impl Lam {
    pub fn from_term(t: &Term) -> Option<Lam> {
        let k = t.children();
        let sub = |i: usize| Lam::from_term(&k[i]).map(Box::new);
        Some(match (t.functor()?, k.len()) {
            ("const", 1) => Const(text(&k[0])?),
            ("ident", 1) => Ident(text(&k[0])?),
            ("pair", 2) => Pair(sub(0)?, sub(1)?),
            ("apply", 2) => Apply(sub(0)?, sub(1)?),
            ("lambda", 2) => Lambda(text(&k[0])?, sub(1)?),
            _ => return None,
        })
    }

    /// One press of `e`: step under lambdas and into both halves of pairs,
    /// otherwise take one evaluation step.
    pub fn eval_step(self) -> Lam {
        match self {
            Lambda(a, e) => Lambda(a, Box::new(e.eval_step())),
            Pair(a, b) => Pair(Box::new(a.eval_step()), Box::new(b.eval_step())),
            e => e.eval(),
        }
    }

    fn eval(self) -> Lam {
        match self {
            Apply(f, x) => match *f {
                Lambda(arg, body) => body.subst(&x, &arg),
                f => Apply(Box::new(f.eval()), x),
            },
            e => e,
        }
    }

    /// Substitution without renaming, exactly as the rules have it.
    fn subst(self, new: &Lam, old: &str) -> Lam {
        match self {
            Const(k) => Const(k),
            Pair(a, b) => Pair(Box::new(a.subst(new, old)), Box::new(b.subst(new, old))),
            Ident(n) if n == old => new.clone(),
            Ident(n) => Ident(n),
            Apply(a, b) => Apply(Box::new(a.subst(new, old)), Box::new(b.subst(new, old))),
            Lambda(a, e) if a == old => Lambda(a, e),
            Lambda(a, e) => Lambda(a, Box::new(e.subst(new, old))),
        }
    }

    /// Number of `pair` nodes along the chain of second components starting
    /// at the root, each with `(const "1")` on the left.
    pub fn ones_prefix(&self) -> usize {
        match self {
            Pair(a, b) if **a == Const("1".into()) => 1 + b.ones_prefix(),
            _ => 0,
        }
    }
}
