//! Language definitions: abstract clauses, locals, transform and reduce rules.

mod instantiate;
mod parse;
pub(crate) mod validate;

pub use instantiate::{complete_repetitions, instantiate_clause, instantiate_element, InstantiateError};
pub use parse::{load_language, parse_expr, parse_language, parse_pattern, term_from_sexpr, ParseError};
pub use validate::{validate_language, Diagnostic};

use crate::sexpr::Span;
use crate::term::{Atom, ClauseRef};

/// Element of an abstract clause body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GElement {
    ClauseRef(String),
    StrLeaf,
    Node(String, Vec<GElement>),
    Star(Vec<GElement>),
    Or(Vec<GElement>),
}

impl GElement {
    /// Menu label: clause name, functor, or `str`.
    pub fn label(&self) -> String {
        match self {
            GElement::ClauseRef(name) => name.clone(),
            GElement::StrLeaf => "str".to_string(),
            GElement::Node(f, _) => f.clone(),
            GElement::Star(_) => "*".to_string(),
            GElement::Or(_) => "or".to_string(),
        }
    }

    fn children(&self) -> &[GElement] {
        match self {
            GElement::Node(_, c) | GElement::Star(c) | GElement::Or(c) => c,
            _ => &[],
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&GElement> {
        let mut cur = self;
        for &i in path {
            cur = cur.children().get(i)?;
        }
        Some(cur)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractClause {
    pub name: String,
    pub body: GElement,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Wildcard,
    Literal(Atom),
    /// `(f p ...)`, or `((f i ...) p ...)` when `id` is present.
    Comp {
        functor: String,
        id: Option<Vec<Pattern>>,
        children: Vec<Pattern>,
    },
    /// `p ...` inside a sequence.
    Segment(Box<Pattern>),
}

impl Pattern {
    /// Variables bound by this pattern, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Pattern::Wildcard | Pattern::Literal(_) => {}
            Pattern::Comp { id, children, .. } => {
                for p in id.iter().flatten().chain(children) {
                    p.collect_vars(out);
                }
            }
            Pattern::Segment(p) => p.collect_vars(out),
        }
    }

    /// Variable depths: number of enclosing segments at the binding site.
    pub fn var_depths(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        self.collect_depths(0, &mut out);
        out
    }

    fn collect_depths(&self, depth: usize, out: &mut Vec<(String, usize)>) {
        match self {
            Pattern::Var(v) => {
                if !out.iter().any(|(n, _)| n == v) {
                    out.push((v.clone(), depth));
                }
            }
            Pattern::Wildcard | Pattern::Literal(_) => {}
            Pattern::Comp { id, children, .. } => {
                for p in id.iter().flatten().chain(children) {
                    p.collect_depths(depth, out);
                }
            }
            Pattern::Segment(p) => p.collect_depths(depth + 1, out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Literal(Atom),
    /// Builds a compound; `id` designates its identity.
    Construct {
        functor: String,
        id: Option<Vec<Expr>>,
        args: Vec<Expr>,
    },
    /// Application of a local function.
    Call { name: String, args: Vec<Expr> },
    /// `e ...` inside a sequence.
    Splice(Box<Expr>),
    Case(Box<Expr>, Vec<Rule>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub pattern: Pattern,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalDef {
    Value { name: String, body: Expr, span: Span },
    Function { name: String, params: Vec<Pattern>, body: Expr, span: Span },
}

impl LocalDef {
    pub fn name(&self) -> &str {
        match self {
            LocalDef::Value { name, .. } | LocalDef::Function { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            LocalDef::Value { span, .. } | LocalDef::Function { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageDef {
    pub name: String,
    pub clauses: Vec<AbstractClause>,
    pub locals: Vec<LocalDef>,
    pub transform_rules: Vec<Rule>,
    pub reduce_rules: Vec<Rule>,
}

impl LanguageDef {
    pub fn clause(&self, name: &str) -> Option<&AbstractClause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn local(&self, name: &str) -> Option<&LocalDef> {
        self.locals.iter().find(|l| l.name() == name)
    }

    /// The `*` or `or` element a hole refers to.
    pub fn resolve(&self, r: &ClauseRef) -> Option<&GElement> {
        self.clause(&r.clause)?.body.at_path(&r.path)
    }

    /// Follows clause references to the first non-reference element.
    pub fn deref_element<'a>(&'a self, mut e: &'a GElement) -> &'a GElement {
        let mut seen = Vec::new();
        while let GElement::ClauseRef(name) = e {
            if seen.contains(&name) {
                break;
            }
            seen.push(name);
            match self.clause(name) {
                Some(c) => e = &c.body,
                None => break,
            }
        }
        e
    }
}
