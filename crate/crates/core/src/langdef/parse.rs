use std::collections::HashSet;

use super::{AbstractClause, Expr, GElement, LanguageDef, LocalDef, Pattern, Rule};
use crate::sexpr::{read_sexpr, ReadError, SExpr, Span};
use crate::term::{Atom, Identity, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{}:{}: {message}", span.line, span.col)]
    Syntax { message: String, span: Span },
}

impl ParseError {
    fn at(span: Span, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { message: message.into(), span }
    }

    pub fn line(&self) -> usize {
        match self {
            ParseError::Read(
                ReadError::UnexpectedClose { line, .. }
                | ReadError::Unclosed { line, .. }
                | ReadError::Mismatched { line, .. }
                | ReadError::BadChar { line, .. }
                | ReadError::UnterminatedString { line, .. }
                | ReadError::BadEscape { line, .. },
            ) => *line,
            ParseError::Syntax { span, .. } => span.line,
        }
    }
}

const ELLIPSIS: &str = "...";

fn span_of(e: &SExpr, fallback: Span) -> Span {
    e.span().unwrap_or(fallback)
}

/// Reads `text` and parses its single `deflang` form.
pub fn load_language(text: &str) -> Result<LanguageDef, ParseError> {
    let forms = read_sexpr(text)?;
    match forms.as_slice() {
        [form] => parse_language(form),
        [] => Err(ParseError::at(Span { line: 1, col: 1 }, "no deflang form found")),
        [_, extra, ..] => Err(ParseError::at(span_of(extra, Span::default()), "only one deflang form per file")),
    }
}

pub fn parse_language(form: &SExpr) -> Result<LanguageDef, ParseError> {
    let top = form.span().unwrap_or_default();
    let items = form
        .as_list()
        .ok_or_else(|| ParseError::at(top, "expected (deflang name ...)"))?;
    match items {
        [head, name, ..] if head.is_symbol("deflang") => {
            let name = name
                .as_symbol()
                .ok_or_else(|| ParseError::at(top, "deflang name must be a symbol"))?
                .to_string();
            let mut def = LanguageDef {
                name,
                clauses: Vec::new(),
                locals: Vec::new(),
                transform_rules: Vec::new(),
                reduce_rules: Vec::new(),
            };
            let sections = &items[2..];
            // Function names decide call-vs-construct in every body, so collect
            // them before parsing any expression.
            let mut funcs = HashSet::new();
            for section in sections {
                if let Some([head, entries @ ..]) = section.as_list() {
                    if head.is_symbol("locals") {
                        for entry in entries {
                            if let Some([SExpr::List(sig, _), _]) = entry.as_list() {
                                if let Some(SExpr::Symbol(n)) = sig.first() {
                                    funcs.insert(n.clone());
                                }
                            }
                        }
                    }
                }
            }
            let mut seen = HashSet::new();
            for section in sections {
                let span = span_of(section, top);
                let Some([head, entries @ ..]) = section.as_list() else {
                    return Err(ParseError::at(span, format!("expected a deflang clause, found `{section}`")));
                };
                let keyword = head.as_symbol().unwrap_or_default();
                if !seen.insert(keyword.to_string()) {
                    return Err(ParseError::at(span, format!("duplicate `{keyword}` clause")));
                }
                match keyword {
                    "abstract" => {
                        for e in entries {
                            def.clauses.push(parse_abstract_clause(e, span)?);
                        }
                    }
                    "locals" => {
                        for e in entries {
                            def.locals.push(parse_local(e, span, &funcs)?);
                        }
                    }
                    "transform" => {
                        for e in entries {
                            def.transform_rules.push(parse_rule(e, span, &funcs)?);
                        }
                    }
                    "reduce" => {
                        for e in entries {
                            def.reduce_rules.push(parse_rule(e, span, &funcs)?);
                        }
                    }
                    other => {
                        return Err(ParseError::at(span, format!("unknown deflang clause `{other}`")));
                    }
                }
            }
            Ok(def)
        }
        _ => Err(ParseError::at(top, "expected (deflang name ...)")),
    }
}

fn parse_abstract_clause(e: &SExpr, outer: Span) -> Result<AbstractClause, ParseError> {
    let span = span_of(e, outer);
    match e.as_list() {
        Some([SExpr::Symbol(name), body]) => Ok(AbstractClause {
            name: name.clone(),
            body: parse_gelement(body, span)?,
            span,
        }),
        _ => Err(ParseError::at(span, format!("abstract clause must be [name element], found `{e}`"))),
    }
}

fn parse_gelement(e: &SExpr, outer: Span) -> Result<GElement, ParseError> {
    let span = span_of(e, outer);
    match e {
        SExpr::Symbol(s) if s == "str" => Ok(GElement::StrLeaf),
        SExpr::Symbol(s) => Ok(GElement::ClauseRef(s.clone())),
        SExpr::List(items, _) => {
            let Some((SExpr::Symbol(head), rest)) = items.split_first() else {
                return Err(ParseError::at(span, format!("malformed abstract element `{e}`")));
            };
            let parts = rest
                .iter()
                .map(|x| parse_gelement(x, span))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(match head.as_str() {
                "*" => GElement::Star(parts),
                "or" => GElement::Or(parts),
                _ => GElement::Node(head.clone(), parts),
            })
        }
        other => Err(ParseError::at(span, format!("unexpected `{other}` in abstract element"))),
    }
}

fn parse_local(e: &SExpr, outer: Span, funcs: &HashSet<String>) -> Result<LocalDef, ParseError> {
    let span = span_of(e, outer);
    match e.as_list() {
        Some([SExpr::Symbol(name), body]) => Ok(LocalDef::Value {
            name: name.clone(),
            body: parse_expr_in(body, span, funcs)?,
            span,
        }),
        Some([SExpr::List(sig, _), body]) => match sig.split_first() {
            Some((SExpr::Symbol(name), params)) => Ok(LocalDef::Function {
                name: name.clone(),
                params: parse_pattern_seq(params, span)?,
                body: parse_expr_in(body, span, funcs)?,
                span,
            }),
            _ => Err(ParseError::at(span, "local function head must be (name pattern ...)")),
        },
        _ => Err(ParseError::at(span, format!("malformed local definition `{e}`"))),
    }
}

fn parse_rule(e: &SExpr, outer: Span, funcs: &HashSet<String>) -> Result<Rule, ParseError> {
    let span = span_of(e, outer);
    match e.as_list() {
        Some([pattern, body]) => Ok(Rule {
            pattern: parse_pattern_in(pattern, span)?,
            body: parse_expr_in(body, span, funcs)?,
            span,
        }),
        _ => Err(ParseError::at(span, format!("rule must be [pattern expression], found `{e}`"))),
    }
}

fn literal(e: &SExpr) -> Option<Atom> {
    match e {
        SExpr::Str(s) => Some(Atom::Str(s.clone())),
        SExpr::Int(n) => Some(Atom::Int(*n)),
        SExpr::Bool(b) => Some(Atom::Bool(*b)),
        SExpr::Char(c) => Some(Atom::Char(*c)),
        _ => None,
    }
}

/// Parses a pattern with no surrounding definition (for tests and tools).
pub fn parse_pattern(e: &SExpr) -> Result<Pattern, ParseError> {
    parse_pattern_in(e, Span::default())
}

fn parse_pattern_in(e: &SExpr, outer: Span) -> Result<Pattern, ParseError> {
    let span = span_of(e, outer);
    if let Some(a) = literal(e) {
        return Ok(Pattern::Literal(a));
    }
    match e {
        SExpr::Symbol(s) if s == ELLIPSIS => Err(ParseError::at(span, "misplaced `...`")),
        SExpr::Symbol(s) if s == "_" => Ok(Pattern::Wildcard),
        SExpr::Symbol(s) => Ok(Pattern::Var(s.clone())),
        SExpr::List(items, _) => {
            let (head, rest) = items
                .split_first()
                .ok_or_else(|| ParseError::at(span, "empty pattern `()`"))?;
            let children = parse_pattern_seq(rest, span)?;
            match head {
                SExpr::Symbol(f) if f != ELLIPSIS => Ok(Pattern::Comp { functor: f.clone(), id: None, children }),
                SExpr::List(inner, _) => match inner.split_first() {
                    Some((SExpr::Symbol(f), ids)) if !ids.is_empty() => Ok(Pattern::Comp {
                        functor: f.clone(),
                        id: Some(parse_pattern_seq(ids, span)?),
                        children,
                    }),
                    _ => Err(ParseError::at(span, format!("malformed identity pattern `{head}`"))),
                },
                _ => Err(ParseError::at(span, format!("malformed pattern `{e}`"))),
            }
        }
        _ => unreachable!("literals handled above"),
    }
}

fn parse_pattern_seq(items: &[SExpr], span: Span) -> Result<Vec<Pattern>, ParseError> {
    let mut out: Vec<Pattern> = Vec::new();
    for item in items {
        if item.is_symbol(ELLIPSIS) {
            let prev = out
                .pop()
                .ok_or_else(|| ParseError::at(span, "`...` cannot start a sequence"))?;
            out.push(Pattern::Segment(Box::new(prev)));
        } else {
            out.push(parse_pattern_in(item, span)?);
        }
    }
    Ok(out)
}

/// Parses an expression; `funcs` names the local functions in scope.
pub fn parse_expr(e: &SExpr, funcs: &HashSet<String>) -> Result<Expr, ParseError> {
    parse_expr_in(e, Span::default(), funcs)
}

fn parse_expr_in(e: &SExpr, outer: Span, funcs: &HashSet<String>) -> Result<Expr, ParseError> {
    let span = span_of(e, outer);
    if let Some(a) = literal(e) {
        return Ok(Expr::Literal(a));
    }
    match e {
        SExpr::Symbol(s) if s == ELLIPSIS => Err(ParseError::at(span, "misplaced `...`")),
        SExpr::Symbol(s) => Ok(Expr::Var(s.clone())),
        SExpr::List(items, _) => {
            let (head, rest) = items
                .split_first()
                .ok_or_else(|| ParseError::at(span, "empty expression `()`"))?;
            match head {
                SExpr::Symbol(f) if f == "case" => {
                    let (subject, rules) = rest
                        .split_first()
                        .ok_or_else(|| ParseError::at(span, "case needs a subject"))?;
                    let subject = parse_expr_in(subject, span, funcs)?;
                    let rules = rules
                        .iter()
                        .map(|r| parse_rule(r, span, funcs))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Expr::Case(Box::new(subject), rules))
                }
                SExpr::Symbol(f) if f != ELLIPSIS => {
                    let args = parse_expr_seq(rest, span, funcs)?;
                    if funcs.contains(f) {
                        Ok(Expr::Call { name: f.clone(), args })
                    } else {
                        Ok(Expr::Construct { functor: f.clone(), id: None, args })
                    }
                }
                SExpr::List(inner, _) => match inner.split_first() {
                    Some((SExpr::Symbol(f), ids)) if !ids.is_empty() => Ok(Expr::Construct {
                        functor: f.clone(),
                        id: Some(parse_expr_seq(ids, span, funcs)?),
                        args: parse_expr_seq(rest, span, funcs)?,
                    }),
                    _ => Err(ParseError::at(span, format!("malformed identity designator `{head}`"))),
                },
                _ => Err(ParseError::at(span, format!("malformed expression `{e}`"))),
            }
        }
        _ => unreachable!("literals handled above"),
    }
}

fn parse_expr_seq(items: &[SExpr], span: Span, funcs: &HashSet<String>) -> Result<Vec<Expr>, ParseError> {
    let mut out: Vec<Expr> = Vec::new();
    for item in items {
        if item.is_symbol(ELLIPSIS) {
            let prev = out
                .pop()
                .ok_or_else(|| ParseError::at(span, "`...` cannot start a sequence"))?;
            out.push(Expr::Splice(Box::new(prev)));
        } else {
            out.push(parse_expr_in(item, span, funcs)?);
        }
    }
    Ok(out)
}

/// Builds a term from data syntax: `(f x ...)` is a compound with a fresh
/// identity, `((f id ...) x ...)` designates one, literals become atoms.
pub fn term_from_sexpr(e: &SExpr) -> Result<Term, ParseError> {
    let span = e.span().unwrap_or_default();
    if let Some(a) = literal(e) {
        return Ok(Term::Atom(a));
    }
    match e {
        SExpr::List(items, _) => {
            let (head, rest) = items
                .split_first()
                .ok_or_else(|| ParseError::at(span, "empty term `()`"))?;
            let children = rest.iter().map(term_from_sexpr).collect::<Result<Vec<_>, _>>()?;
            match head {
                SExpr::Symbol(f) => Ok(Term::compound(f.clone(), None, children)),
                SExpr::List(inner, _) => match inner.split_first() {
                    Some((SExpr::Symbol(f), ids)) => {
                        let parts = ids
                            .iter()
                            .map(|x| literal(x).ok_or_else(|| ParseError::at(span, "identity parts must be atoms")))
                            .collect::<Result<Vec<_>, _>>()?;
                        let id = Identity::new(parts).ok_or_else(|| ParseError::at(span, "empty identity"))?;
                        Ok(Term::compound(f.clone(), Some(id), children))
                    }
                    _ => Err(ParseError::at(span, "malformed term head")),
                },
                _ => Err(ParseError::at(span, "malformed term head")),
            }
        }
        SExpr::Symbol(s) => Err(ParseError::at(span, format!("bare symbol `{s}` is not a term"))),
        _ => unreachable!("literals handled above"),
    }
}
