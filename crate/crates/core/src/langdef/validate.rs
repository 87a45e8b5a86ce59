use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{Expr, GElement, LanguageDef, LocalDef, Pattern, Rule};
use crate::sexpr::Span;

/// A problem found by [`validate_language`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
    pub span: Span,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

/// Static checks: clause references, duplicate names, unbound variables and
/// ellipsis depth. An empty result means the definition is valid.
pub fn validate_language(def: &LanguageDef) -> Vec<Diagnostic> {
    let mut v = Validator { def, out: Vec::new() };
    v.check_names();
    for clause in &def.clauses {
        v.check_element(&clause.body, clause.span);
    }
    for local in &def.locals {
        match local {
            LocalDef::Value { name, body, span } => {
                let ctx = format!("local `{name}`");
                v.check_expr(body, &HashMap::new(), 0, *span, &ctx);
            }
            LocalDef::Function { name, params, body, span } => {
                let mut scope = HashMap::new();
                for p in params {
                    v.bind_pattern(p, 0, &mut scope, *span);
                }
                let ctx = format!("local `{name}`");
                v.check_expr(body, &scope, 0, *span, &ctx);
            }
        }
    }
    for (kind, rules) in [("transform", &def.transform_rules), ("reduce", &def.reduce_rules)] {
        for (i, rule) in rules.iter().enumerate() {
            let ctx = format!("{kind} rule {}", i + 1);
            v.check_rule(rule, &HashMap::new(), 0, &ctx);
        }
    }
    v.out
}

struct Validator<'a> {
    def: &'a LanguageDef,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn report(&mut self, span: Span, message: String) {
        self.out.push(Diagnostic { message, span });
    }

    fn check_names(&mut self) {
        let mut seen = HashSet::new();
        for c in &self.def.clauses {
            if !seen.insert(c.name.as_str()) {
                self.report(c.span, format!("duplicate clause `{}`", c.name));
            }
        }
        let mut seen = HashSet::new();
        for l in &self.def.locals {
            if !seen.insert(l.name()) {
                self.report(l.span(), format!("duplicate local `{}`", l.name()));
            }
        }
    }

    fn check_element(&mut self, e: &GElement, span: Span) {
        match e {
            GElement::ClauseRef(name) => {
                if self.def.clause(name).is_none() {
                    self.report(span, format!("unresolved clause reference `{name}`"));
                }
            }
            GElement::StrLeaf => {}
            GElement::Node(_, items) | GElement::Star(items) | GElement::Or(items) => {
                for item in items {
                    self.check_element(item, span);
                }
            }
        }
    }

    /// Adds the pattern's variables to `scope` at `base` + their segment depth.
    fn bind_pattern(&mut self, p: &Pattern, base: usize, scope: &mut HashMap<String, usize>, span: Span) {
        for (name, depth) in p.var_depths() {
            let depth = base + depth;
            match scope.get(&name) {
                // Rebinding at the same depth is a non-linear constraint.
                Some(&d) if d != depth => {
                    self.report(span, format!("variable `{name}` bound at two ellipsis depths ({d} and {depth})"))
                }
                _ => {
                    scope.insert(name, depth);
                }
            }
        }
    }

    fn check_rule(&mut self, rule: &Rule, outer: &HashMap<String, usize>, level: usize, ctx: &str) {
        let mut scope = outer.clone();
        self.bind_pattern(&rule.pattern, level, &mut scope, rule.span);
        self.check_expr(&rule.body, &scope, level, rule.span, ctx);
    }

    /// `level` is the number of enclosing splices.
    fn check_expr(&mut self, e: &Expr, scope: &HashMap<String, usize>, level: usize, span: Span, ctx: &str) {
        match e {
            Expr::Var(name) => match scope.get(name) {
                Some(&depth) if depth > level => self.report(
                    span,
                    format!("{ctx}: `{name}` has ellipsis depth {depth} but is used under {level} ellipses"),
                ),
                Some(_) => {}
                None => match self.def.local(name) {
                    Some(LocalDef::Value { .. }) => {}
                    Some(LocalDef::Function { .. }) => {
                        self.report(span, format!("{ctx}: local function `{name}` used as a value"))
                    }
                    None if name == "str" => {}
                    None => self.report(span, format!("{ctx}: unbound variable `{name}`")),
                },
            },
            Expr::Literal(_) => {}
            Expr::Construct { id, args, .. } => {
                for x in id.iter().flatten().chain(args) {
                    self.check_expr(x, scope, level, span, ctx);
                }
            }
            Expr::Call { name, args } => {
                if let Some(LocalDef::Function { params, .. }) = self.def.local(name) {
                    let has_segments = params.iter().any(|p| matches!(p, Pattern::Segment(_)))
                        || args.iter().any(|a| matches!(a, Expr::Splice(_)));
                    if !has_segments && params.len() != args.len() {
                        self.report(
                            span,
                            format!("{ctx}: `{name}` takes {} arguments, given {}", params.len(), args.len()),
                        );
                    }
                }
                for x in args {
                    self.check_expr(x, scope, level, span, ctx);
                }
            }
            Expr::Splice(inner) => {
                let controlling = free_vars(inner).iter().any(|v| scope.get(v).is_some_and(|&d| d > level));
                if !controlling {
                    self.report(span, format!("{ctx}: `...` applied to an expression with no ellipsis variable"));
                }
                self.check_expr(inner, scope, level + 1, span, ctx);
            }
            Expr::Case(subject, rules) => {
                self.check_expr(subject, scope, level, span, ctx);
                for r in rules {
                    self.check_rule(r, scope, level, ctx);
                }
            }
        }
    }
}

/// Variables referenced by `e`, excluding those bound by nested case rules.
pub(crate) fn free_vars(e: &Expr) -> Vec<String> {
    fn go(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match e {
            Expr::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Literal(_) => {}
            Expr::Construct { id, args, .. } => {
                for x in id.iter().flatten().chain(args) {
                    go(x, bound, out);
                }
            }
            Expr::Call { args, .. } => {
                for x in args {
                    go(x, bound, out);
                }
            }
            Expr::Splice(inner) => go(inner, bound, out),
            Expr::Case(subject, rules) => {
                go(subject, bound, out);
                for r in rules {
                    let before = bound.len();
                    bound.extend(r.pattern.variables());
                    go(&r.body, bound, out);
                    bound.truncate(before);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::langdef::load_language;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate_language(&load_language(src).unwrap())
    }

    #[test]
    fn lambda_listing_is_clean() {
        assert_eq!(diags(corpus::FIG_LAMBDA), vec![]);
    }

    #[test]
    fn unresolved_clause() {
        let d = diags("(deflang t (abstract [tree (node (* leaf2))]))");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("leaf2"));
    }

    #[test]
    fn unbound_variable_is_named() {
        let d = diags("(deflang t (reduce [(a x) (b q)]))");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`q`"), "{}", d[0].message);
    }

    #[test]
    fn duplicates() {
        let d = diags("(deflang t (abstract [a (a)] [a (b)]) (locals [x 1] [x 2]))");
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn depth_errors() {
        assert_eq!(diags("(deflang t (reduce [(a x ...) (b x)]))").len(), 1);
        assert_eq!(diags("(deflang t (reduce [(a x) (b x ...)]))").len(), 1);
        assert_eq!(diags("(deflang t (reduce [(a x ... y) (b (c x y) ...)]))"), vec![]);
    }

    #[test]
    fn case_patterns_bind() {
        assert_eq!(
            diags("(deflang t (locals [(f n) (case n [(g k) (h k)] [_ n])]) (reduce [(a x) (f x)]))"),
            vec![]
        );
    }

    #[test]
    fn arity_checked_when_static() {
        let d = diags("(deflang t (locals [(f a b) (g a b)]) (reduce [(a x) (f x)]))");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("takes 2"));
    }
}
