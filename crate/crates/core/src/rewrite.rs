//! Fixpoint rewriting: pre-order, first matching rule, restart from the root.

use crate::langdef::{LanguageDef, Rule};
use crate::matching::{eval_expr, match_pattern, Env, EvalError};
use crate::scene::{validate_nf, NotNormalForm};
use crate::term::{Path, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

/// Upper bound on rule applications for one rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fuel {
    max_steps: u64,
}

impl Fuel {
    /// `None` when `max_steps` is zero.
    pub fn new(max_steps: u64) -> Option<Fuel> {
        (max_steps >= 1).then_some(Fuel { max_steps })
    }

    pub fn max_steps(self) -> u64 {
        self.max_steps
    }
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel { max_steps: DEFAULT_FUEL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub result: Term,
    pub steps_used: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("rule {rule} at path {path:?}: {source}")]
    Eval {
        /// One-based position of the rule in its section.
        rule: usize,
        path: Path,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    NotNormalForm(#[from] NotNormalForm),
    #[error("rewriting did not converge within {steps} steps; last tree: {last}")]
    FuelExhausted { steps: u64, last: Term },
}

/// Performs one rewrite step, or returns `None` if no subtree matches.
pub fn apply_rules_once(rules: &[Rule], t: &Term, def: &LanguageDef) -> Result<Option<Term>, RewriteError> {
    if rules.is_empty() {
        return Ok(None);
    }
    let mut path = Vec::new();
    let Some((index, env)) = find_redex(rules, t, &mut path) else {
        return Ok(None);
    };
    let replacement = eval_expr(&rules[index].body, &env, def).map_err(|source| RewriteError::Eval {
        rule: index + 1,
        path: path.clone(),
        source,
    })?;
    let out = t.replace_at_path(&path, replacement).expect("redex path comes from the same tree");
    Ok(Some(out))
}

/// Pre-order search; on success `path` addresses the redex.
fn find_redex(rules: &[Rule], t: &Term, path: &mut Path) -> Option<(usize, Env)> {
    for (i, rule) in rules.iter().enumerate() {
        if let Some(env) = match_pattern(&rule.pattern, t, &Env::new()) {
            return Some((i, env));
        }
    }
    // Holes are leaves: their rendered view is only reachable by matching.
    if let Term::Compound(c) = t {
        for (i, child) in c.children.iter().enumerate() {
            path.push(i);
            if let Some(found) = find_redex(rules, child, path) {
                return Some(found);
            }
            path.pop();
        }
    }
    None
}

/// Rewrites until no rule applies or the fuel runs out.
pub fn rewrite_fixpoint(rules: &[Rule], t: &Term, fuel: Fuel, def: &LanguageDef) -> Result<RewriteOutcome, RewriteError> {
    let mut current = t.clone();
    let mut steps = 0;
    while steps < fuel.max_steps {
        match apply_rules_once(rules, &current, def)? {
            Some(next) => {
                current = next;
                steps += 1;
            }
            None => {
                return Ok(RewriteOutcome { result: current, steps_used: steps, status: Status::Converged });
            }
        }
    }
    // Out of fuel; it still counts as converged if nothing applies now.
    let status = if apply_rules_once(rules, &current, def)?.is_none() {
        Status::Converged
    } else {
        Status::FuelExhausted
    };
    Ok(RewriteOutcome { result: current, steps_used: steps, status })
}

/// Runs the transform rules.
pub fn transform(def: &LanguageDef, t: &Term, fuel: Fuel) -> Result<RewriteOutcome, RewriteError> {
    rewrite_fixpoint(&def.transform_rules, t, fuel, def)
}

/// Runs the reduce rules and checks the result is a normal form.
pub fn reduce(def: &LanguageDef, t: &Term, fuel: Fuel) -> Result<Term, RewriteError> {
    let out = rewrite_fixpoint(&def.reduce_rules, t, fuel, def)?;
    if out.status == Status::FuelExhausted {
        return Err(RewriteError::FuelExhausted { steps: out.steps_used, last: out.result });
    }
    validate_nf(&out.result)?;
    Ok(out.result)
}

pub fn is_normal_form(t: &Term) -> bool {
    validate_nf(t).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::langdef::{load_language, term_from_sexpr};
    use crate::sexpr::read_sexpr;

    fn term(src: &str) -> Term {
        term_from_sexpr(&read_sexpr(src).unwrap()[0]).unwrap()
    }

    #[test]
    fn dna_root_fires_first() {
        let def = load_language(corpus::FIG_DNA).unwrap();
        let once = apply_rules_once(&def.reduce_rules, &term("(gene (a))"), &def).unwrap().unwrap();
        assert_eq!(once.to_string(), "(seq (a))");
        let twice = apply_rules_once(&def.reduce_rules, &once, &def).unwrap().unwrap();
        assert_eq!(twice.to_string(), r#"(seq "A")"#);
        assert!(apply_rules_once(&def.reduce_rules, &twice, &def).unwrap().is_none());
    }

    #[test]
    fn dna_fixpoint() {
        let def = load_language(corpus::FIG_DNA).unwrap();
        let out = rewrite_fixpoint(&def.reduce_rules, &term("(gene (a) (c))"), Fuel::default(), &def).unwrap();
        assert_eq!(out.result.to_string(), r#"(seq "A" "C")"#);
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.steps_used, 3);
    }

    #[test]
    fn self_loop_exhausts_fuel() {
        let def = load_language("(deflang t (reduce [(a) (a)]))").unwrap();
        let out = rewrite_fixpoint(&def.reduce_rules, &term("(a)"), Fuel::new(50).unwrap(), &def).unwrap();
        assert_eq!(out.status, Status::FuelExhausted);
        assert_eq!(out.steps_used, 50);
        assert!(matches!(reduce(&def, &term("(a)"), Fuel::new(5).unwrap()), Err(RewriteError::FuelExhausted { .. })));
    }

    #[test]
    fn no_transform_rules_is_identity() {
        let def = load_language(corpus::FIG_DNA).unwrap();
        let t = term("(gene (a))");
        let out = transform(&def, &t, Fuel::default()).unwrap();
        assert!(out.result.identical(&t));
        assert_eq!(out.steps_used, 0);
    }

    #[test]
    fn non_normal_result_is_reported() {
        let def = load_language("(deflang t (reduce [(a) (bogus)]))").unwrap();
        let err = reduce(&def, &term("(seq (a))"), Fuel::default()).unwrap_err();
        match err {
            RewriteError::NotNormalForm(e) => assert_eq!(e.path, vec![0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eval_errors_carry_rule_and_path() {
        let def = load_language("(deflang t (reduce [(a x) (b q)]))").unwrap();
        let err = apply_rules_once(&def.reduce_rules, &term("(w (a 1))"), &def).unwrap_err();
        assert!(matches!(err, RewriteError::Eval { rule: 1, ref path, .. } if path == &vec![0]));
    }

    #[test]
    fn normal_form_predicate() {
        assert!(is_normal_form(&term(r#"(seq "A" (nl))"#)));
        assert!(!is_normal_form(&term("(gene (a))")));
        assert!(is_normal_form(&term("(graph (edge-types))")));
    }
}
