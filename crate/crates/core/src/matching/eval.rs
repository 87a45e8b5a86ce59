use super::{match_pattern, match_sequence, Binding, Env};
use crate::langdef::{validate::free_vars, Expr, LanguageDef, LocalDef, Pattern, Rule};
use crate::term::{Atom, HoleSlot, Identity, Term};

/// Nesting bound for local function calls.
const MAX_CALL_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`{0}` is bound under an ellipsis and must be followed by `...`")]
    DepthMismatch(String),
    #[error("variables spliced together have different lengths: {0}")]
    ZipLength(String),
    #[error("`...` applied to an expression with no ellipsis variable")]
    SpliceWithoutEllipsisVar,
    #[error("identity designator for `{functor}` evaluated to a non-atom: {value}")]
    IdNotAtom { functor: String, value: String },
    #[error("no case rule matches {subject}")]
    CaseExhausted { subject: String },
    #[error("`{name}` takes {expected} arguments, given {given}")]
    Arity { name: String, expected: usize, given: usize },
    #[error("arguments to `{name}` do not match its parameters")]
    ParamMismatch { name: String },
    #[error("`{0}` is not a local function")]
    NotAFunction(String),
    #[error("local calls nested deeper than {MAX_CALL_DEPTH}")]
    RecursionLimit,
}

/// Evaluates `e` in `env`.
pub fn eval_expr(e: &Expr, env: &Env, def: &LanguageDef) -> Result<Term, EvalError> {
    Evaluator { def, depth: 0 }.eval(e, env)
}

/// Evaluates the first rule whose pattern matches `subject`.
pub fn eval_case(subject: &Term, rules: &[Rule], env: &Env, def: &LanguageDef) -> Result<Term, EvalError> {
    Evaluator { def, depth: 0 }.case(subject, rules, env)
}

/// Applies the local function `name` to already evaluated arguments.
pub fn apply_local(def: &LanguageDef, name: &str, args: &[Term]) -> Result<Term, EvalError> {
    Evaluator { def, depth: 0 }.call(name, args)
}

struct Evaluator<'a> {
    def: &'a LanguageDef,
    depth: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, e: &Expr, env: &Env) -> Result<Term, EvalError> {
        match e {
            Expr::Var(name) => self.var(name, env),
            Expr::Literal(a) => Ok(Term::Atom(a.clone())),
            Expr::Construct { functor, id, args } => {
                let args = self.eval_seq(args, env)?;
                if let Some(n) = arithmetic(functor, &args) {
                    return Ok(Term::int(n));
                }
                let identity = match id {
                    None => None,
                    Some(ids) => Some(self.identity(functor, ids, env)?),
                };
                Ok(Term::compound(functor.clone(), identity, args))
            }
            Expr::Call { name, args } => {
                let args = self.eval_seq(args, env)?;
                self.call(name, &args)
            }
            Expr::Splice(_) => Err(EvalError::SpliceWithoutEllipsisVar),
            Expr::Case(subject, rules) => {
                let subject = self.eval(subject, env)?;
                self.case(&subject, rules, env)
            }
        }
    }

    fn var(&mut self, name: &str, env: &Env) -> Result<Term, EvalError> {
        match env.get(name) {
            Some(Binding::Single(t)) => Ok(t.clone()),
            Some(Binding::Multi(_)) => Err(EvalError::DepthMismatch(name.to_string())),
            None => match self.def.local(name) {
                Some(LocalDef::Value { body, .. }) => self.eval(body, &Env::new()),
                Some(LocalDef::Function { .. }) => Err(EvalError::Unbound(name.to_string())),
                // A bare `str` builds an empty editable string, as in clauses.
                None if name == "str" => Ok(Term::hole(None, HoleSlot::Text(String::new()))),
                None => Err(EvalError::Unbound(name.to_string())),
            },
        }
    }

    fn eval_seq(&mut self, items: &[Expr], env: &Env) -> Result<Vec<Term>, EvalError> {
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            self.eval_into(item, env, &mut out)?;
        }
        Ok(out)
    }

    fn eval_into(&mut self, e: &Expr, env: &Env, out: &mut Vec<Term>) -> Result<(), EvalError> {
        let Expr::Splice(inner) = e else {
            out.push(self.eval(e, env)?);
            return Ok(());
        };
        let controlling: Vec<(String, &Vec<Binding>)> = free_vars(inner)
            .into_iter()
            .filter_map(|v| match env.get(&v) {
                Some(Binding::Multi(items)) => Some((v, items)),
                _ => None,
            })
            .collect();
        let Some((_, first)) = controlling.first() else {
            return Err(EvalError::SpliceWithoutEllipsisVar);
        };
        let n = first.len();
        if controlling.iter().any(|(_, items)| items.len() != n) {
            let lens: Vec<String> = controlling.iter().map(|(v, items)| format!("{v}={}", items.len())).collect();
            return Err(EvalError::ZipLength(lens.join(", ")));
        }
        for i in 0..n {
            let mut element_env = env.clone();
            for (v, items) in &controlling {
                element_env.bind(v.clone(), items[i].clone());
            }
            self.eval_into(inner, &element_env, out)?;
        }
        Ok(())
    }

    fn identity(&mut self, functor: &str, ids: &[Expr], env: &Env) -> Result<Identity, EvalError> {
        let mut parts = Vec::new();
        for value in self.eval_seq(ids, env)? {
            let id = Identity::from_term(&value).ok_or_else(|| EvalError::IdNotAtom {
                functor: functor.to_string(),
                value: value.to_string(),
            })?;
            parts.extend(id.parts().iter().cloned());
        }
        Identity::new(parts).ok_or_else(|| EvalError::IdNotAtom {
            functor: functor.to_string(),
            value: "()".to_string(),
        })
    }

    fn case(&mut self, subject: &Term, rules: &[Rule], env: &Env) -> Result<Term, EvalError> {
        for rule in rules {
            if let Some(bound) = match_pattern(&rule.pattern, subject, env) {
                return self.eval(&rule.body, &bound);
            }
        }
        Err(EvalError::CaseExhausted { subject: subject.to_string() })
    }

    fn call(&mut self, name: &str, args: &[Term]) -> Result<Term, EvalError> {
        let Some(LocalDef::Function { params, body, .. }) = self.def.local(name) else {
            return Err(EvalError::NotAFunction(name.to_string()));
        };
        let has_segments = params.iter().any(|p| matches!(p, Pattern::Segment(_)));
        if !has_segments && params.len() != args.len() {
            return Err(EvalError::Arity { name: name.to_string(), expected: params.len(), given: args.len() });
        }
        let env = match_sequence(params, args, &Env::new())
            .ok_or_else(|| EvalError::ParamMismatch { name: name.to_string() })?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(EvalError::RecursionLimit);
        }
        self.depth += 1;
        let result = self.eval(body, &env);
        self.depth -= 1;
        result
    }
}

/// `(+ a b ...)`, `(- a b ...)` and `(* a b ...)` over integers. Anything
/// else, including the nullary `(-)` used as a font direction, is a plain
/// construction.
fn arithmetic(functor: &str, args: &[Term]) -> Option<i64> {
    let op: fn(i64, i64) -> Option<i64> = match functor {
        "+" => i64::checked_add,
        "-" => i64::checked_sub,
        "*" => i64::checked_mul,
        _ => return None,
    };
    let mut nums = args.iter().map(|t| match t {
        Term::Atom(Atom::Int(n)) => Some(*n),
        _ => None,
    });
    let first = nums.next()??;
    let rest: Option<Vec<i64>> = nums.collect();
    let rest = rest?;
    if functor == "-" && rest.is_empty() {
        return first.checked_neg();
    }
    rest.into_iter().try_fold(first, op)
}
