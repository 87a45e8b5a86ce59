//! Generators and oracles for the rewrite and persistence properties.

use proptest::prelude::*;

use projed::langdef::Pattern;
use projed::matching::Slot;
use projed::term::{Atom, ClauseRef, HoleSlot, Identity, Term};

pub fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        "[ -~\n\té漢,]{0,8}".prop_map(Atom::Str),
        any::<i64>().prop_map(Atom::Int),
        any::<bool>().prop_map(Atom::Bool),
        prop_oneof![Just(','), Just('"'), Just('<'), Just('&'), Just('x'), Just('λ')].prop_map(Atom::Char),
    ]
}

pub fn identity() -> impl Strategy<Value = Identity> {
    prop::collection::vec(atom(), 1..4).prop_map(|p| Identity::new(p).unwrap())
}

pub fn clause_ref() -> impl Strategy<Value = ClauseRef> {
    ("[a-z][a-z-]{0,5}", prop::collection::vec(0usize..5, 0..3)).prop_map(|(clause, path)| ClauseRef { clause, path })
}

pub fn hole_slot() -> impl Strategy<Value = HoleSlot> {
    prop_oneof![
        clause_ref().prop_map(HoleSlot::Choice),
        clause_ref().prop_map(HoleSlot::Repeat),
        "[ -~\n]{0,6}".prop_map(HoleSlot::Text),
    ]
}

pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        atom().prop_map(Term::Atom),
        (identity(), hole_slot()).prop_map(|(id, slot)| Term::hole(Some(id), slot)),
    ];
    leaf.prop_recursive(4, 40, 4, |inner| {
        ("[a-z][a-z0-9>-]{0,6}", identity(), prop::collection::vec(inner, 0..4))
            .prop_map(|(f, id, kids)| Term::compound(f, Some(id), kids))
    })
}

/// Every way to give the ellipses run lengths that add up to `slack`, in
/// lexicographic order.
pub fn compositions(ellipses: usize, slack: usize) -> Vec<Vec<usize>> {
    if ellipses == 0 {
        return if slack == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=slack {
        for mut rest in compositions(ellipses - 1, slack - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn shapes(max_len: usize) -> Vec<Vec<Slot>> {
    let mut all = vec![vec![]];
    for len in 1..=max_len {
        for bits in 0..(1u32 << len) {
            all.push((0..len).map(|i| if bits >> i & 1 == 1 { Slot::Ellipsis } else { Slot::Fixed }).collect());
        }
    }
    all.retain(|s| s.iter().filter(|x| **x == Slot::Ellipsis).count() <= 3);
    all
}

/// Expected splits of `n` children into `shape`, built from compositions.
pub fn expected_splits(shape: &[Slot], n: usize) -> Vec<Vec<std::ops::Range<usize>>> {
    let fixed = shape.iter().filter(|s| **s == Slot::Fixed).count();
    let ellipses = shape.len() - fixed;
    if fixed > n {
        return vec![];
    }
    compositions(ellipses, n - fixed)
        .into_iter()
        .map(|lens| {
            let mut runs = lens.into_iter();
            let mut at = 0;
            shape
                .iter()
                .map(|s| {
                    let len = if *s == Slot::Fixed { 1 } else { runs.next().unwrap() };
                    at += len;
                    at - len..at
                })
                .collect()
        })
        .collect()
}

// ---- random rule sets over a tiny signature ----

pub fn ground(depth: u32) -> BoxedStrategy<String> {
    if depth == 0 {
        return prop::sample::select(vec!["(a)".to_string(), "(b)".to_string()]).boxed();
    }
    prop_oneof![
        prop::sample::select(vec!["(a)".to_string(), "(b)".to_string()]),
        ground(depth - 1).prop_map(|x| format!("(f {x})")),
        ground(depth - 1).prop_map(|x| format!("(g {x})")),
        (ground(depth - 1), ground(depth - 1)).prop_map(|(x, y)| format!("(h {x} {y})")),
    ]
    .boxed()
}

pub fn pattern(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop::sample::select(vec!["x", "y", "_", "(a)", "(b)"]).prop_map(str::to_string);
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        leaf,
        pattern(depth - 1).prop_map(|x| format!("(f {x})")),
        pattern(depth - 1).prop_map(|x| format!("(g {x})")),
        (pattern(depth - 1), pattern(depth - 1)).prop_map(|(x, y)| format!("(h {x} {y})")),
    ]
    .boxed()
}

pub fn body(vars: Vec<&'static str>, depth: u32) -> BoxedStrategy<String> {
    let mut leaves = vec!["(a)", "(b)"];
    leaves.extend(vars.iter().copied());
    let leaf = prop::sample::select(leaves).prop_map(str::to_string);
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        3 => leaf,
        1 => body(vars.clone(), depth - 1).prop_map(|x| format!("(f {x})")),
        1 => body(vars, depth - 1).prop_map(|x| format!("(g {x})")),
    ]
    .boxed()
}

pub fn rule() -> impl Strategy<Value = String> {
    // Rules rooted at a compound with a variable inside, so they can fire.
    pattern(2)
        .prop_filter("rooted at a compound", |p| p.starts_with('(') && p != "(a)" && p != "(b)")
        .prop_flat_map(|p| {
            let vars: Vec<&'static str> = ["x", "y"].into_iter().filter(|v| p.contains(&format!(" {v}"))).collect();
            body(vars, 2).prop_map(move |b| format!("[{p} {b}]"))
        })
}

/// Independent matcher for the rule patterns generated above.
pub fn matches(p: &Pattern, t: &Term, env: &mut Vec<(String, String)>) -> bool {
    match p {
        Pattern::Wildcard => true,
        Pattern::Var(v) => {
            let text = t.to_string();
            match env.iter().find(|(n, _)| n == v) {
                Some((_, bound)) => *bound == text,
                None => {
                    env.push((v.clone(), text));
                    true
                }
            }
        }
        Pattern::Comp { functor, children, id: None } => {
            t.functor() == Some(functor) && t.children().len() == children.len() && children.iter().zip(t.children()).all(|(p, c)| matches(p, c, env))
        }
        _ => unreachable!("not generated"),
    }
}

pub fn has_redex(patterns: &[Pattern], t: &Term) -> bool {
    let mut found = false;
    t.walk(&mut |sub, _| found |= patterns.iter().any(|p| matches(p, sub, &mut Vec::new())));
    found
}


// ---- the properties themselves, shared with the acceptance run ----

use projed::langdef::{load_language, parse_pattern, term_from_sexpr};
use projed::matching::{enumerate_splits, match_pattern, Env};
use projed::persist::{load_term, save_term};
use projed::rewrite::{rewrite_fixpoint, Fuel, Status};
use projed::sexpr::read_sexpr;

fn read_term(src: &str) -> Term {
    term_from_sexpr(&read_sexpr(src).unwrap()[0]).unwrap()
}

pub fn save_load_is_identity(t: &Term) -> Result<(), TestCaseError> {
    let doc = save_term(t);
    let back = load_term(&doc).map_err(|e| TestCaseError::fail(format!("{e}\n{doc}")))?;
    prop_assert!(back.identical(t), "{doc}");
    prop_assert_eq!(save_term(&back), doc);
    Ok(())
}

/// Every shape up to six slots with at most three ellipses, every child
/// count up to six.
pub fn splits_match_brute_force() -> Result<(), String> {
    for shape in shapes(6) {
        for n in 0..=6 {
            let got: Vec<_> = enumerate_splits(n, &shape).collect();
            if got != expected_splits(&shape, n) {
                return Err(format!("n={n} shape={shape:?}: got {got:?}"));
            }
        }
    }
    Ok(())
}

pub fn converged_results_have_no_redex(rules: &[String], start: &str) -> Result<(), TestCaseError> {
    let src = format!("(deflang t (abstract [r (a)]) (transform {}))", rules.join(" "));
    let def = load_language(&src).unwrap();
    let out = rewrite_fixpoint(&def.transform_rules, &read_term(start), Fuel::new(200).unwrap(), &def).unwrap();
    let patterns: Vec<Pattern> = def.transform_rules.iter().map(|r| r.pattern.clone()).collect();
    match out.status {
        Status::Converged => prop_assert!(!has_redex(&patterns, &out.result), "{src}\n{start} -> {}", out.result),
        Status::FuelExhausted => prop_assert!(has_redex(&patterns, &out.result)),
    }
    Ok(())
}

pub fn repeated_variables_compare_without_identities(x: &str, y: &str) -> Result<(), TestCaseError> {
    let p = parse_pattern(&read_sexpr("(p v v)").unwrap()[0]).unwrap();
    // Parsing coins distinct identities even for equal structure.
    let t = read_term(&format!("(p {x} {y})"));
    let oracle = t.children()[0].to_string() == t.children()[1].to_string();
    prop_assert_eq!(match_pattern(&p, &t, &Env::new()).is_some(), oracle);
    Ok(())
}

pub fn designated_identities_round_trip(tag: &str, n: i64) -> Result<(), TestCaseError> {
    let src = format!(
        r#"(deflang t (abstract [r (a)])
             (transform [(mk k) ((box "{tag}" k) "x")]
                        [(probe ((box i) s)) (got i)]))"#
    );
    let def = load_language(&src).unwrap();
    let out = rewrite_fixpoint(&def.transform_rules, &read_term(&format!("(probe (mk {n}))")), Fuel::default(), &def).unwrap();
    prop_assert_eq!(out.result.functor(), Some("got"));
    let got = Identity::from_term(&out.result.children()[0]);
    prop_assert_eq!(got, Some(Identity::new(vec![Atom::str(tag), Atom::Int(n)]).unwrap()));
    Ok(())
}
