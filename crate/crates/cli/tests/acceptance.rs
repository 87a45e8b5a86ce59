//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::lambda_oracle::Lam;
use common::props;
use common::{element_ids, parse, press, stable_scene, tagged};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use projed::corpus;
use projed::persist::{load_session, save_session};
use projed::rewrite::Fuel;
use projed::scene::{render_text, LayoutCache, PrimKind, Viewport};
use projed::session::{Event, Outcome, Session};
use projed::term::{Atom, Term};
use projed_cli::script::{parse_script, Step};
use projed_cli::{apply_step, cmd_check, load_checked, read_tree};

struct Run {
    lang: &'static str,
    start: &'static str,
    script: &'static str,
    tree: Option<&'static str>,
}

const RUNS: &[Run] = &[
    Run { lang: "dna", start: "DNA", script: "dna.script", tree: None },
    Run { lang: "boxes", start: "root", script: "boxes.script", tree: Some("animal.tree") },
    Run { lang: "lambda", start: "exp", script: "lambda.script", tree: Some("y-ones.tree") },
    Run { lang: "nested-graph", start: "machine", script: "nested-graph.script", tree: Some("nested.tree") },
    Run { lang: "class-models", start: "model", script: "class-models.script", tree: None },
    Run { lang: "use-cases", start: "diagram", script: "use-cases.script", tree: None },
    Run { lang: "dungeon", start: "game", script: "dungeon.script", tree: None },
];

fn run_named(lang: &str) -> &'static Run {
    RUNS.iter().find(|r| r.lang == lang).unwrap()
}

fn crate_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn language_path(lang: &str) -> PathBuf {
    crate_dir().join("../core/corpus").join(format!("{lang}.pld"))
}

fn script_path(name: &str) -> PathBuf {
    crate_dir().join("scripts").join(name)
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fresh(run: &Run) -> Result<Session, String> {
    let def = Arc::new(load_checked(&language_path(run.lang)).map_err(|f| f.message)?);
    let tree = run.tree.map(|t| read_tree(&script_path(t), &def, run.start)).transpose().map_err(|f| f.message)?;
    Session::with_options(def, run.start, tree, LayoutCache::default(), Fuel::default(), Viewport::default())
        .map_err(|e| e.to_string())
}

/// Replays a corpus script, calling `at` at every snapshot line. Any step
/// that does not apply is an error.
fn replay(run: &Run, mut at: impl FnMut(&str, &mut Session) -> Result<(), String>) -> Result<Session, String> {
    let mut s = fresh(run)?;
    let text = fs::read_to_string(script_path(run.script)).map_err(|e| e.to_string())?;
    let steps = parse_script(&text).map_err(|e| e.to_string())?;
    for step in &steps {
        if let Step::Snapshot(name) = step {
            at(name, &mut s)?;
            continue;
        }
        match apply_step(&mut s, step)? {
            Some(Outcome::Applied) => {}
            other => return Err(format!("{}: {step:?} gave {other:?}", run.script)),
        }
    }
    Ok(s)
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_parse() -> Check {
    let t = Instant::now();
    for run in RUNS {
        let mut out = Vec::new();
        let code = cmd_check(&language_path(run.lang), &mut out);
        ensure(code == 0, || format!("{}: {}", run.lang, String::from_utf8_lossy(&out)))?;
    }
    within(t, Duration::from_secs(1))?;
    Ok(format!("{} languages valid", RUNS.len()))
}

fn dna() -> Check {
    let t = Instant::now();
    let s = replay(run_named("dna"), |_, _| Ok(()))?;
    let kids = s.abstract_tree().children();
    let gene = s.abstract_tree().with_children(kids[..kids.len() - 1].to_vec());
    ensure(gene.structurally_equal(&parse("(gene (a) (a) (c) (t) (g) (g))")), || format!("tree {}", s.abstract_tree()))?;
    let nf = s.normal_form();
    let letters: Vec<Option<&Atom>> = nf.children().iter().map(Term::as_atom).collect();
    let want: Vec<Atom> = "AACTGG".chars().map(|c| Atom::str(c.to_string())).collect();
    let ok = nf.functor() == Some("seq")
        && nf.children().len() == 7
        && letters[..6].iter().zip(&want).all(|(a, w)| *a == Some(w))
        && nf.children()[6].as_hole().is_some();
    ensure(ok, || format!("normal form {nf}"))?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("{nf}"))
}

fn decision_tree() -> Check {
    let mut s = fresh(run_named("boxes"))?;
    let root = |s: &Session| s.normal_form().functor().map(str::to_owned);
    press(&mut s, "t");
    ensure(root(&s).as_deref() == Some("tree"), || format!("after t: {:?}", root(&s)))?;
    let tree = stable_scene(&s);
    press(&mut s, "b");
    ensure(root(&s).as_deref() == Some("hbox"), || format!("after b: {:?}", root(&s)))?;
    let boxes = stable_scene(&s);
    press(&mut s, "t");
    ensure(stable_scene(&s) == tree, || "tree scene changed after toggling twice".into())?;
    press(&mut s, "b");
    ensure(stable_scene(&s) == boxes, || "box scene changed after toggling twice".into())?;
    Ok("tree and hbox roots, scenes repeat".into())
}

fn lambda() -> Check {
    let t = Instant::now();
    let mut s = fresh(run_named("lambda"))?;
    let mut oracle = Lam::from_term(&parse(corpus::Y_ONES)).ok_or("oracle cannot read the start term")?;
    let mut counts = Vec::new();
    for k in 1..=6 {
        ensure(press(&mut s, "e") == Outcome::Applied, || format!("press {k} not applied"))?;
        oracle = oracle.eval_step();
        let ours = Lam::from_term(s.abstract_tree()).ok_or("tree left the lambda calculus")?;
        ensure(ours == oracle, || format!("press {k}: engine and oracle disagree"))?;
        counts.push(ours.ones_prefix());
    }
    within(t, Duration::from_secs(1))?;
    let want: Vec<usize> = (1..=6).collect();
    ensure(counts == want, || format!("pairs after 1..6 presses {counts:?}, wanted {want:?}; the oracle agrees with the engine"))?;
    Ok(format!("{counts:?}"))
}

fn random_graph(rng: &mut StdRng, depth: usize) -> String {
    let n = if depth == 0 { 0 } else { rng.gen_range(0..=3) };
    let entities: Vec<String> = (0..n).map(|_| format!("(entity {})", random_graph(rng, depth - 1))).collect();
    format!("(graph (entities {}) (relationships))", entities.join(" "))
}

fn nested_graph() -> Check {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    for round in 0..100 {
        let mut g = random_graph(&mut rng, 3);
        while !g.starts_with("(graph (entities (entity") {
            g = random_graph(&mut rng, 3);
        }
        let mut s = common::session(corpus::NESTED_GRAPH, "machine", Some(&format!("(machine {g} (empty))")));
        let entities = element_ids(&s.abstract_tree().children()[0].children()[0]);
        let before = s.abstract_tree().clone();
        let pick = entities[rng.gen_range(0..entities.len())].clone();
        let out = s.dispatch(Event::DoubleClick { target: tagged("b", &pick) });
        ensure(out == Outcome::Applied, || format!("round {round}: descend gave {out:?}"))?;
        for _ in 0..3 {
            let nodes = s.scene().nodes.clone();
            if nodes.is_empty() {
                break;
            }
            let n = &nodes[rng.gen_range(0..nodes.len())];
            let (x, y) = (rng.gen_range(0.0..600.0), rng.gen_range(0.0..400.0));
            let out = s.dispatch(Event::DragNode { node: n.abstract_id.clone(), x, y });
            ensure(out == Outcome::Applied, || format!("round {round}: drag gave {out:?}"))?;
        }
        ensure(press(&mut s, "up") == Outcome::Applied, || format!("round {round}: up not applied"))?;
        ensure(s.abstract_tree().structurally_equal(&before), || format!("round {round}: {g} came back different"))?;
    }
    within(t, Duration::from_secs(10))?;
    Ok("100 instances".into())
}

fn mode(s: &Session) -> Option<String> {
    s.abstract_tree().children()[0].children()[0].children()[0].functor().map(str::to_owned)
}

fn class_mixed_mode() -> Check {
    let mut seen = Vec::new();
    let mut textual = String::new();
    replay(run_named("class-models"), |name, s| {
        seen.push((name.to_string(), mode(s)));
        if name == "textual" {
            textual = render_text(s.scene());
        }
        Ok(())
    })?;
    let modes: Vec<_> = seen.iter().map(|(_, m)| m.as_deref()).collect();
    ensure(modes == [Some("graphical"), Some("textual"), Some("graphical")], || format!("modes {seen:?}"))?;
    let lines: Vec<&str> = textual.lines().map(str::trim).collect();
    let ok = lines.iter().any(|l| l.starts_with("class ") && l.contains('{')) && lines.iter().any(|l| l.starts_with('}'));
    ensure(ok, || format!("text projection:\n{textual}"))?;
    Ok("graphical, textual, graphical".into())
}

fn edge_gating() -> Check {
    let text = fs::read_to_string(script_path("class-models.script")).unwrap();
    let steps = parse_script(&text).map_err(|e| e.to_string())?;
    let mut s = fresh(run_named("class-models"))?;
    for step in steps.iter().take_while(|st| !matches!(st, Step::Edge { .. })) {
        apply_step(&mut s, step)?;
    }
    let ids = element_ids(&s.abstract_tree().children()[0]);
    let types: Vec<String> = s.allowed_edge_types(&ids[0], &ids[1]).map_err(|e| e.to_string())?.iter().map(Term::to_string).collect();
    ensure(types.len() == 1 && types[0].starts_with("(assoc"), || format!("class to class: {types:?}"))?;

    let mut s = fresh(run_named("use-cases"))?;
    // The actors list comes first in the tree, the use cases last.
    for (label, first) in [("actor", true), ("use-case", false), ("use-case", false)] {
        let holes = common::holes(s.abstract_tree());
        let hole = if first { holes.first() } else { holes.last() }.ok_or("no hole left")?;
        s.expand_hole(hole, label).map_err(|e| e.to_string())?;
    }
    let actor = element_ids(&s.abstract_tree().children()[0])[0].clone();
    let cases = element_ids(&s.abstract_tree().children()[1]);
    let functors = |v: Vec<Term>| v.iter().map(|t| t.functor().unwrap_or("").to_string()).collect::<Vec<_>>();
    let to_actor = functors(s.allowed_edge_types(&cases[0], &actor).map_err(|e| e.to_string())?);
    let between = functors(s.allowed_edge_types(&cases[0], &cases[1]).map_err(|e| e.to_string())?);
    ensure(to_actor.is_empty(), || format!("use case to actor: {to_actor:?}"))?;
    ensure(between == ["includes", "extends"], || format!("use case to use case: {between:?}"))?;
    let before = s.abstract_tree().clone();
    let out = s.dispatch(Event::EdgeDrag { source: cases[0].clone(), target: actor });
    ensure(matches!(out, Outcome::Dropped(_)) && s.abstract_tree().identical(&before), || format!("drag to actor gave {out:?}"))?;
    Ok(format!("class-class {types:?}, case-actor [], case-case {between:?}"))
}

fn run_cases<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn rewrite_properties() -> Check {
    run_cases(1000, (prop::collection::vec(props::rule(), 1..4), props::ground(4)), |(rules, start)| {
        props::converged_results_have_no_redex(&rules, &start)
    })
    .map_err(|e| format!("(a) {e}"))?;
    props::splits_match_brute_force().map_err(|e| format!("(b) {e}"))?;
    run_cases(1000, (props::ground(3), props::ground(3), any::<bool>()), |(x, y, same)| {
        props::repeated_variables_compare_without_identities(&x, if same { &x } else { &y })
    })
    .map_err(|e| format!("(c) {e}"))?;
    run_cases(1000, ("[a-z]{1,4}", -1000i64..1000), |(tag, n)| props::designated_identities_round_trip(&tag, n))
        .map_err(|e| format!("(d) {e}"))?;
    Ok("(a) (b) (c) (d)".into())
}

fn persistence() -> Check {
    run_cases(1000, props::term(), |t| props::save_load_is_identity(&t))?;
    let mut snapshots = 0;
    for run in RUNS {
        let mut check = |name: &str, s: &mut Session| {
            let doc = save_session(s);
            ensure(save_session(s) == doc, || format!("{}/{name}: two saves differ", run.lang))?;
            let back = load_session(&doc, s.language_arc(), s.fuel(), s.viewport()).map_err(|e| format!("{}/{name}: {e}", run.lang))?;
            ensure(back.abstract_tree().identical(s.abstract_tree()), || format!("{}/{name}: tree changed", run.lang))?;
            ensure(save_session(&back) == doc, || format!("{}/{name}: reload saves differently", run.lang))?;
            snapshots += 1;
            Ok(())
        };
        let mut s = replay(run, &mut check)?;
        check("final", &mut s)?;
    }
    Ok(format!("1000 random terms, {snapshots} corpus snapshots"))
}

fn determinism() -> Check {
    let mut files = 0;
    for run in RUNS {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for dir in &dirs {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_projed"));
            cmd.arg("run").arg(language_path(run.lang)).arg(run.start).arg(script_path(run.script)).arg("--out").arg(dir.path());
            if let Some(t) = run.tree {
                cmd.arg("--tree").arg(script_path(t));
            }
            let out = cmd.env_remove("PROJED_FUEL").output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{}: {}", run.lang, String::from_utf8_lossy(&out.stderr)))?;
        }
        let mut names: Vec<_> = fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let a = fs::read(dirs[0].path().join(&n)).unwrap();
            let b = fs::read(dirs[1].path().join(&n)).map_err(|e| format!("{}: {n:?}: {e}", run.lang))?;
            ensure(a == b, || format!("{}: {n:?} differs between runs", run.lang))?;
            files += 1;
        }
    }
    Ok(format!("{files} files identical"))
}

fn game() -> Check {
    let mut texts = Vec::new();
    let mut s = replay(run_named("dungeon"), |name, s| {
        if name == "map" {
            ensure(!s.scene().nodes.is_empty() && s.normal_form().functor() == Some("graph"), || "creation mode shows no graph".into())?;
        }
        texts.push((name.to_string(), render_text(s.scene())));
        if name == "back" {
            ensure(s.scene().nodes.is_empty(), || "play mode still has nodes".into())?;
            let graphic = s.scene().primitives.iter().filter(|p| !matches!(p.kind, PrimKind::Text { .. })).count();
            ensure(graphic == 0, || format!("{graphic} non-text primitives in play mode"))?;
        }
        Ok(())
    })?;
    let text = |n: &str| texts.iter().find(|(k, _)| k == n).map(|(_, t)| t.as_str()).unwrap_or("");
    ensure(text("start").starts_with("You are in the blue room.\nThe room is empty.\nKeys: red\n"), || text("start").into())?;
    ensure(text("green-room").contains("There is a red cage holding a blue key."), || text("green-room").into())?;
    ensure(text("unlocked").contains("You are in the green room.\nThe room is empty.\nKeys: red blue"), || text("unlocked").into())?;
    ensure(text("back").starts_with("You are in the blue room."), || text("back").into())?;
    // Back to creation mode and into play again: no cage here to unlock.
    press(&mut s, "c");
    press(&mut s, "p");
    ensure(matches!(press(&mut s, "u"), Outcome::Dropped(_)), || "unlock without a cage applied".into())?;
    Ok("create, p, n, u, s".into())
}

fn main() -> ExitCode {
    let checks: &[Criterion] = &[
        ("corpus parse", corpus_parse),
        ("DNA reproduction", dna),
        ("decision-tree mode toggle", decision_tree),
        ("lambda Y combinator", lambda),
        ("nested-graph dump round trip", nested_graph),
        ("class-model mixed mode", class_mixed_mode),
        ("edge-type gating", edge_gating),
        ("rewrite properties", rewrite_properties),
        ("persistence", persistence),
        ("determinism", determinism),
        ("game scenario", game),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = t.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {name} ({ms} ms): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({ms} ms): {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
