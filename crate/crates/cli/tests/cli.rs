use std::fs;
use std::io::{BufRead, BufReader};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use projed::rewrite::Fuel;
use projed::scene::Viewport;
use projed_bridge::{Client, ServerMessage};
use projed_cli::{cmd_render, cmd_run, RunOptions, EXIT_FUEL, EXIT_INVALID, EXIT_IO};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn corpus(name: &str) -> PathBuf {
    root().join("../core/corpus").join(format!("{name}.pld"))
}

fn script(name: &str) -> PathBuf {
    root().join("scripts").join(name)
}

fn projed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projed")).args(args).env_remove("PROJED_FUEL").output().unwrap()
}

fn opts(lang: &str, start: &str, script_name: &str, out: &Path) -> RunOptions {
    RunOptions {
        language: corpus(lang),
        start: start.into(),
        script: script(script_name),
        out: out.to_path_buf(),
        fuel: Fuel::default(),
        viewport: Viewport::default(),
        tree: None,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_accepts_the_corpus() {
    for name in ["dna", "boxes", "lambda", "nested-graph", "class-models", "use-cases", "dungeon"] {
        let out = projed(&["check", s(&corpus(name))]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn check_reports_positions_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pld");
    fs::write(&bad, "(deflang Broken\n  (abstract-syntax (top (nowhere)))\n  (transform-rules)\n  (reduce-rules))\n").unwrap();
    let out = projed(&["check", s(&bad)]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    let rest = first.strip_prefix(&format!("{}:", bad.display())).unwrap();
    let mut parts = rest.splitn(3, ':');
    assert!(parts.next().unwrap().parse::<usize>().is_ok(), "{first}");
    assert!(parts.next().unwrap().parse::<usize>().is_ok(), "{first}");

    let unclosed = dir.path().join("unclosed.pld");
    fs::write(&unclosed, "(deflang X\n  (abstract-syntax\n").unwrap();
    let out = projed(&["check", s(&unclosed)]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with(&format!("{}:2:3:", unclosed.display())));

    let out = projed(&["check", s(&dir.path().join("missing.pld"))]);
    assert_eq!(out.status.code(), Some(EXIT_IO));
}

#[test]
fn dna_script_writes_snapshots_and_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_run(&opts("dna", "DNA", "dna.script", dir.path()), &mut Vec::new()).unwrap();
    assert_eq!((report.applied, report.dropped, report.failed), (6, 0, 0));
    for name in ["gene", "final"] {
        for ext in ["svg", "txt", "pxml"] {
            assert!(dir.path().join(format!("{name}.{ext}")).is_file(), "{name}.{ext}");
        }
    }
    let text = fs::read_to_string(dir.path().join("gene.txt")).unwrap();
    assert!(text.contains("AACTGG"), "{text}");
    let svg = fs::read_to_string(dir.path().join("gene.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    // Identities are numbered per process, so each run gets its own.
    let (lang, sc) = (corpus("dungeon"), script("dungeon.script"));
    for dir in [&a, &b] {
        let out = projed(&["run", s(&lang), "game", s(&sc), "--out", s(dir.path())]);
        assert!(out.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6 * 3);
    for n in names {
        assert!(fs::read(a.path().join(&n)).unwrap() == fs::read(b.path().join(&n)).unwrap(), "{n:?} differs");
    }
}

/// Drops `data-id` values, which name identities coined while reducing.
fn without_ids(svg: &str) -> String {
    svg.split("data-id=\"").enumerate().map(|(i, part)| if i == 0 { part } else { part.split_once('"').unwrap().1 }).collect()
}

#[test]
fn seed_tree_and_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts("boxes", "root", "boxes.script", dir.path());
    o.tree = Some(script("animal.tree"));
    cmd_run(&o, &mut Vec::new()).unwrap();
    // Reduction coins fresh identities, so only the text projections repeat.
    let read = |n: &str| fs::read_to_string(dir.path().join(n)).unwrap();
    assert!(read("tree.txt") == read("tree-again.txt"));
    assert!(read("boxes.txt") == read("boxes-again.txt"));
    assert!(read("tree.txt") != read("boxes.txt"));
    assert!(read("tree.txt").contains("hair?"));

    let svg = dir.path().join("rendered.svg");
    cmd_render(&dir.path().join("final.pxml"), &corpus("boxes"), &svg).unwrap();
    let rendered = fs::read_to_string(&svg).unwrap();
    assert_eq!(without_ids(&rendered), without_ids(&read("final.svg")));
    let txt = dir.path().join("rendered.txt");
    cmd_render(&dir.path().join("final.pxml"), &corpus("boxes"), &txt).unwrap();
    assert!(fs::read(&txt).unwrap() == fs::read(dir.path().join("final.txt")).unwrap());
}

#[test]
fn render_rejects_a_session_for_another_language() {
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&opts("dna", "DNA", "dna.script", dir.path()), &mut Vec::new()).unwrap();
    let out = projed(&["render", s(&dir.path().join("final.pxml")), s(&corpus("boxes")), s(&dir.path().join("x.svg"))]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DNA"));
}

#[test]
fn bad_lines_are_logged_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.script");
    fs::write(&sc, "menu @hole[0] a\nmenu @hole[9] a\nmenu @hole[0] z\nkey -1 q\nsnapshot one\n").unwrap();
    let mut o = opts("dna", "DNA", "dna.script", &dir.path().join("out"));
    o.script = sc;
    let mut log = Vec::new();
    let report = cmd_run(&o, &mut log).unwrap();
    let log = String::from_utf8(log).unwrap();
    assert_eq!(report.applied, 1);
    assert_eq!(report.failed, 2, "{log}");
    assert_eq!(report.dropped, 1, "{log}");
    assert!(log.contains("step 2: selector @hole[9] matches nothing"), "{log}");
    assert!(dir.path().join("out/one.pxml").is_file());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn unparsable_script_is_rejected_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.script");
    fs::write(&sc, "# fine\nwiggle 3\n").unwrap();
    let out = projed(&["run", s(&corpus("dna")), "DNA", s(&sc), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn fuel_exhaustion_exits_with_its_own_status() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let tree = script("y-ones.tree");
    let (lang, sc) = (corpus("lambda"), script("lambda.script"));
    let args = ["run", s(&lang), "exp", s(&sc), "--out", s(&out_dir), "--tree", s(&tree)];
    let out = Command::new(env!("CARGO_BIN_EXE_projed")).args(args).env("PROJED_FUEL", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FUEL), "{}", String::from_utf8_lossy(&out.stderr));
    let out = projed(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("step6.txt").is_file());
}

#[test]
fn viewport_and_fuel_flags_are_validated() {
    let base = ["run", "x.pld", "s", "x.script"];
    for extra in [["--viewport", "100"], ["--viewport", "0x10"], ["--fuel", "0"], ["--fuel", "lots"]] {
        let out = projed(&[&base[..], &extra[..]].concat());
        assert_eq!(out.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn serve_fails_cleanly() {
    let busy = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let out = projed(&["serve", s(&corpus("dna")), "DNA", "--port", &port]);
    assert_eq!(out.status.code(), Some(EXIT_IO));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pld");
    fs::write(&bad, "(deflang").unwrap();
    let out = projed(&["serve", s(&bad), "x", "--port", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    let out = projed(&["serve", s(&corpus("dna")), "nope", "--port", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
}

/// Kills the server if the test fails before stopping it.
struct Running(Child);

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_answers_and_stops_on_interrupt() {
    let mut child = Running(
        Command::new(env!("CARGO_BIN_EXE_projed"))
            .args(["serve", s(&corpus("dna")), "DNA", "--port", "0"])
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap(),
    );
    let mut line = String::new();
    BufReader::new(child.0.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("{line}")).to_string();
    let mut client = Client::connect(&addr).unwrap();
    let first = client.recv().unwrap();
    assert!(matches!(first, ServerMessage::Scene { .. }), "{first:?}");
    drop(client);
    let status = Command::new("kill").args(["-INT", &child.0.id().to_string()]).status().unwrap();
    assert!(status.success());
    assert!(child.0.wait().unwrap().success());
}
