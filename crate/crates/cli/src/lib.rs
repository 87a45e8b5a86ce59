//! Command implementations behind the `projed` binary. They are kept in a
//! library so tests can drive them without spawning processes.

pub mod script;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use projed::langdef::{complete_repetitions, term_from_sexpr, validate_language, LanguageDef};
use projed::persist::{load_session, load_term, read_language_file, save_session, LanguageFileError};
use projed::rewrite::Fuel;
use projed::scene::{render_svg, render_text, LayoutCache, Viewport};
use projed::session::{Event, Outcome, Session, SessionError};
use projed::sexpr::read_sexpr;
use projed::term::Term;
use projed_bridge::{Server, DEFAULT_PORT};

use script::{parse_script, resolve, to_event, Step};

pub const EXIT_OK: i32 = 0;
/// Bad input: language diagnostics, unparsable script or document.
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_FUEL: i32 = 3;

/// A failure that ends a command, with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INVALID, message: message.into() }
    }

    fn io(path: &Path, e: io::Error) -> Failure {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<LanguageFileError> for Failure {
    fn from(e: LanguageFileError) -> Failure {
        let code = match e {
            LanguageFileError::Io { .. } => EXIT_IO,
            LanguageFileError::Parse { .. } => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

/// Reads a language file and rejects it if validation finds anything.
pub fn load_checked(path: &Path) -> Result<LanguageDef, Failure> {
    let def = read_language_file(path)?;
    let diags = validate_language(&def);
    if diags.is_empty() {
        return Ok(def);
    }
    let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
    Err(Failure::invalid(lines.join("\n")))
}

/// `check`: prints one `file:line:col: message` line per problem.
pub fn cmd_check(path: &Path, out: &mut dyn Write) -> i32 {
    match load_checked(path) {
        Ok(def) => {
            let _ = writeln!(out, "{}: language {} is valid", path.display(), def.name);
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(out, "{}", f.message);
            f.code
        }
    }
}

/// Parses `WxH`.
pub fn parse_viewport(s: &str) -> Result<Viewport, String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("viewport `{s}` is not WxH"))?;
    let dim = |v: &str| match v.trim().parse::<f64>() {
        Ok(n) if n.is_finite() && n > 0.0 => Ok(n),
        _ => Err(format!("bad viewport dimension `{v}`")),
    };
    Ok(Viewport { width: dim(w)?, height: dim(h)? })
}

/// A starting tree from a file: a saved term document, or an s-expression
/// whose missing repetition holes are filled in from the grammar.
pub fn read_tree(path: &Path, def: &LanguageDef, start: &str) -> Result<Term, Failure> {
    let text = read(path)?;
    let bad = |m: String| Failure::invalid(format!("{}: {m}", path.display()));
    if text.trim_start().starts_with('<') {
        return load_term(&text).map_err(|e| bad(e.to_string()));
    }
    let forms = read_sexpr(&text).map_err(|e| bad(e.to_string()))?;
    let [form] = forms.as_slice() else {
        return Err(bad(format!("expected one tree, found {}", forms.len())));
    };
    let t = term_from_sexpr(form).map_err(|e| bad(e.to_string()))?;
    complete_repetitions(def, start, &t).map_err(|e| bad(e.to_string()))
}

pub struct RunOptions {
    pub language: PathBuf,
    pub start: String,
    pub script: PathBuf,
    pub out: PathBuf,
    pub fuel: Fuel,
    pub viewport: Viewport,
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub applied: usize,
    pub dropped: usize,
    pub failed: usize,
    pub fuel_exhausted: bool,
    /// Files written, in order.
    pub written: Vec<PathBuf>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.fuel_exhausted {
            EXIT_FUEL
        } else {
            EXIT_OK
        }
    }
}

fn snapshot(s: &Session, dir: &Path, name: &str, report: &mut RunReport) -> Result<(), Failure> {
    for (ext, contents) in [("svg", render_svg(s.scene())), ("txt", render_text(s.scene())), ("pxml", save_session(s))] {
        let path = dir.join(format!("{name}.{ext}"));
        write(&path, &contents)?;
        report.written.push(path);
    }
    Ok(())
}

fn note_failure(e: &SessionError, report: &mut RunReport) {
    report.failed += 1;
    report.fuel_exhausted |= e.is_fuel();
}

/// Dispatches the event a step stands for. Snapshot steps give `None`.
pub fn apply_step(s: &mut Session, step: &Step) -> Result<Option<Outcome>, String> {
    let Some(event) = to_event(s, step)? else {
        return Ok(None);
    };
    let outcome = s.dispatch(event);
    // An edge line naming its type answers the menu the drag opens.
    if let (Outcome::MenuPending(menu), Step::Edge { source, edge_type: Some(t), .. }) = (&outcome, step) {
        let source = resolve(s, source, false)?;
        return Ok(Some(match menu.entries.iter().find(|e| &e.label == t) {
            Some(entry) => s.dispatch(Event::MenuSelected { target: source, message: entry.message.clone() }),
            None => Outcome::Dropped(format!("`{t}` is not among {:?}", menu.labels())),
        }));
    }
    Ok(Some(outcome))
}

/// `run`: replays a script, writing snapshots and a final state. Problems
/// with individual lines are logged and the replay goes on.
pub fn cmd_run(opts: &RunOptions, log: &mut dyn Write) -> Result<RunReport, Failure> {
    let def = Arc::new(load_checked(&opts.language)?);
    let steps = parse_script(&read(&opts.script)?)
        .map_err(|e| Failure::invalid(format!("{}:{e}", opts.script.display())))?;
    let tree = opts.tree.as_deref().map(|p| read_tree(p, &def, &opts.start)).transpose()?;
    fs::create_dir_all(&opts.out).map_err(|e| Failure::io(&opts.out, e))?;

    let mut report = RunReport::default();
    let mut s = match Session::with_options(def, &opts.start, tree, LayoutCache::default(), opts.fuel, opts.viewport) {
        Ok(s) => s,
        Err(e) if e.is_fuel() => return Err(Failure { code: EXIT_FUEL, message: e.to_string() }),
        Err(e) => return Err(Failure::invalid(e.to_string())),
    };
    for e in s.diagnostics() {
        note_failure(e, &mut report);
    }

    for (n, step) in steps.iter().enumerate() {
        if let Step::Snapshot(name) = step {
            snapshot(&s, &opts.out, name, &mut report)?;
            continue;
        }
        let outcome = match apply_step(&mut s, step) {
            Ok(Some(o)) => o,
            Ok(None) => continue,
            Err(m) => {
                let _ = writeln!(log, "step {}: {m}", n + 1);
                report.failed += 1;
                continue;
            }
        };
        match outcome {
            Outcome::Applied => report.applied += 1,
            Outcome::MenuPending(menu) => {
                let _ = writeln!(log, "step {}: menu offered: {}", n + 1, menu.labels().join(", "));
            }
            Outcome::Dropped(why) => {
                let _ = writeln!(log, "step {}: dropped: {why}", n + 1);
                report.dropped += 1;
            }
            Outcome::Failed(e) => {
                let _ = writeln!(log, "step {}: {e}", n + 1);
                note_failure(&e, &mut report);
            }
        }
    }
    snapshot(&s, &opts.out, "final", &mut report)?;
    Ok(report)
}

/// `render`: draws a saved session. A `.txt` output gets the text
/// projection, anything else SVG.
pub fn cmd_render(session: &Path, language: &Path, out: &Path) -> Result<(), Failure> {
    let def = Arc::new(load_checked(language)?);
    let doc = read(session)?;
    let s = load_session(&doc, def, Fuel::default(), Viewport::default())
        .map_err(|e| Failure::invalid(format!("{}: {e}", session.display())))?;
    let contents = if out.extension().is_some_and(|e| e == "txt") { render_text(s.scene()) } else { render_svg(s.scene()) };
    write(out, &contents)
}

/// `serve`: runs the editor bridge until interrupted.
pub fn cmd_serve(language: &Path, start: &str, port: Option<u16>, log: &mut dyn Write) -> Result<(), Failure> {
    let def = Arc::new(load_checked(language)?);
    let session = Session::new(def, start).map_err(|e| Failure::invalid(e.to_string()))?;
    let port = port.unwrap_or(DEFAULT_PORT);
    let server = Server::bind(("127.0.0.1", port))
        .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot listen on port {port}: {e}") })?;
    let handle = server.shutdown_handle().map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
    ctrlc::set_handler(move || handle.shutdown())
        .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot install interrupt handler: {e}") })?;
    if let Ok(addr) = server.local_addr() {
        let _ = writeln!(log, "listening on {addr}");
    }
    server.run(session).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
    Ok(())
}
