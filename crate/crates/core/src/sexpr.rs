//! Reader and printer for the parenthesized surface syntax of language
//! definitions. `[` `]` are interchangeable with `(` `)`; `;` starts a
//! comment running to end of line.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String),
    Str(String),
    Int(i64),
    Bool(bool),
    Char(char),
    List(Vec<SExpr>, Span),
}

/// 1-based source position of the opening delimiter of a list.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

// Spans are metadata; two lists are the same form regardless of where they
// were read.
impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}
impl Eq for Span {}

impl SExpr {
    pub fn list(items: Vec<SExpr>) -> SExpr {
        SExpr::List(items, Span::default())
    }

    pub fn sym(s: &str) -> SExpr {
        SExpr::Symbol(s.to_string())
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            _ => None,
        }
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            SExpr::List(_, span) => Some(*span),
            _ => None,
        }
    }

    pub fn is_symbol(&self, s: &str) -> bool {
        self.as_symbol() == Some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReadError {
    #[error("{line}:{col}: unexpected `{found}`")]
    UnexpectedClose { line: usize, col: usize, found: char },
    #[error("{line}:{col}: unclosed `{open}`")]
    Unclosed { line: usize, col: usize, open: char },
    #[error("{line}:{col}: `{open}` closed by `{found}`")]
    Mismatched { line: usize, col: usize, open: char, found: char },
    #[error("{line}:{col}: bad character literal")]
    BadChar { line: usize, col: usize },
    #[error("{line}:{col}: unterminated string")]
    UnterminatedString { line: usize, col: usize },
    #[error("{line}:{col}: bad escape `\\{found}` in string")]
    BadEscape { line: usize, col: usize, found: char },
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read_all(&mut self) -> Result<Vec<SExpr>, ReadError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            match self.peek() {
                None => return Ok(out),
                Some(c @ (')' | ']')) => {
                    return Err(ReadError::UnexpectedClose { line: self.line, col: self.col, found: c })
                }
                Some(_) => out.push(self.read_form()?),
            }
        }
    }

    fn read_form(&mut self) -> Result<SExpr, ReadError> {
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some(open @ ('(' | '[')) => {
                self.bump();
                let close = if open == '(' { ')' } else { ']' };
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err(ReadError::Unclosed { line, col, open }),
                        Some(c) if c == close => {
                            self.bump();
                            return Ok(SExpr::List(items, Span { line, col }));
                        }
                        Some(c @ (')' | ']')) => {
                            return Err(ReadError::Mismatched { line: self.line, col: self.col, open, found: c })
                        }
                        Some(_) => items.push(self.read_form()?),
                    }
                }
            }
            Some('"') => self.read_string(line, col),
            Some('#') => self.read_hash(line, col),
            _ => Ok(self.read_atom()),
        }
    }

    fn read_string(&mut self, line: usize, col: usize) -> Result<SExpr, ReadError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(ReadError::UnterminatedString { line, col }),
                Some('"') => return Ok(SExpr::Str(s)),
                Some('\\') => {
                    let (el, ec) = (self.line, self.col);
                    match self.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('\\') => s.push('\\'),
                        Some('"') => s.push('"'),
                        Some(other) => return Err(ReadError::BadEscape { line: el, col: ec, found: other }),
                        None => return Err(ReadError::UnterminatedString { line, col }),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn read_hash(&mut self, line: usize, col: usize) -> Result<SExpr, ReadError> {
        self.bump();
        match self.bump() {
            Some('t') if self.at_delimiter() => Ok(SExpr::Bool(true)),
            Some('f') if self.at_delimiter() => Ok(SExpr::Bool(false)),
            Some('\\') => {
                let first = self.bump().ok_or(ReadError::BadChar { line, col })?;
                // Named characters like #\space; a single char otherwise.
                let mut name = String::from(first);
                while !self.at_delimiter() {
                    name.push(self.bump().unwrap_or_default());
                }
                match name.as_str() {
                    "space" => Ok(SExpr::Char(' ')),
                    "newline" => Ok(SExpr::Char('\n')),
                    "tab" => Ok(SExpr::Char('\t')),
                    _ if name.chars().count() == 1 => Ok(SExpr::Char(first)),
                    _ => Err(ReadError::BadChar { line, col }),
                }
            }
            _ => Err(ReadError::BadChar { line, col }),
        }
    }

    fn at_delimiter(&mut self) -> bool {
        match self.peek() {
            None => true,
            Some(c) => c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '"' | ';'),
        }
    }

    fn read_atom(&mut self) -> SExpr {
        let mut tok = String::new();
        while !self.at_delimiter() {
            tok.push(self.bump().unwrap_or_default());
        }
        match tok.parse::<i64>() {
            Ok(n) => SExpr::Int(n),
            Err(_) => SExpr::Symbol(tok),
        }
    }
}

/// Reads every top-level form in `text`.
pub fn read_sexpr(text: &str) -> Result<Vec<SExpr>, ReadError> {
    Reader { chars: text.chars().peekable(), line: 1, col: 1 }.read_all()
}

fn write_str_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Symbol(s) => f.write_str(s),
            SExpr::Str(s) => write_str_lit(f, s),
            SExpr::Int(n) => write!(f, "{n}"),
            SExpr::Bool(b) => f.write_str(if *b { "#t" } else { "#f" }),
            SExpr::Char(' ') => f.write_str("#\\space"),
            SExpr::Char('\n') => f.write_str("#\\newline"),
            SExpr::Char('\t') => f.write_str("#\\tab"),
            SExpr::Char(c) => write!(f, "#\\{c}"),
            SExpr::List(items, _) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}
