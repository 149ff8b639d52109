//! Lexing and s-expression reading with source positions.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A located diagnostic; the only error type the frontend surfaces.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct Diag {
    pub pos: Pos,
    pub message: String,
}

impl Diag {
    pub fn new(pos: Pos, message: impl Into<String>) -> Diag {
        Diag {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    Str(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::Str(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            _ => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
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
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read_string(&mut self, start: Pos) -> Result<SExpr, Diag> {
        self.bump(); // opening quote
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(Diag::new(start, "unterminated string literal")),
                Some('"') => {
                    // doubled quote is an escaped quote
                    if self.chars.peek() == Some(&'"') {
                        self.bump();
                        out.push('"');
                    } else {
                        return Ok(SExpr::Str(out, start));
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn read_quoted_symbol(&mut self, start: Pos) -> Result<SExpr, Diag> {
        self.bump(); // opening bar
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(Diag::new(start, "unterminated quoted symbol")),
                Some('|') => return Ok(SExpr::Atom(out, start)),
                Some(c) => out.push(c),
            }
        }
    }

    fn read_atom(&mut self, start: Pos) -> SExpr {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"' {
                break;
            }
            out.push(c);
            self.bump();
        }
        SExpr::Atom(out, start)
    }

    fn read_expr(&mut self) -> Result<Option<SExpr>, Diag> {
        self.skip_trivia();
        let start = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(Diag::new(start, "unterminated list: missing `)`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, start)));
                        }
                        Some(_) => match self.read_expr()? {
                            Some(e) => items.push(e),
                            None => {
                                return Err(Diag::new(start, "unterminated list: missing `)`"))
                            }
                        },
                    }
                }
            }
            ')' => Err(Diag::new(start, "unexpected `)`")),
            '"' => self.read_string(start).map(Some),
            '|' => self.read_quoted_symbol(start).map(Some),
            _ => Ok(Some(self.read_atom(start))),
        }
    }
}

/// Reads a whole input into top-level s-expressions.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, Diag> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    while let Some(e) = reader.read_expr()? {
        out.push(e);
    }
    Ok(out)
}
