//! Tokenizer shared by the fact-file reader and the mapping DSL parser.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// `[A-Za-z0-9_]+`
    Ident(String),
    /// single-quoted string with `''` as the escaped quote
    Quoted(String),
    Question,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Slash,
    Amp,
    Pipe,
    Bang,
    Eq,
    Neq,
    Lt,
    Le,
    Arrow,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn syntax_error(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&ch) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        let tok = match ch {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            '\'' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match bump(&mut chars) {
                        None => return Err(syntax_error(tl, tc, "unterminated quoted string")),
                        Some('\'') => {
                            if chars.peek() == Some(&'\'') {
                                bump(&mut chars);
                                s.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Tok::Quoted(s)
            }
            _ => {
                bump(&mut chars);
                let next = chars.peek().copied();
                match (ch, next) {
                    ('-', Some('>')) => {
                        bump(&mut chars);
                        Tok::Arrow
                    }
                    ('!', Some('=')) => {
                        bump(&mut chars);
                        Tok::Neq
                    }
                    ('<', Some('=')) => {
                        bump(&mut chars);
                        Tok::Le
                    }
                    ('?', _) => Tok::Question,
                    ('(', _) => Tok::LParen,
                    (')', _) => Tok::RParen,
                    ('[', _) => Tok::LBracket,
                    (']', _) => Tok::RBracket,
                    ('{', _) => Tok::LBrace,
                    ('}', _) => Tok::RBrace,
                    (',', _) => Tok::Comma,
                    ('.', _) => Tok::Dot,
                    (':', _) => Tok::Colon,
                    ('/', _) => Tok::Slash,
                    ('&', _) => Tok::Amp,
                    ('|', _) => Tok::Pipe,
                    ('!', _) => Tok::Bang,
                    ('=', _) => Tok::Eq,
                    ('<', _) => Tok::Lt,
                    _ => return Err(syntax_error(tl, tc, format!("unexpected character {ch:?}"))),
                }
            }
        };
        out.push(Token { tok, line: tl, col: tc });
    }
    Ok(out)
}

/// Cursor over a token stream with position-aware errors.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self> {
        let toks = tokenize(text)?;
        let lines = text.split('\n').count().max(1);
        let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Ok(Cursor { toks, pos: 0, end: (lines, last_col) })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.col))
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.position();
        syntax_error(line, col, msg)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_operators_and_positions() {
        let toks = tokenize("tgd: R(x,'a''b') -> S(x).\n# c\n x <= y != z").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert!(kinds.contains(&Tok::Arrow));
        assert!(kinds.contains(&Tok::Quoted("a'b".into())));
        assert!(kinds.contains(&Tok::Le));
        assert!(kinds.contains(&Tok::Neq));
        let x = toks.iter().rev().find(|t| t.tok == Tok::Ident("x".into())).unwrap();
        assert_eq!((x.line, x.col), (3, 2));
    }

    #[test]
    fn unterminated_string() {
        assert!(tokenize("'abc").is_err());
    }
}
