//! Recursive-descent parser for the concrete formula grammar.
//!
//! ```text
//! formula  := "true" | "false" | prop
//!           | "~" formula
//!           | "(" formula ("->"|"&"|"|"|"<->") formula ")"
//!           | ("K"|"hatK") "[" agent "]" formula
//!           | ("C"|"D"|"E"|"F") "[" agent ("," agent)* "]" formula
//!           | ("up"|"down"|"set") "[" agent ";" "{" (skill ("," skill)*)? "}" "]" formula
//!           | "learn" "[" agent ";" agent "]" formula
//!           | ("bp"|"bm"|"ba"|"dp"|"dm"|"da") "[" agent "]" formula
//!           | "A" formula
//! ```
//!
//! `hatK`, `dp`, `dm`, `da` expand to `~Op~`. Identifiers match
//! `[A-Za-z][A-Za-z0-9_]*`; the operator words above are reserved. Names
//! starting with `f_` or `ueg_` or containing `__` are reserved for
//! generated vocabulary and rejected unless parsing in internal mode.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{build, Fm, Formula};
use crate::ids::{AgentId, Group, PropId, SkillId};
use crate::skill::SkillValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "true", "false", "K", "hatK", "C", "D", "E", "F", "up", "down", "set", "learn", "bp", "bm",
    "ba", "dp", "dm", "da", "A",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Tilde,
    Arrow,
    Amp,
    Pipe,
    Iff,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "identifier {:?}", n),
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::LBracket => "'['",
            Tok::RBracket => "']'",
            Tok::LBrace => "'{'",
            Tok::RBrace => "'}'",
            Tok::Semi => "';'",
            Tok::Comma => "','",
            Tok::Tilde => "'~'",
            Tok::Arrow => "'->'",
            Tok::Amp => "'&'",
            Tok::Pipe => "'|'",
            Tok::Iff => "'<->'",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if let Some(c) = c {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        c
    }

    fn next_token(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let err = |m: String| ParseError {
            line,
            col,
            message: m,
        };
        let Some(&c) = self.chars.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '[' => {
                self.bump();
                Tok::LBracket
            }
            ']' => {
                self.bump();
                Tok::RBracket
            }
            '{' => {
                self.bump();
                Tok::LBrace
            }
            '}' => {
                self.bump();
                Tok::RBrace
            }
            ';' => {
                self.bump();
                Tok::Semi
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '~' => {
                self.bump();
                Tok::Tilde
            }
            '&' => {
                self.bump();
                Tok::Amp
            }
            '|' => {
                self.bump();
                Tok::Pipe
            }
            '-' => {
                self.bump();
                if self.chars.peek() == Some(&'>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(err("expected '->'".into()));
                }
            }
            '<' => {
                self.bump();
                if self.bump() == Some('-') && self.chars.peek() == Some(&'>') {
                    self.bump();
                    Tok::Iff
                } else {
                    return Err(err("expected '<->'".into()));
                }
            }
            c if c.is_ascii_alphanumeric() => {
                // Digit-led names are lexed too; they are legal only where a
                // skill is expected (dataset attributes are often numbered).
                let mut name = String::new();
                while matches!(self.chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
                {
                    name.push(self.bump().unwrap());
                }
                Tok::Ident(name)
            }
            c => return Err(err(format!("unexpected character {:?}", c))),
        };
        Ok((tok, line, col))
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    allow_reserved: bool,
}

impl Parser {
    fn new(text: &str, allow_reserved: bool) -> Result<Parser, ParseError> {
        let mut lx = Lexer::new(text);
        let mut toks = Vec::new();
        loop {
            let t = lx.next_token()?;
            let eof = t.0 == Tok::Eof;
            toks.push(t);
            if eof {
                break;
            }
        }
        Ok(Parser {
            toks,
            pos: 0,
            allow_reserved,
        })
    }

    fn peek(&self) -> &(Tok, usize, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let (_, line, col) = *self.peek();
        ParseError {
            line,
            col,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let (tok, line, col) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(ParseError {
                line,
                col,
                message: format!("expected {}, found {}", want, tok),
            })
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        let (tok, line, col) = self.bump();
        match tok {
            Tok::Ident(n) => {
                if KEYWORDS.contains(&n.as_str()) {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("{:?} is a reserved word and cannot name {}", n, what),
                    });
                }
                if what != "skill" && !n.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("{} name {:?} must start with a letter", what, n),
                    });
                }
                if !self.allow_reserved
                    && (n.starts_with("f_") || n.starts_with("ueg_") || n.contains("__"))
                {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!(
                            "{:?} uses the reserved generated-name space (f_*, ueg_*, '__')",
                            n
                        ),
                    });
                }
                Ok(n)
            }
            other => Err(ParseError {
                line,
                col,
                message: format!("expected {} name, found {}", what, other),
            }),
        }
    }

    fn bracketed_agent(&mut self) -> Result<AgentId, ParseError> {
        self.expect(Tok::LBracket)?;
        let a = self.name("agent")?;
        self.expect(Tok::RBracket)?;
        Ok(AgentId::new(&a))
    }

    fn group(&mut self) -> Result<Group, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut members = vec![AgentId::new(&self.name("agent")?)];
        while self.peek().0 == Tok::Comma {
            self.bump();
            members.push(AgentId::new(&self.name("agent")?));
        }
        self.expect(Tok::RBracket)?;
        Group::new(members).ok_or_else(|| self.error_here("empty group".into()))
    }

    fn skill_set(&mut self) -> Result<SkillValue, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut skills = Vec::new();
        if self.peek().0 != Tok::RBrace {
            skills.push(SkillId::new(&self.name("skill")?));
            while self.peek().0 == Tok::Comma {
                self.bump();
                skills.push(SkillId::new(&self.name("skill")?));
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(SkillValue::classical(skills))
    }

    fn formula(&mut self) -> Result<Fm, ParseError> {
        let (tok, line, col) = self.bump();
        match tok {
            Tok::Ident(word) => self.ident_formula(word, line, col),
            Tok::Tilde => Ok(build::not(self.formula()?)),
            Tok::LParen => {
                let lhs = self.formula()?;
                let (op, line, col) = self.bump();
                let rhs = self.formula()?;
                self.expect(Tok::RParen)?;
                match op {
                    Tok::Arrow => Ok(build::implies(lhs, rhs)),
                    Tok::Amp => Ok(build::and(lhs, rhs)),
                    Tok::Pipe => Ok(build::or(lhs, rhs)),
                    Tok::Iff => Ok(build::iff(lhs, rhs)),
                    other => Err(ParseError {
                        line,
                        col,
                        message: format!("expected a binary connective, found {}", other),
                    }),
                }
            }
            other => Err(ParseError {
                line,
                col,
                message: format!("expected a formula, found {}", other),
            }),
        }
    }

    fn ident_formula(&mut self, word: String, line: usize, col: usize) -> Result<Fm, ParseError> {
        match word.as_str() {
            "true" => Ok(build::top()),
            "false" => Ok(build::bot()),
            "A" => Ok(build::univ(self.formula()?)),
            "K" => {
                let a = self.bracketed_agent()?;
                Ok(build::k(a, self.formula()?))
            }
            "hatK" => {
                let a = self.bracketed_agent()?;
                Ok(build::hat_k(a, self.formula()?))
            }
            "C" | "D" | "E" | "F" => {
                let g = self.group()?;
                let body = self.formula()?;
                Ok(match word.as_str() {
                    "C" => build::c(g, body),
                    "D" => build::d(g, body),
                    "E" => build::e(g, body),
                    _ => build::fk(g, body),
                })
            }
            "up" | "down" | "set" => {
                self.expect(Tok::LBracket)?;
                let a = AgentId::new(&self.name("agent")?);
                self.expect(Tok::Semi)?;
                let s = self.skill_set()?;
                self.expect(Tok::RBracket)?;
                let body = self.formula()?;
                Ok(match word.as_str() {
                    "up" => build::up(a, s, body),
                    "down" => build::down(a, s, body),
                    _ => build::set_to(a, s, body),
                })
            }
            "learn" => {
                self.expect(Tok::LBracket)?;
                let learner = AgentId::new(&self.name("agent")?);
                self.expect(Tok::Semi)?;
                let source = AgentId::new(&self.name("agent")?);
                self.expect(Tok::RBracket)?;
                Ok(build::learn(learner, source, self.formula()?))
            }
            "bp" | "bm" | "ba" | "dp" | "dm" | "da" => {
                let a = self.bracketed_agent()?;
                let body = self.formula()?;
                Ok(match word.as_str() {
                    "bp" => build::bp(a, body),
                    "bm" => build::bm(a, body),
                    "ba" => build::ba(a, body),
                    "dp" => build::dp(a, body),
                    "dm" => build::dm(a, body),
                    _ => build::da(a, body),
                })
            }
            _ => {
                // plain atomic proposition; run the same name checks
                if !word.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("proposition name {:?} must start with a letter", word),
                    });
                }
                if !self.allow_reserved
                    && (word.starts_with("f_") || word.starts_with("ueg_") || word.contains("__"))
                {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!(
                            "{:?} uses the reserved generated-name space (f_*, ueg_*, '__')",
                            word
                        ),
                    });
                }
                Ok(Arc::new(Formula::Atom(PropId::new(&word))))
            }
        }
    }

    fn finish(&mut self, f: Fm) -> Result<Fm, ParseError> {
        let (tok, line, col) = self.bump();
        if tok == Tok::Eof {
            Ok(f)
        } else {
            Err(ParseError {
                line,
                col,
                message: format!("trailing input: found {}", tok),
            })
        }
    }
}

/// Parses user input. Names in the generated-vocabulary space (`f_*`,
/// `ueg_*`, or containing `__`) are rejected.
pub fn parse(text: &str) -> Result<Fm, ParseError> {
    let mut p = Parser::new(text, false)?;
    let f = p.formula()?;
    p.finish(f)
}

/// Parses trusted text, accepting generated names. Used by tests and
/// internal round-trips.
pub fn parse_internal(text: &str) -> Result<Fm, ParseError> {
    let mut p = Parser::new(text, true)?;
    let f = p.formula()?;
    p.finish(f)
}
