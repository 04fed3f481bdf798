use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{AgentId, Formula};

/// 1-based line and column, plus the byte offset into the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ParseError {
    #[error("{position}: expected {}, found {found}", expected.join(" or "))]
    Syntax { position: Position, expected: Vec<String>, found: String },
    #[error("{position}: unknown operator {operator:?}")]
    UnknownOperator { position: Position, operator: String },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownOperator { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Comma => "\",\"".into(),
            Tok::Tilde => "\"~\"".into(),
            Tok::Amp => "\"&\"".into(),
            Tok::Pipe => "\"|\"".into(),
            Tok::Arrow => "\"->\"".into(),
            Tok::DoubleArrow => "\"<->\"".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

// Characters that look like an attempt at an operator we do not support.
const OPERATOR_CHARS: &str = "!^=<>-+*/\\%$#@?;:.[]{}'\"`";

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        let pos = Position { line, column: col, offset };
        let mut width = 1;
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let peek = |k: usize| chars.get(i + k).map(|&(_, c)| c);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '~' => Tok::Tilde,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '-' if peek(1) == Some('>') => {
                width = 2;
                Tok::Arrow
            }
            '<' if peek(1) == Some('-') && peek(2) == Some('>') => {
                width = 3;
                Tok::DoubleArrow
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() {
                    let d = chars[j].1;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '=' {
                        j += 1;
                    } else {
                        break;
                    }
                }
                width = j - i;
                Tok::Ident(chars[i..j].iter().map(|&(_, c)| c).collect())
            }
            c if OPERATOR_CHARS.contains(c) || (!c.is_ascii() && !c.is_alphanumeric()) => {
                // Swallow a run of operator-ish symbols so "=>" reports as one.
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j].1;
                    let symbolic = OPERATOR_CHARS.contains(d) || (!d.is_ascii() && !d.is_alphanumeric());
                    if symbolic && !d.is_whitespace() {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let operator = chars[i..j].iter().map(|&(_, c)| c).collect();
                return Err(ParseError::UnknownOperator { position: pos, operator });
            }
            other => {
                return Err(ParseError::Syntax {
                    position: pos,
                    expected: primary_expected(),
                    found: format!("character {other:?}"),
                })
            }
        };
        toks.push((tok, pos));
        col += width;
        i += width;
    }
    let end = Position { line, column: col, offset: text.len() };
    toks.push((Tok::Eof, end));
    Ok(toks)
}

fn primary_expected() -> Vec<String> {
    ["identifier", "\"(\"", "\"~\"", "\"box\"", "\"dia\"", "\"diaMQ\"", "\"B(\"", "\"K(\""]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

const BINARY_EXPECTED: [&str; 4] = ["\"&\"", "\"|\"", "\"->\"", "\"<->\""];

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        let (tok, position) = &self.toks[self.at];
        ParseError::Syntax { position: *position, expected, found: tok.describe() }
    }

    fn expect(&mut self, want: Tok, extra: &[&str]) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let mut expected: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
            expected.push(want.describe());
            Err(self.error(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.imp()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let right = self.imp()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.imp()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let right = self.and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(kw) if matches!(kw.as_str(), "box" | "dia" | "diaMQ") => {
                self.bump();
                let inner = self.unary()?;
                Ok(match kw.as_str() {
                    "box" => Formula::nec(inner),
                    "dia" => Formula::poss(inner),
                    _ => Formula::poss_mq(inner),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if (name == "B" || name == "K") && *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let agent = match self.bump() {
                    Tok::Ident(a) => canonical_agent(&a),
                    _ => {
                        self.at -= 1;
                        return Err(self.error(vec!["agent identifier".into()]));
                    }
                };
                self.expect(Tok::Comma, &[])?;
                let inner = self.formula()?;
                self.expect(Tok::RParen, &BINARY_EXPECTED)?;
                Ok(if name == "B" { Formula::believes(agent, inner) } else { Formula::knows(agent, inner) })
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, &BINARY_EXPECTED)?;
                Ok(inner)
            }
            _ => Err(self.error(primary_expected())),
        }
    }
}

// Lower-case spellings of the two canonical agents are folded onto them.
// Any other agent name is kept exactly as written.
fn canonical_agent(name: &str) -> AgentId {
    let folded = match name {
        "r" => "R",
        "h" => "H",
        other => other,
    };
    AgentId::new(folded).expect("lexer only yields identifiers")
}

/// Parses the text syntax:
///
/// ```text
/// formula := iff ;  iff := imp ( "<->" imp )* ;  imp := or ( "->" imp )?
/// or := and ( "|" and )* ;  and := unary ( "&" unary )*
/// unary := "~" unary | "box" unary | "dia" unary | "diaMQ" unary | primary
/// primary := ident | ("B"|"K") "(" agent "," formula ")" | "(" formula ")"
/// ```
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        let mut expected: Vec<String> = BINARY_EXPECTED.iter().map(|s| s.to_string()).collect();
        expected.push("end of input".into());
        return Err(p.error(expected));
    }
    Ok(f)
}
