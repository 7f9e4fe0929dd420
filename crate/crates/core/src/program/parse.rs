use std::collections::HashSet;

use thiserror::Error;

use super::{Atom, GroundProgram, Literal, ProbFact, Rule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: duplicate probabilistic fact for `{atom}`")]
    DuplicateFact { line: usize, col: usize, atom: Atom },
    #[error("{line}:{col}: probability {value} outside [0,1]")]
    ProbabilityOutOfRange { line: usize, col: usize, value: f64 },
}

/// Parses a complete program. Facts, rules and queries keep their source
/// order; `%` comments run to the end of the line.
pub fn parse_program(text: &str) -> Result<GroundProgram, ParseError> {
    let mut p = Parser::new(text);
    let mut program = GroundProgram::default();
    let mut seen_facts = HashSet::new();
    loop {
        p.skip_trivia();
        if p.at_end() {
            break;
        }
        let (line, col) = (p.line, p.col);
        let c = p.peek().unwrap();
        if c.is_ascii_digit() || c == '.' {
            let prob = p.float()?;
            p.expect_str("::")?;
            let atom = p.atom()?;
            p.expect('.')?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(ParseError::ProbabilityOutOfRange {
                    line,
                    col,
                    value: prob,
                });
            }
            if !seen_facts.insert(atom.clone()) {
                return Err(ParseError::DuplicateFact { line, col, atom });
            }
            program.facts.push(ProbFact { atom, prob });
            continue;
        }
        let head = p.atom()?;
        p.skip_trivia();
        if head.name == "query" && head.args.is_empty() && p.peek() == Some('(') {
            // `query(` followed by an atom; `query` itself is reserved.
            p.bump();
            let q = p.atom()?;
            p.expect(')')?;
            p.expect('.')?;
            program.queries.push(q);
            continue;
        }
        match p.peek() {
            Some('.') => {
                p.bump();
                program.rules.push(Rule {
                    head,
                    body: Vec::new(),
                });
            }
            Some(':') => {
                p.expect_str(":-")?;
                let mut body = vec![p.literal()?];
                loop {
                    p.skip_trivia();
                    match p.peek() {
                        Some(',') => {
                            p.bump();
                            body.push(p.literal()?);
                        }
                        Some('.') => {
                            p.bump();
                            break;
                        }
                        _ => return Err(p.error("expected `,` or `.` in rule body")),
                    }
                }
                program.rules.push(Rule { head, body });
            }
            _ => return Err(p.error("expected `:-` or `.` after atom")),
        }
    }
    Ok(program)
}

pub(super) fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text);
    let atom = p.atom()?;
    p.skip_trivia();
    if !p.at_end() {
        return Err(p.error("trailing input after atom"));
    }
    Ok(atom)
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
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

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '%' {
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

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn expect_str(&mut self, want: &str) -> Result<(), ParseError> {
        self.skip_trivia();
        for w in want.chars() {
            match self.peek() {
                Some(c) if c == w => {
                    self.bump();
                }
                _ => return Err(self.error(format!("expected `{want}`"))),
            }
        }
        Ok(())
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn float(&mut self) -> Result<f64, ParseError> {
        self.skip_trivia();
        let mut s = self.take_while(|c| c.is_ascii_digit());
        if self.peek() == Some('.') {
            // `1.` followed by `::` is not a fraction; only consume the dot
            // when a digit follows.
            let mut ahead = self.chars.clone();
            ahead.next();
            if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                s.push('.');
                s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            s.push('e');
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                s.push(sign);
                self.bump();
            }
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        s.parse::<f64>()
            .map_err(|_| self.error(format!("malformed probability `{s}`")))
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return Err(self.error("expected identifier starting with a lowercase letter")),
        }
        Ok(self.take_while(|c| c.is_ascii_alphanumeric() || c == '_'))
    }

    fn constant(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
            _ => return Err(self.error("expected constant")),
        }
        Ok(self.take_while(|c| c.is_ascii_alphanumeric() || c == '_'))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let name = self.identifier()?;
        let mut args = Vec::new();
        self.skip_trivia();
        if self.peek() == Some('(') && name != "query" {
            self.bump();
            args.push(self.constant()?);
            loop {
                self.skip_trivia();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                        args.push(self.constant()?);
                    }
                    Some(')') => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)` in argument list")),
                }
            }
        }
        Ok(Atom { name, args })
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        self.skip_trivia();
        if self.peek() == Some('\\') {
            self.expect_str("\\+")?;
            return Ok(Literal::neg(self.atom()?));
        }
        Ok(Literal::pos(self.atom()?))
    }
}
