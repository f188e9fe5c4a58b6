use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func};

/// Deepest nesting the parser accepts before reporting an error instead of
/// risking the stack.
const MAX_DEPTH: usize = 200;

/// A syntax error, located by byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    fn new(offset: usize, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Self { offset, expected: expected.into(), found: found.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number `{v}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push(Token { tok, start, end: i });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            i = scan_number(bytes, i);
            // Nothing word-like may touch a number: "2x1" and "1.2.3" are both malformed.
            let mut bad = i;
            while bad < bytes.len() && (bytes[bad].is_ascii_alphanumeric() || bytes[bad] == b'_' || bytes[bad] == b'.') {
                bad += 1;
            }
            let lexeme = &text[start..bad];
            let value = if bad == i { lexeme.parse::<f64>().ok().filter(|v| v.is_finite()) } else { None };
            match value {
                Some(v) => out.push(Token { tok: Tok::Num(v), start, end: i }),
                None => return Err(ParseError::new(start, "number", format!("malformed number `{lexeme}`"))),
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), start, end: i });
            continue;
        }
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError::new(start, "token", format!("character `{ch}`")));
    }
    out.push(Token { tok: Tok::End, start: text.len(), end: text.len() });
    Ok(out)
}

/// Scans `digits [. digits] [(e|E) [+-] digits]` (or `. digits ...`) and
/// returns the end offset. A dangling exponent marker is left unconsumed so
/// the caller reports the whole lexeme as malformed.
fn scan_number(b: &[u8], mut i: usize) -> usize {
    let digits = |b: &[u8], mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(b, i);
    if i < b.len() && b[i] == b'.' {
        i = digits(b, i + 1);
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let k = digits(b, j);
        if k > j {
            i = k;
        }
    }
    i
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
    n_params: usize,
    depth: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(t.start, expected, t.tok.to_string())
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(self.peek().start, "shallower nesting", "nesting too deep"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.start..rhs.span.end;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.start..rhs.span.end;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.enter()?;
            let start = self.bump().start;
            let inner = self.unary()?;
            let span = start..inner.span.end;
            self.depth -= 1;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        self.enter()?;
        let exponent = self.unary()?;
        self.depth -= 1;
        let span = base.span.start..exponent.span.end;
        Ok(Expr::new(ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)), span))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (start, end) = (self.peek().start, self.peek().end);
        match self.peek().tok.clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Num(v), start..end))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.err_here("`)`"));
                }
                let close = self.bump().end;
                Ok(Expr::new(inner.kind, start..close))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return Err(self.err_here("`(` after function name"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if self.peek().tok != Tok::RParen {
                        return Err(self.err_here("`)`"));
                    }
                    let close = self.bump().end;
                    return Ok(Expr::new(ExprKind::Call(f, Box::new(arg)), start..close));
                }
                self.indexed_ident(&name, start, end)
            }
            _ => Err(self.err_here("atom")),
        }
    }

    fn indexed_ident(&self, name: &str, start: usize, end: usize) -> Result<Expr, ParseError> {
        let (prefix, digits) = name.split_at(1);
        let index = if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            digits.parse::<usize>().ok()
        } else {
            None
        };
        let (limit, what, make): (usize, &str, fn(usize) -> ExprKind) = match (prefix, index) {
            ("x", Some(_)) => (self.dim, "variable", ExprKind::Var),
            ("p", Some(_)) => (self.n_params, "parameter", ExprKind::Param),
            _ => {
                return Err(ParseError::new(
                    start,
                    "variable, parameter or function name",
                    format!("unknown identifier `{}`", &self.text[start..end]),
                ))
            }
        };
        let i = index.unwrap_or(0);
        if i == 0 || i > limit {
            let range = if limit == 0 { format!("no {what}s") } else { format!("{what} {prefix}1..{prefix}{limit}") };
            return Err(ParseError::new(start, range, format!("out-of-range {what} `{name}`")));
        }
        Ok(Expr::new(make(i), start..end))
    }
}

/// Parses `text` as an expression over `dim` chart variables `x1..x{dim}`
/// and `n_params` parameters `p1..p{n_params}`.
pub fn parse(text: &str, dim: usize, n_params: usize) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, dim, n_params, depth: 0, text };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.err_here("operator or end of input"));
    }
    Ok(e)
}
