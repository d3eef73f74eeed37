//! Arithmetic expression grammar used for flow and auxiliary equations.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers are left unresolved here; `validate_model` binds them to stocks,
//! auxiliaries, flows or schedules.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Min,
    Max,
    Clamp,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "clamp" => Some(Func::Clamp),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Clamp => "clamp",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            Func::Clamp => n == 3,
        }
    }
}

/// Parsed right-hand side of an equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Ref(String),
    Neg(Box<Expr>),
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn reference(name: impl Into<String>) -> Expr {
        Expr::Ref(name.into())
    }

    /// Every identifier referenced by the expression, in first-seen order.
    pub fn references(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Ref(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Expr::Neg(inner) => inner.collect_refs(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_refs(out);
                rhs.collect_refs(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_refs(out)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Ref(name) => f.write_str(name),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("function `{name}` at offset {offset} called with {got} argument(s)")]
    Arity {
        offset: usize,
        name: &'static str,
        got: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::Arity { offset, .. } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the token and the byte offset it starts at.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            '+' | '-' | '*' | '/' => {
                self.pos += 1;
                Tok::Op(c)
            }
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            ',' => {
                self.pos += 1;
                Tok::Comma
            }
            c if c.is_ascii_digit() || c == '.' => {
                let len = number_len(rest);
                let text = &rest[..len];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                self.pos += len;
                Tok::Num(v)
            }
            c if c.is_alphabetic() || c == '_' => {
                let len = rest
                    .char_indices()
                    .find(|&(_, ch)| !(ch.is_alphanumeric() || ch == '_'))
                    .map_or(rest.len(), |(i, _)| i);
                self.pos += len;
                Tok::Ident(rest[..len].to_string())
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        Ok((tok, start))
    }
}

fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Parser { lexer, tok, at })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match &self.tok {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
        };
        ParseError::Syntax {
            offset: self.at,
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if self.tok != Tok::LParen {
                    return Ok(Expr::Ref(name));
                }
                let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                    offset: at,
                    name: name.clone(),
                })?;
                self.bump()?;
                let mut args = vec![self.expr()?];
                while self.tok == Tok::Comma {
                    self.bump()?;
                    args.push(self.expr()?);
                }
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`,` or `)`"));
                }
                self.bump()?;
                if !func.arity_ok(args.len()) {
                    return Err(ParseError::Arity {
                        offset: at,
                        name: func.name(),
                        got: args.len(),
                    });
                }
                Ok(Expr::Call { func, args })
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump()?;
                Ok(inner)
            }
            _ => Err(self.unexpected("a number, identifier or `(`")),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("unbound reference `{0}`")]
    Unbound(String),
}

/// Name lookup used by [`eval_expression`].
pub trait Env {
    fn get(&self, name: &str) -> Option<f64>;
}

impl Env for HashMap<String, f64> {
    fn get(&self, name: &str) -> Option<f64> {
        HashMap::get(self, name).copied()
    }
}

impl Env for HashMap<&str, f64> {
    fn get(&self, name: &str) -> Option<f64> {
        HashMap::get(self, name).copied()
    }
}

impl<F: Fn(&str) -> Option<f64>> Env for F {
    fn get(&self, name: &str) -> Option<f64> {
        self(name)
    }
}

pub fn eval_expression(e: &Expr, env: &impl Env) -> Result<f64, EvalError> {
    eval_with(e, &|name: &str| {
        env.get(name)
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    })
}

/// Shared evaluator; `lookup` resolves a reference or reports why it cannot.
pub(crate) fn eval_with<L>(e: &Expr, lookup: &L) -> Result<f64, EvalError>
where
    L: Fn(&str) -> Result<f64, EvalError>,
{
    Ok(match e {
        Expr::Const(v) => *v,
        Expr::Ref(name) => lookup(name)?,
        Expr::Neg(inner) => -eval_with(inner, lookup)?,
        Expr::Binary { op, lhs, rhs } => {
            let a = eval_with(lhs, lookup)?;
            let b = eval_with(rhs, lookup)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero(e.to_string()));
                    }
                    a / b
                }
            }
        }
        Expr::Call { func, args } => {
            let vals = args
                .iter()
                .map(|a| eval_with(a, lookup))
                .collect::<Result<Vec<_>, _>>()?;
            match func {
                Func::Min => vals.into_iter().fold(f64::INFINITY, f64::min),
                Func::Max => vals.into_iter().fold(f64::NEG_INFINITY, f64::max),
                Func::Clamp => vals[0].max(vals[1]).min(vals[2]),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: &str) -> Box<Expr> {
        Box::new(Expr::Ref(n.into()))
    }

    #[test]
    fn precedence() {
        let e = parse_expression("a + 2*b").unwrap();
        assert_eq!(
            e,
            Expr::Binary {
                op: BinaryOp::Add,
                lhs: r("a"),
                rhs: Box::new(Expr::Binary {
                    op: BinaryOp::Mul,
                    lhs: Box::new(Expr::Const(2.0)),
                    rhs: r("b"),
                }),
            }
        );
    }

    #[test]
    fn call_node() {
        let e = parse_expression("min(flow_mult, 1)").unwrap();
        match e {
            Expr::Call { func, args } => {
                assert_eq!(func, Func::Min);
                assert_eq!(args.len(), 2);
                assert_eq!(args[0], Expr::Ref("flow_mult".into()));
            }
            other => panic!("expected call, got {other:?}"),
        }
    }

    #[test]
    fn trailing_operator_reports_offset() {
        let err = parse_expression("a + ").unwrap_err();
        assert_eq!(err.offset(), Some(4));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn unknown_function() {
        let err = parse_expression("2 * sqrt(x)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownFunction {
                offset: 4,
                name: "sqrt".into()
            }
        );
    }

    #[test]
    fn bad_arity_and_empty() {
        assert!(matches!(
            parse_expression("clamp(1, 2)"),
            Err(ParseError::Arity { got: 2, .. })
        ));
        assert_eq!(parse_expression("   "), Err(ParseError::Empty));
        assert!(parse_expression("(a + b").is_err());
        assert!(parse_expression("a b").is_err());
        assert!(parse_expression("a $ b").is_err());
    }

    #[test]
    fn unary_minus_binds_tighter() {
        let env: HashMap<&str, f64> = [("a", 3.0)].into_iter().collect();
        let v = eval_expression(&parse_expression("-a * 2 + 10").unwrap(), &env).unwrap();
        assert_eq!(v, 4.0);
        let v = eval_expression(&parse_expression("--a").unwrap(), &env).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn scientific_literals() {
        let empty: HashMap<&str, f64> = HashMap::new();
        let v = eval_expression(&parse_expression("1.40e7 / 1.4E+7").unwrap(), &empty).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn eval_examples() {
        let empty: HashMap<&str, f64> = HashMap::new();
        let v = eval_expression(&parse_expression("(2*3)+1").unwrap(), &empty).unwrap();
        assert_eq!(v, 7.0);
        let v = eval_expression(&parse_expression("clamp(-0.2, 0, 1)").unwrap(), &empty).unwrap();
        assert_eq!(v, 0.0);
        let env: HashMap<&str, f64> = [("x", 0.207)].into_iter().collect();
        assert_eq!(eval_expression(&Expr::reference("x"), &env).unwrap(), 0.207);
    }

    #[test]
    fn eval_errors() {
        let env: HashMap<&str, f64> = [("z", 0.0)].into_iter().collect();
        let e = parse_expression("1 / z").unwrap();
        assert!(matches!(
            eval_expression(&e, &env),
            Err(EvalError::DivisionByZero(_))
        ));
        let e = parse_expression("q + 1").unwrap();
        assert_eq!(
            eval_expression(&e, &env),
            Err(EvalError::Unbound("q".into()))
        );
    }

    #[test]
    fn display_reparses_to_same_tree() {
        let src = "max(0, 1 - 0.2*a - 0.1*b) / (c + -d)";
        let e = parse_expression(src).unwrap();
        assert_eq!(parse_expression(&e.to_string()).unwrap(), e);
        assert_eq!(e.references(), vec!["a", "b", "c", "d"]);
    }
}
