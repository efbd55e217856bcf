//! Scalar expressions over the chart parameters `u1..um`.
//!
//! The grammar is intentionally small:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' int)*
//! primary := number | 'pi' | 'u'<k> | func '(' expr ')' | 'pow' '(' expr ',' int ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt
//! ```
//!
//! `^` binds tighter than unary minus, so `-u1^2` is `-(u1^2)`. Exponents are
//! integer literals, which keeps every jet exact and free of branch cuts.

use std::fmt;

use thiserror::Error;

use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
}

impl ExprError {
    /// Byte offset of the error inside the source text, when known.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::Arity { offset, .. } => Some(*offset),
            ExprError::Domain(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based parameter index; `u1` is `Var(0)`.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(i) => write!(f, "u{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// Parses `src` as an expression in the variables `u1..u{vars}`.
pub fn parse_expression(src: &str, vars: usize) -> Result<Expr, ExprError> {
    if src.trim().is_empty() {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    let tok = p.peek();
    if tok.kind != Tok::End {
        return Err(ExprError::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(e)
}

impl Expr {
    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Var(i) => *u
                .get(*i)
                .ok_or_else(|| ExprError::Domain(format!("variable u{} not supplied", i + 1)))?,
            Expr::Neg(e) => -e.eval(u)?,
            Expr::Add(a, b) => a.eval(u)? + b.eval(u)?,
            Expr::Sub(a, b) => a.eval(u)? - b.eval(u)?,
            Expr::Mul(a, b) => a.eval(u)? * b.eval(u)?,
            Expr::Div(a, b) => {
                let den = b.eval(u)?;
                if den == 0.0 {
                    return Err(ExprError::Domain("division by zero".into()));
                }
                a.eval(u)? / den
            }
            Expr::Pow(a, n) => {
                let x = a.eval(u)?;
                if *n < 0 && x == 0.0 {
                    return Err(ExprError::Domain("negative power of zero".into()));
                }
                x.powi(*n)
            }
            Expr::Call(func, e) => {
                let x = e.eval(u)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(ExprError::Domain(format!("log of {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(ExprError::Domain(format!("sqrt of {x}")));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain(format!("non-finite value in `{self}`")))
        }
    }

    /// Value, gradient and Hessian at `u`, propagated exactly through the tree.
    pub fn eval_jet2(&self, u: &[f64]) -> Result<Jet2, ExprError> {
        let m = u.len();
        let jet = match self {
            Expr::Num(x) => Jet2::constant(*x, m),
            Expr::Var(i) => {
                if *i >= m {
                    return Err(ExprError::Domain(format!(
                        "variable u{} not supplied",
                        i + 1
                    )));
                }
                Jet2::variable(u[*i], *i, m)
            }
            Expr::Neg(e) => e.eval_jet2(u)?.scale(-1.0),
            Expr::Add(a, b) => a.eval_jet2(u)?.add(&b.eval_jet2(u)?),
            Expr::Sub(a, b) => a.eval_jet2(u)?.sub(&b.eval_jet2(u)?),
            Expr::Mul(a, b) => a.eval_jet2(u)?.mul(&b.eval_jet2(u)?),
            Expr::Div(a, b) => {
                let den = b.eval_jet2(u)?;
                if den.value == 0.0 {
                    return Err(ExprError::Domain("division by zero".into()));
                }
                a.eval_jet2(u)?.div(&den)
            }
            Expr::Pow(a, n) => {
                let base = a.eval_jet2(u)?;
                if *n < 0 && base.value == 0.0 {
                    return Err(ExprError::Domain("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Expr::Call(func, e) => {
                let x = e.eval_jet2(u)?;
                let v = x.value;
                match func {
                    Func::Sin => x.chain(v.sin(), v.cos(), -v.sin()),
                    Func::Cos => x.chain(v.cos(), -v.sin(), -v.cos()),
                    Func::Exp => {
                        let ev = v.exp();
                        x.chain(ev, ev, ev)
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(ExprError::Domain(format!("log of {v}")));
                        }
                        x.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                    }
                    Func::Sqrt => {
                        if v <= 0.0 {
                            return Err(ExprError::Domain(format!(
                                "sqrt of {v} has no finite derivative"
                            )));
                        }
                        let s = v.sqrt();
                        x.chain(s, 0.5 / s, -0.25 / (s * v))
                    }
                }
            }
        };
        if jet.is_finite() {
            Ok(jet)
        } else {
            Err(ExprError::Domain(format!("non-finite jet in `{self}`")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num { value, integral },
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    out.push(Token {
        kind: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: Tok) -> Result<Token, ExprError> {
        let t = self.bump();
        if t.kind == kind {
            Ok(t)
        } else {
            Err(ExprError::Syntax {
                offset: t.offset,
                message: format!("expected {}, found {}", kind.describe(), t.kind.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().kind {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.primary()?;
        while self.peek().kind == Tok::Caret {
            self.bump();
            let n = self.int_literal()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn int_literal(&mut self) -> Result<i32, ExprError> {
        let mut sign = 1i64;
        match self.peek().kind {
            Tok::Minus => {
                self.bump();
                sign = -1;
            }
            Tok::Plus => {
                self.bump();
            }
            _ => {}
        }
        let t = self.bump();
        match t.kind {
            Tok::Num {
                value,
                integral: true,
            } if value <= i32::MAX as f64 => Ok((sign * value as i64) as i32),
            other => Err(ExprError::Syntax {
                offset: t.offset,
                message: format!(
                    "exponent must be an integer literal, found {}",
                    other.describe()
                ),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.kind {
            Tok::Num { value, .. } => Ok(Expr::Num(value)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, t.offset),
            other => Err(ExprError::Syntax {
                offset: t.offset,
                message: format!("expected an operand, found {}", other.describe()),
            }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ExprError> {
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(idx) = name.strip_prefix('u').and_then(|s| s.parse::<usize>().ok()) {
            if idx >= 1 && idx <= self.vars && !name[1..].starts_with('0') {
                return Ok(Expr::Var(idx - 1));
            }
            return Err(ExprError::UnknownIdentifier { name, offset });
        }
        if let Some(func) = Func::from_name(&name) {
            let args = self.call_args()?;
            if args.len() != 1 {
                return Err(ExprError::Arity {
                    name,
                    expected: 1,
                    found: args.len(),
                    offset,
                });
            }
            let arg = args.into_iter().next().expect("one argument");
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pow" {
            self.expect(Tok::LParen)?;
            let base = self.expr()?;
            if self.peek().kind != Tok::Comma {
                return Err(ExprError::Arity {
                    name,
                    expected: 2,
                    found: 1,
                    offset,
                });
            }
            self.bump();
            let n = self.int_literal()?;
            if self.peek().kind == Tok::Comma {
                return Err(ExprError::Arity {
                    name,
                    expected: 2,
                    found: 3,
                    offset,
                });
            }
            self.expect(Tok::RParen)?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Err(ExprError::UnknownIdentifier { name, offset })
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ExprError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek().kind == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            let t = self.bump();
            match t.kind {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                other => {
                    return Err(ExprError::Syntax {
                        offset: t.offset,
                        message: format!("expected `,` or `)`, found {}", other.describe()),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn product_of_calls() {
        let e = parse_expression("sin(u1)*cos(u2)", 2).unwrap();
        assert_eq!(
            e,
            Expr::Mul(
                Box::new(Expr::Call(Func::Sin, var(0))),
                Box::new(Expr::Call(Func::Cos, var(1)))
            )
        );
    }

    #[test]
    fn polynomial_value() {
        let e = parse_expression("u1^2 + 2*u1*u2", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn out_of_range_variable() {
        let err = parse_expression("u3", 2).unwrap_err();
        assert!(
            matches!(err, ExprError::UnknownIdentifier { ref name, offset: 0 } if name == "u3")
        );
        assert!(matches!(
            parse_expression("u0", 2),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_expression("tan(u1)", 2),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        // -u1^2 is -(u1^2)
        let e = parse_expression("-u1^2", 1).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(var(0), 2))));
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        // left associativity
        let e = parse_expression("u1 - u2 - 1", 2).unwrap();
        assert_eq!(e.eval(&[5.0, 1.0]).unwrap(), 3.0);
        let e = parse_expression("u1 / u2 / 2", 2).unwrap();
        assert_eq!(e.eval(&[8.0, 2.0]).unwrap(), 2.0);
        let e = parse_expression("1 + 2 * 3^2", 0).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 19.0);
        let e = parse_expression("pow(u1, -2) * 2*-u1", 1).unwrap();
        assert_eq!(e.eval(&[2.0]).unwrap(), -1.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expression("u1 + * u2", 2).unwrap_err();
        assert_eq!(err.offset(), Some(5));
        let err = parse_expression("sin(u1", 1).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 6, .. }));
        let err = parse_expression("u1^1.5", 1).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 3, .. }));
        assert!(parse_expression("   ", 1).is_err());
        assert!(matches!(
            parse_expression("u1 $ 2", 1),
            Err(ExprError::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(
            parse_expression("sin(u1, u2)", 2),
            Err(ExprError::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_expression("pow(u1)", 1),
            Err(ExprError::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_expression("cos()", 1),
            Err(ExprError::Arity {
                expected: 1,
                found: 0,
                ..
            })
        ));
    }

    #[test]
    fn domain_errors() {
        let e = parse_expression("log(u1)", 1).unwrap();
        assert!(matches!(e.eval(&[-1.0]), Err(ExprError::Domain(_))));
        assert!(matches!(e.eval_jet2(&[0.0]), Err(ExprError::Domain(_))));
        let e = parse_expression("1/u1", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(ExprError::Domain(_))));
        let e = parse_expression("sqrt(u1)", 1).unwrap();
        assert!(e.eval(&[-0.5]).is_err());
        assert!(e.eval_jet2(&[0.0]).is_err());
        let e = parse_expression("u1^-1", 1).unwrap();
        assert!(e.eval(&[0.0]).is_err());
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "sin(u1)*cos(u2)",
            "-u1^2 + 3.25e-7/u2",
            "pow(exp(u1) - pi, -3)",
            "sqrt(log(2 + u1*u1)) - -u2",
        ] {
            let e = parse_expression(src, 2).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expression(&printed, 2).unwrap(), e, "{printed}");
        }
    }
}
