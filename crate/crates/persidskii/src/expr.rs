//! Closed-form scalar expressions of the time variable `t`.
//!
//! Entries of time-varying coefficient matrices are written as infix
//! expressions over `t`, e.g. `-4*t-12` or `(1/3)*exp(-t)*cos(t)`.
//! The grammar is deliberately small: numeric literals (decimal, optional
//! fraction and exponent), the single variable `t`, `+ - * / ^`, unary
//! minus, parentheses and the functions `sin`, `cos`, `exp`, `abs`.
//! Power is right-associative and binds tighter than unary minus, so
//! `2^3^2 = 512` and `-2^2 = -4`. Implicit multiplication (`2t`) is a
//! syntax error.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{context}`")]
    DivisionByZero { context: String },
    #[error("non-finite result of `{context}`")]
    NonFinite { context: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(f64),
    Time,
    Neg(Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

/// A parsed expression in `t`. Immutable after parse; evaluation is pure
/// and safe to call from any number of threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    ast: Ast,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Expression, ParseError> {
        if source.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let tokens = lex(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let ast = parser.expr()?;
        match parser.peek() {
            Some(tok) => Err(ParseError::Syntax {
                pos: tok.pos,
                msg: format!("unexpected `{}` after expression", tok.kind),
            }),
            None => Ok(Expression {
                source: source.to_string(),
                ast,
            }),
        }
    }

    pub fn constant(value: f64) -> Expression {
        Expression {
            source: format!("{value}"),
            ast: Ast::Num(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    /// IEEE double-precision evaluation at time `t`. Division by zero and
    /// non-finite intermediate results are reported, never propagated as NaN.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        eval_ast(&self.ast, t)
    }

    /// Constant value when the AST contains no occurrence of `t`.
    pub fn as_constant(&self) -> Option<f64> {
        if ast_depends_on_t(&self.ast) {
            None
        } else {
            eval_ast(&self.ast, 0.0).ok()
        }
    }
}

impl fmt::Display for Expression {
    /// Canonical fully parenthesized form; re-parsing it evaluates
    /// identically to the original.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ast(&self.ast, f)
    }
}

fn ast_depends_on_t(ast: &Ast) -> bool {
    match ast {
        Ast::Num(_) => false,
        Ast::Time => true,
        Ast::Neg(a) | Ast::Call(_, a) => ast_depends_on_t(a),
        Ast::Bin(_, a, b) => ast_depends_on_t(a) || ast_depends_on_t(b),
    }
}

fn eval_ast(ast: &Ast, t: f64) -> Result<f64, EvalError> {
    let v = match ast {
        Ast::Num(v) => *v,
        Ast::Time => t,
        Ast::Neg(a) => -eval_ast(a, t)?,
        Ast::Bin(op, a, b) => {
            let x = eval_ast(a, t)?;
            let y = eval_ast(b, t)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            context: format!("{x} / {y}"),
                        });
                    }
                    x / y
                }
                BinOp::Pow => x.powf(y),
            }
        }
        Ast::Call(func, a) => {
            let x = eval_ast(a, t)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Abs => x.abs(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite {
            context: format!("{ast:?} at t={t}"),
        })
    }
}

fn write_ast(ast: &Ast, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match ast {
        Ast::Num(v) => {
            if *v < 0.0 {
                write!(f, "({v})")
            } else {
                write!(f, "{v}")
            }
        }
        Ast::Time => write!(f, "t"),
        Ast::Neg(a) => {
            write!(f, "(-")?;
            write_ast(a, f)?;
            write!(f, ")")
        }
        Ast::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            write!(f, "(")?;
            write_ast(a, f)?;
            write!(f, "{sym}")?;
            write_ast(b, f)?;
            write!(f, ")")
        }
        Ast::Call(func, a) => {
            let name = match func {
                Func::Sin => "sin",
                Func::Cos => "cos",
                Func::Exp => "exp",
                Func::Abs => "abs",
            };
            write!(f, "{name}(")?;
            write_ast(a, f)?;
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "{v}"),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Plus => write!(f, "+"),
            TokenKind::Minus => write!(f, "-"),
            TokenKind::Star => write!(f, "*"),
            TokenKind::Slash => write!(f, "/"),
            TokenKind::Caret => write!(f, "^"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                tokens.push(Token {
                    kind: TokenKind::Plus,
                    pos,
                });
                i += 1;
            }
            '-' => {
                tokens.push(Token {
                    kind: TokenKind::Minus,
                    pos,
                });
                i += 1;
            }
            '*' => {
                tokens.push(Token {
                    kind: TokenKind::Star,
                    pos,
                });
                i += 1;
            }
            '/' => {
                tokens.push(Token {
                    kind: TokenKind::Slash,
                    pos,
                });
                i += 1;
            }
            '^' => {
                tokens.push(Token {
                    kind: TokenKind::Caret,
                    pos,
                });
                i += 1;
            }
            '(' => {
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    pos,
                });
                i += 1;
            }
            ')' => {
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    pos,
                });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
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
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Num(value),
                    pos: start,
                });
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphabetic() {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    pos: start,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map(|t| t.pos + 1).unwrap_or(0)
    }

    // expr := term (('+'|'-') term)*    left-associative
    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*    left-associative
    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary := '-' unary | power    (power binds tighter: -2^2 = -(2^2))
    fn unary(&mut self) -> Result<Ast, ParseError> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Minus {
                self.bump();
                let inner = self.unary()?;
                return Ok(Ast::Neg(Box::new(inner)));
            }
        }
        self.power()
    }

    // power := atom ('^' unary)?    right-associative, exponent may be signed
    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Caret {
                self.bump();
                let exponent = self.unary()?;
                return Ok(Ast::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let tok = self.bump().ok_or(ParseError::Syntax {
            pos: self.end_pos(),
            msg: "unexpected end of expression".to_string(),
        })?;
        match tok.kind {
            TokenKind::Num(v) => Ok(Ast::Num(v)),
            TokenKind::Ident(name) => match name.as_str() {
                "t" => Ok(Ast::Time),
                "sin" | "cos" | "exp" | "abs" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        _ => Func::Abs,
                    };
                    self.expect(TokenKind::LParen)?;
                    let arg = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Ast::Call(func, Box::new(arg)))
                }
                _ => Err(ParseError::UnknownIdentifier { pos: tok.pos, name }),
            },
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            other => Err(ParseError::Syntax {
                pos: tok.pos,
                msg: format!("unexpected `{other}`"),
            }),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        match self.bump() {
            Some(tok) if tok.kind == kind => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                pos: tok.pos,
                msg: format!("expected `{kind}`, found `{}`", tok.kind),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end_pos(),
                msg: format!("expected `{kind}`, found end of expression"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(s: &str, t: f64) -> f64 {
        Expression::parse(s).unwrap().eval(t).unwrap()
    }

    #[test]
    fn linear_entry() {
        assert_eq!(eval_str("-4*t-12", 2.0), -20.0);
    }

    #[test]
    fn product_of_functions() {
        let v = eval_str("(1/3)*exp(-t)*cos(t)", 0.0);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval_str("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        assert_eq!(eval_str("-2^2", 0.0), -4.0);
        assert_eq!(eval_str("(-2)^2", 0.0), 4.0);
        assert_eq!(eval_str("2^-1", 0.0), 0.5);
    }

    #[test]
    fn trig_and_exp() {
        assert!((eval_str("sin(t)", std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((eval_str("exp(-2*t)", 1.0) - 0.1353352832366127).abs() < 1e-15);
        assert_eq!(eval_str("t", 7.25), 7.25);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval_str("2+3*4", 0.0), 14.0);
        assert_eq!(eval_str("10-4-3", 0.0), 3.0);
        assert_eq!(eval_str("12/3/2", 0.0), 2.0);
        assert_eq!(eval_str("abs(-3)+1", 0.0), 4.0);
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(Expression::parse("2t").is_err());
        assert!(Expression::parse("2 t").is_err());
    }

    #[test]
    fn malformed_inputs_report_position() {
        match Expression::parse("1+*2") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match Expression::parse("sin(x)") {
            Err(ParseError::UnknownIdentifier { name, .. }) => assert_eq!(name, "x"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert!(Expression::parse("").is_err());
        assert!(Expression::parse("(1+2").is_err());
        assert!(Expression::parse("1+2)").is_err());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expression::parse("1/t").unwrap();
        assert!(matches!(e.eval(0.0), Err(EvalError::DivisionByZero { .. })));
        assert_eq!(e.eval(2.0).unwrap(), 0.5);
    }

    #[test]
    fn overflow_is_an_error_not_nan() {
        let e = Expression::parse("exp(t)").unwrap();
        assert!(matches!(e.eval(1000.0), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn constant_detection() {
        assert_eq!(Expression::parse("3*4").unwrap().as_constant(), Some(12.0));
        assert_eq!(Expression::parse("t*0").unwrap().as_constant(), None);
    }

    type Oracle = fn(f64) -> f64;

    // Hand-expanded fixtures on the grid t in {0, 0.1, ..., 10}, relative
    // tolerance 1e-12 against direct Rust evaluation.
    #[test]
    fn fixtures_match_direct_evaluation_on_grid() {
        let fixtures: Vec<(&str, Oracle)> = vec![
            ("-4*t-12", |t| -4.0 * t - 12.0),
            ("-2*t-5", |t| -2.0 * t - 5.0),
            ("(1/3)*sin(t)", |t| (1.0 / 3.0) * t.sin()),
            ("(1/8)*exp(-t)*sin(t)", |t| {
                (1.0 / 8.0) * (-t).exp() * t.sin()
            }),
            ("t^2-3*t+1", |t| t * t - 3.0 * t + 1.0),
            ("abs(cos(2*t))", |t| (2.0 * t).cos().abs()),
            ("2^t", |t| 2.0f64.powf(t)),
        ];
        for (src, oracle) in fixtures {
            let e = Expression::parse(src).unwrap();
            for k in 0..=100 {
                let t = k as f64 * 0.1;
                let got = e.eval(t).unwrap();
                let want = oracle(t);
                let tol = 1e-12 * want.abs().max(1.0);
                assert!(
                    (got - want).abs() <= tol,
                    "{src} at t={t}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn printer_round_trip() {
        use rand::{Rng, SeedableRng};
        let sources = [
            "-4*t-12",
            "(1/3)*exp(-t)*cos(t)",
            "2^3^2",
            "t^2-3*t+1/(t+1)",
            "-sin(t)*abs(t-5)+2^-t",
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for src in sources {
            let first = Expression::parse(src).unwrap();
            let printed = first.to_string();
            let second = Expression::parse(&printed).unwrap();
            for _ in 0..100 {
                let t: f64 = rng.gen_range(0.0..10.0);
                assert_eq!(
                    first.eval(t).unwrap(),
                    second.eval(t).unwrap(),
                    "round trip mismatch for {src} via {printed}"
                );
            }
        }
    }
}
