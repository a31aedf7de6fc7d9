//! A small analytic expression language.
//!
//! Surfaces and metric components are supplied as text like
//! `"y + x^2 + x^3 + y*x^4"` and evaluated on jets, so every derivative the
//! geometry needs comes out of one parse. The grammar is conventional
//! operator precedence: `^` is right-associative and binds tighter than unary
//! minus, multiplication is always explicit.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError, Kernel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("lexical error at offset {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("unbound variable `{0}` during evaluation")]
    UnboundVariable(String),
    #[error("non-constant exponent with non-positive base constant term")]
    BadExponent,
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
}

impl UnaryFn {
    fn from_name(name: &str) -> Option<UnaryFn> {
        Some(match name {
            "sqrt" => UnaryFn::Sqrt,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tanh" => UnaryFn::Tanh,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tanh => "tanh",
        }
    }

    fn kernel(&self) -> Kernel {
        match self {
            UnaryFn::Sqrt => Kernel::Sqrt,
            UnaryFn::Exp => Kernel::Exp,
            UnaryFn::Log => Kernel::Log,
            UnaryFn::Sin => Kernel::Sin,
            UnaryFn::Cos => Kernel::Cos,
            UnaryFn::Tanh => Kernel::Tanh,
        }
    }

    fn apply_f64(&self, x: f64) -> f64 {
        match self {
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Exp => x.exp(),
            UnaryFn::Log => x.ln(),
            UnaryFn::Sin => x.sin(),
            UnaryFn::Cos => x.cos(),
            UnaryFn::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Variable(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(UnaryFn, Box<Expr>),
    /// Two-argument `pow(base, exponent)`.
    PowCall(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn number(v: f64) -> Expr {
        Expr::Number(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Variable(name.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
    }

    /// Free variables, in first-appearance order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Number(_) => {}
            Expr::Variable(n) => {
                if !out.iter().any(|v| v == n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) | Expr::PowCall(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Substitute variables by expressions (used for rotations/translations).
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Number(v) => Expr::Number(*v),
            Expr::Variable(n) => map.get(n).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(map))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.substitute(map)), Box::new(b.substitute(map)))
            }
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.substitute(map))),
            Expr::PowCall(a, b) => {
                Expr::PowCall(Box::new(a.substitute(map)), Box::new(b.substitute(map)))
            }
        }
    }

    /// Evaluate on jets. Every free variable must be bound in `env`.
    pub fn eval_jet(&self, env: &HashMap<String, Jet>) -> Result<Jet, ExprError> {
        let (nvars, order) = env
            .values()
            .next()
            .map(|j| (j.nvars(), j.order()))
            .expect("eval_jet needs a non-empty environment");
        self.eval_jet_inner(env, nvars, order)
    }

    fn eval_jet_inner(
        &self,
        env: &HashMap<String, Jet>,
        nvars: usize,
        order: usize,
    ) -> Result<Jet, ExprError> {
        match self {
            Expr::Number(v) => Ok(Jet::constant(*v, nvars, order)),
            Expr::Variable(n) => env
                .get(n)
                .cloned()
                .ok_or_else(|| ExprError::UnboundVariable(n.clone())),
            Expr::Neg(e) => Ok(e.eval_jet_inner(env, nvars, order)?.neg()),
            Expr::Binary(op, a, b) => {
                let ja = a.eval_jet_inner(env, nvars, order)?;
                match op {
                    BinOp::Add => Ok(ja.add(&b.eval_jet_inner(env, nvars, order)?)?),
                    BinOp::Sub => Ok(ja.sub(&b.eval_jet_inner(env, nvars, order)?)?),
                    BinOp::Mul => Ok(ja.mul(&b.eval_jet_inner(env, nvars, order)?)?),
                    BinOp::Div => Ok(ja.div(&b.eval_jet_inner(env, nvars, order)?)?),
                    BinOp::Pow => pow_jet(&ja, &b.eval_jet_inner(env, nvars, order)?),
                }
            }
            Expr::Call(f, e) => {
                let je = e.eval_jet_inner(env, nvars, order)?;
                Ok(je.compose(f.kernel())?)
            }
            Expr::PowCall(a, b) => {
                let ja = a.eval_jet_inner(env, nvars, order)?;
                let jb = b.eval_jet_inner(env, nvars, order)?;
                pow_jet(&ja, &jb)
            }
        }
    }

    /// Plain real evaluation, independent of the jet machinery.
    pub fn eval_f64(&self, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
        match self {
            Expr::Number(v) => Ok(*v),
            Expr::Variable(n) => env
                .get(n)
                .copied()
                .ok_or_else(|| ExprError::UnboundVariable(n.clone())),
            Expr::Neg(e) => Ok(-e.eval_f64(env)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval_f64(env)?;
                let y = b.eval_f64(env)?;
                Ok(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                })
            }
            Expr::Call(f, e) => Ok(f.apply_f64(e.eval_f64(env)?)),
            Expr::PowCall(a, b) => Ok(a.eval_f64(env)?.powf(b.eval_f64(env)?)),
        }
    }
}

fn pow_jet(base: &Jet, exponent: &Jet) -> Result<Jet, ExprError> {
    let is_const = exponent.coeffs().iter().skip(1).all(|&c| c == 0.0);
    if is_const {
        let e = exponent.value();
        if e.fract() == 0.0 && e.abs() < 1e15 {
            return Ok(base.powi(e as i64)?);
        }
        return Ok(base.compose(Kernel::Pow(e))?);
    }
    // variable exponent: base^e = exp(e * log base); needs positive base
    if base.value() <= 0.0 {
        return Err(ExprError::BadExponent);
    }
    let log = base.compose(Kernel::Log)?;
    Ok(exponent.mul(&log)?.compose(Kernel::Exp)?)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence levels: 0 add, 1 mul, 2 unary minus, 3 pow, 4 atom
        fn go(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let prec = match e {
                Expr::Number(_) | Expr::Variable(_) | Expr::Call(..) | Expr::PowCall(..) => 4,
                Expr::Binary(BinOp::Pow, ..) => 3,
                Expr::Neg(_) => 2,
                Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 1,
                Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 0,
            };
            let need_parens = prec < parent;
            if need_parens {
                write!(f, "(")?;
            }
            match e {
                Expr::Number(v) => write!(f, "{v}")?,
                Expr::Variable(n) => write!(f, "{n}")?,
                Expr::Neg(inner) => {
                    write!(f, "-")?;
                    go(inner, 3, f)?;
                }
                Expr::Binary(op, a, b) => {
                    let (sym, lp, rp) = match op {
                        BinOp::Add => (" + ", 0, 1),
                        BinOp::Sub => (" - ", 0, 1),
                        BinOp::Mul => ("*", 1, 2),
                        BinOp::Div => ("/", 1, 2),
                        BinOp::Pow => ("^", 4, 3),
                    };
                    go(a, lp, f)?;
                    write!(f, "{sym}")?;
                    go(b, rp, f)?;
                }
                Expr::Call(func, a) => {
                    write!(f, "{}(", func.name())?;
                    go(a, 0, f)?;
                    write!(f, ")")?;
                }
                Expr::PowCall(a, b) => {
                    write!(f, "pow(")?;
                    go(a, 0, f)?;
                    write!(f, ", ")?;
                    go(b, 0, f)?;
                    write!(f, ")")?;
                }
            }
            if need_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    tokens: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Tok::Plus, i));
                i += 1;
            }
            '-' | '−' => {
                tokens.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                tokens.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                tokens.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                tokens.push((Tok::Comma, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ExprError::Lex {
                    offset: start,
                    message: format!("bad number literal `{text}`"),
                })?;
                tokens.push((Tok::Number(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                tokens.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ExprError::Lex {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    allowed_vars: &'a [String],
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_offset(&self) -> usize {
        self.src_len
    }

    /// Pratt loop. Binding powers: add/sub 10, mul/div 20, pow 40
    /// (right-associative), unary minus 30 so that `-x^2 = -(x^2)`.
    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (op, bp, right_bp) = match self.peek() {
                Some((Tok::Plus, _)) => (BinOp::Add, 10, 11),
                Some((Tok::Minus, _)) => (BinOp::Sub, 10, 11),
                Some((Tok::Star, _)) => (BinOp::Mul, 20, 21),
                Some((Tok::Slash, _)) => (BinOp::Div, 20, 21),
                Some((Tok::Caret, _)) => (BinOp::Pow, 40, 40), // right assoc
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.parse_expr(right_bp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            None => Err(ExprError::Parse {
                offset: self.end_offset(),
                message: "unexpected end of input".into(),
            }),
            Some((Tok::Number(v), _)) => Ok(Expr::Number(v)),
            Some((Tok::Minus, _)) => {
                // unary minus binds looser than ^
                let inner = self.parse_expr(30)?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some((Tok::LParen, open)) => {
                let inner = self.parse_expr(0)?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ExprError::Unbalanced { offset: open }),
                }
            }
            Some((Tok::Ident(name), offset)) => {
                if matches!(self.peek(), Some((Tok::LParen, _))) {
                    self.parse_call(&name, offset)
                } else if self.allowed_vars.iter().any(|v| v == &name) {
                    Ok(Expr::Variable(name))
                } else {
                    Err(ExprError::UnknownIdentifier { name, offset })
                }
            }
            Some((tok, offset)) => Err(ExprError::Parse {
                offset,
                message: format!("unexpected token {tok:?}"),
            }),
        }
    }

    fn parse_call(&mut self, name: &str, offset: usize) -> Result<Expr, ExprError> {
        let (_, open) = self.next().unwrap(); // consume '('
        let mut args = vec![self.parse_expr(0)?];
        loop {
            match self.next() {
                Some((Tok::Comma, _)) => args.push(self.parse_expr(0)?),
                Some((Tok::RParen, _)) => break,
                _ => return Err(ExprError::Unbalanced { offset: open }),
            }
        }
        if name == "pow" {
            if args.len() != 2 {
                return Err(ExprError::Arity { name: name.into(), expected: 2, got: args.len() });
            }
            let e = args.pop().unwrap();
            let b = args.pop().unwrap();
            return Ok(Expr::PowCall(Box::new(b), Box::new(e)));
        }
        match UnaryFn::from_name(name) {
            Some(f) => {
                if args.len() != 1 {
                    return Err(ExprError::Arity { name: name.into(), expected: 1, got: args.len() });
                }
                Ok(Expr::Call(f, Box::new(args.pop().unwrap())))
            }
            None => Err(ExprError::UnknownIdentifier { name: name.into(), offset }),
        }
    }
}

/// Parse `text` allowing exactly the given variable names.
pub fn parse(text: &str, allowed_vars: &[String]) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Parse { offset: 0, message: "empty expression".into() });
    }
    let lexer = Lexer { src: text, tokens: lex(text)? };
    let mut parser = Parser {
        tokens: lexer.tokens,
        pos: 0,
        allowed_vars,
        src_len: lexer.src.len(),
    };
    let expr = parser.parse_expr(0)?;
    if let Some((tok, offset)) = parser.peek() {
        if matches!(tok, Tok::RParen) {
            return Err(ExprError::Unbalanced { offset: *offset });
        }
        return Err(ExprError::Parse {
            offset: *offset,
            message: format!("trailing input starting with {tok:?}"),
        });
    }
    Ok(expr)
}

/// Convenience for internal construction of expressions over known variables.
pub fn parse_with_vars(text: &str, vars: &[&str]) -> Result<Expr, ExprError> {
    let owned: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    parse(text, &owned)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars2() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn parses_f1() {
        let e = parse("y + x^2 + x^3 + y*x^4", &vars2()).unwrap();
        let mut env = HashMap::new();
        env.insert("x".to_string(), 1.0);
        env.insert("y".to_string(), 0.0);
        assert_eq!(e.eval_f64(&env).unwrap(), 2.0);
        env.insert("y".to_string(), 1.0);
        assert_eq!(e.eval_f64(&env).unwrap(), 4.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_pow() {
        let e = parse("-x^2", &vars2()).unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        let mut env = HashMap::new();
        env.insert("x".to_string(), 2.0);
        env.insert("y".to_string(), 0.0);
        assert_eq!(e.eval_f64(&env).unwrap(), -4.0);
    }

    #[test]
    fn pow_right_associative() {
        let e = parse("2^3^2", &vars2()).unwrap();
        assert_eq!(e.eval_f64(&HashMap::new()).unwrap(), 512.0);
    }

    #[test]
    fn unbalanced_paren_reported() {
        let err = parse("sqrt(1 + x*x", &vars2()).unwrap_err();
        match err {
            ExprError::Unbalanced { offset } => assert_eq!(offset, 4),
            other => panic!("expected unbalanced error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_rejected() {
        let err = parse("x + z", &vars2()).unwrap_err();
        assert!(matches!(err, ExprError::UnknownIdentifier { .. }));
    }

    #[test]
    fn arity_checked() {
        assert!(matches!(
            parse("pow(x)", &vars2()).unwrap_err(),
            ExprError::Arity { .. }
        ));
        assert!(matches!(
            parse("sqrt(x, y)", &vars2()).unwrap_err(),
            ExprError::Arity { .. }
        ));
    }

    #[test]
    fn round_trip_structural() {
        for text in [
            "y + x^2 + x^3 + y*x^4",
            "-x^2",
            "(x + 1)*tanh(y)",
            "sqrt(1 + x*x) - 1",
            "pow(x, 0.5)/(1 - y)",
            "x^-2",
            "2^3^2",
            "-(x + y)",
        ] {
            let e = parse(text, &vars2()).unwrap();
            let printed = e.to_string();
            let e2 = parse(&printed, &vars2())
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(e, e2, "round trip for `{text}` via `{printed}`");
        }
    }

    #[test]
    fn eval_jet_order0_matches_f64() {
        let e = parse("(x + 1)*tanh(y) - sqrt(1 + x*x)/2", &vars2()).unwrap();
        let mut fenv = HashMap::new();
        fenv.insert("x".to_string(), 0.3);
        fenv.insert("y".to_string(), -0.4);
        let expected = e.eval_f64(&fenv).unwrap();
        let mut jenv = HashMap::new();
        jenv.insert("x".to_string(), Jet::variable(0, 0.3, 2, 0).unwrap());
        jenv.insert("y".to_string(), Jet::variable(1, -0.4, 2, 0).unwrap());
        let j = e.eval_jet(&jenv).unwrap();
        assert!((j.value() - expected).abs() < 1e-15);
    }

    #[test]
    fn kobayashi_jet_at_origin() {
        // (x+1)*tanh(y) at (0,0), order 1 -> constant 0, d/dx 0, d/dy 1
        let e = parse("(x + 1)*tanh(y)", &vars2()).unwrap();
        let mut env = HashMap::new();
        env.insert("x".to_string(), Jet::variable(0, 0.0, 2, 1).unwrap());
        env.insert("y".to_string(), Jet::variable(1, 0.0, 2, 1).unwrap());
        let j = e.eval_jet(&env).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.gradient(0), 0.0);
        assert_eq!(j.gradient(1), 1.0);
    }

    #[test]
    fn constant_expression_in_any_env() {
        let e = parse("3", &vars2()).unwrap();
        let mut env = HashMap::new();
        env.insert("x".to_string(), Jet::variable(0, 5.0, 2, 2).unwrap());
        env.insert("y".to_string(), Jet::variable(1, -1.0, 2, 2).unwrap());
        let j = e.eval_jet(&env).unwrap();
        assert_eq!(j.value(), 3.0);
        assert_eq!(j.max_abs_coeff(), 3.0);
    }

    #[test]
    fn division_by_zero_constant_term() {
        let e = parse("1/x", &vars2()).unwrap();
        let mut env = HashMap::new();
        env.insert("x".to_string(), Jet::variable(0, 0.0, 2, 2).unwrap());
        env.insert("y".to_string(), Jet::variable(1, 0.0, 2, 2).unwrap());
        assert!(matches!(
            e.eval_jet(&env).unwrap_err(),
            ExprError::Jet(JetError::ZeroDivisor)
        ));
    }

    #[test]
    fn finite_difference_derivative_check() {
        // derivatives from order-2 jets vs central differences of eval_f64
        let exprs = [
            "x^2*y - y^3 + x",
            "sin(x)*cos(y) + x*y",
            "tanh(x + y)/(2 + x)",
            "exp(x - y^2)",
        ];
        let h = 1e-5;
        for text in exprs {
            let e = parse(text, &vars2()).unwrap();
            for &(x0, y0) in &[(0.1, 0.2), (-0.3, 0.4), (0.7, -0.5)] {
                let mut jenv = HashMap::new();
                jenv.insert("x".to_string(), Jet::variable(0, x0, 2, 2).unwrap());
                jenv.insert("y".to_string(), Jet::variable(1, y0, 2, 2).unwrap());
                let j = e.eval_jet(&jenv).unwrap();
                let feval = |x: f64, y: f64| {
                    let mut env = HashMap::new();
                    env.insert("x".to_string(), x);
                    env.insert("y".to_string(), y);
                    e.eval_f64(&env).unwrap()
                };
                let fdx = (feval(x0 + h, y0) - feval(x0 - h, y0)) / (2.0 * h);
                let fdy = (feval(x0, y0 + h) - feval(x0, y0 - h)) / (2.0 * h);
                assert!((j.gradient(0) - fdx).abs() < 1e-6, "{text} d/dx");
                assert!((j.gradient(1) - fdy).abs() < 1e-6, "{text} d/dy");
            }
        }
    }
}
