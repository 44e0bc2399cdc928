//! Initial-condition expressions: literals, `pi`, variables `x1..xN` (aliases
//! `x`, `y`, `z`), `+ - * /`, integer powers and `sin cos sinh cosh exp`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("at position {position}: unknown identifier `{name}`")]
    UnknownIdentifier { position: usize, name: String },
    #[error("at position {position}: variable `{name}` needs dimension {needed}, but the run has dimension {dim}")]
    Dimension {
        position: usize,
        name: String,
        needed: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Exp => v.exp(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based axis.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(e, n) => e.eval(x).powi(*n),
            Expr::Call(f, e) => f.apply(e.eval(x)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Pow(e, n) => write!(f, "({e}^{n})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
            let s = &text[start..i];
            let v = s.parse::<f64>().map_err(|_| ParseError::Syntax {
                position: start,
                expected: "a number".into(),
                found: format!("`{s}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                position: i,
                expected: "a number, identifier, operator or parenthesis".into(),
                found: format!("`{c}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn position(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            expected: expected.into(),
            found: self.peek().to_string(),
        }
    }

    fn expect_op(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        let at = self.position();
        match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                let n = v as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
            }
            other => Err(ParseError::Syntax {
                position: at,
                expected: "an integer exponent".into(),
                found: other.to_string(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.position();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    self.expect_op('(')?;
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match variable_axis(&name) {
                    Some(axis) if axis < self.dim => Ok(Expr::Var(axis)),
                    Some(axis) => Err(ParseError::Dimension {
                        position: at,
                        name,
                        needed: axis + 1,
                        dim: self.dim,
                    }),
                    None => Err(ParseError::UnknownIdentifier { position: at, name }),
                }
            }
            _ => Err(self.error("a number, variable, function call or `(`")),
        }
    }
}

fn variable_axis(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => {
            let n: usize = name.strip_prefix('x')?.parse().ok()?;
            (n >= 1).then(|| n - 1)
        }
    }
}

/// Parses `text` for a run of dimension `dim`.
pub fn parse_ic(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_at_origin() {
        let e = parse_ic("cos(2*pi*x)", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), 1.0);
        assert!((e.eval(&[0.25])).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_product() {
        let e = parse_ic("sin(2*pi*x1)*cos(2*pi*x2)", 2).unwrap();
        let v = e.eval(&[0.25, 0.5]);
        assert!((v + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_violation() {
        let err = parse_ic("cos(2*pi*y)", 1).unwrap_err();
        assert!(matches!(err, ParseError::Dimension { position: 9, needed: 2, dim: 1, .. }), "{err}");
        assert!(parse_ic("x3", 2).is_err());
        assert!(parse_ic("z", 3).is_ok());
    }

    #[test]
    fn precedence_and_powers() {
        let e = parse_ic("1 + 2*3^2 - -4/2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), 1.0 + 18.0 + 2.0);
        let e = parse_ic("-x^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = parse_ic("2^-1", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), 0.5);
        let e = parse_ic("(x - 0.5)^2 * exp(1e-1) + sinh(0) + cosh(0)", 1).unwrap();
        assert!((e.eval(&[0.0]) - 0.25 * 0.1f64.exp() - 1.0).abs() < 1e-15);
        let e = parse_ic("8/2/2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), 2.0);
        assert_eq!(parse_ic("pi", 1).unwrap().eval(&[0.0]), PI);
    }

    #[test]
    fn errors_are_positioned() {
        match parse_ic("cos(2*pi*x", 1).unwrap_err() {
            ParseError::Syntax { position, expected, .. } => {
                assert_eq!(position, 10);
                assert_eq!(expected, "`)`");
            }
            e => panic!("{e}"),
        }
        assert!(matches!(
            parse_ic("tan(x)", 1).unwrap_err(),
            ParseError::UnknownIdentifier { position: 0, .. }
        ));
        assert!(matches!(parse_ic("x^1.5", 1).unwrap_err(), ParseError::Syntax { position: 2, .. }));
        assert!(matches!(parse_ic("x $ 2", 1).unwrap_err(), ParseError::Syntax { position: 2, .. }));
        assert!(matches!(parse_ic("x 2", 1).unwrap_err(), ParseError::Syntax { position: 2, .. }));
        assert!(parse_ic("", 1).is_err());
    }

    #[test]
    fn display_roundtrips_through_the_parser() {
        let e = parse_ic("-sin(2*pi*x1)^3 + x2/4", 2).unwrap();
        let again = parse_ic(&e.to_string(), 2).unwrap();
        for p in [[0.1, 0.7], [0.4, 0.2]] {
            assert_eq!(e.eval(&p), again.eval(&p));
        }
    }

    fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (0..dim).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Sinh), Just(Func::Cosh), Just(Func::Exp)];
            let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
                (inner.clone(), -3i32..=3).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
                (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_expressions_parse_back(e in arb_expr(3), x in proptest::collection::vec(0.0f64..1.0, 3)) {
            let again = parse_ic(&e.to_string(), 3).unwrap();
            prop_assert_eq!(&again, &e);
            let (a, b) = (e.eval(&x), again.eval(&x));
            prop_assert!(a == b || (a.is_nan() && b.is_nan()));
        }

        #[test]
        fn garbage_never_panics(text in "[ -~]{0,24}") {
            let _ = parse_ic(&text, 2);
        }
    }
}
