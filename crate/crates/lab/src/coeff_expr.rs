//! Coefficient expressions in `x`: parsing, printing, evaluation and exact
//! symbolic differentiation.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' ['-'] integer)?
//! base   := number ['i'] | 'i' | 'x' | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions are `sin`, `cos`, `exp`, `tanh` (one argument) and
//! `bump(c, w)` or `bump(c, w, n)` with real constant arguments. Every node
//! is built through the folding constructors, so printing and reparsing
//! gives back the same tree.

use std::fmt;

use dispersym_core::algebra::{GaussianRational, Rational};
use num_complex::Complex64;

use crate::chi::bump_deriv;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoeffExpr {
    Const(GaussianRational),
    X,
    Add(Box<CoeffExpr>, Box<CoeffExpr>),
    Sub(Box<CoeffExpr>, Box<CoeffExpr>),
    Mul(Box<CoeffExpr>, Box<CoeffExpr>),
    Div(Box<CoeffExpr>, Box<CoeffExpr>),
    Neg(Box<CoeffExpr>),
    Pow(Box<CoeffExpr>, i32),
    Apply(Func, Box<CoeffExpr>),
    /// `∂^deriv` of the plateau bump centred at `center` with support width `width`.
    Bump {
        center: Rational,
        width: Rational,
        deriv: u32,
    },
}

use CoeffExpr as E;

impl CoeffExpr {
    pub fn constant(c: GaussianRational) -> Self {
        E::Const(c)
    }

    pub fn real(r: Rational) -> Self {
        E::Const(GaussianRational::real(r))
    }

    pub fn zero() -> Self {
        E::Const(GaussianRational::ZERO)
    }

    pub fn one() -> Self {
        E::Const(GaussianRational::ONE)
    }

    pub fn as_const(&self) -> Option<GaussianRational> {
        match self {
            E::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    pub fn add(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (E::Const(p), E::Const(q)) => E::Const(*p + *q),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => E::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (E::Const(p), E::Const(q)) => E::Const(*p - *q),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Self::neg(b),
            _ => E::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (E::Const(p), E::Const(q)) => E::Const(*p * *q),
            _ if a.is_zero() || b.is_zero() => Self::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => E::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// `None` when dividing by the constant zero.
    pub fn div(a: Self, b: Self) -> Option<Self> {
        if b.is_zero() {
            return None;
        }
        Some(match (&a, &b) {
            (E::Const(p), E::Const(q)) => E::Const(*p * q.inv()),
            _ if a.is_zero() => Self::zero(),
            _ if b.is_one() => a,
            _ => E::Div(Box::new(a), Box::new(b)),
        })
    }

    pub fn neg(a: Self) -> Self {
        match a {
            E::Const(c) => E::Const(-c),
            E::Neg(inner) => *inner,
            other => E::Neg(Box::new(other)),
        }
    }

    /// `None` for a negative power of the constant zero.
    pub fn pow(a: Self, n: i32) -> Option<Self> {
        if let E::Const(c) = &a {
            if c.is_zero() && n < 0 {
                return None;
            }
            let p = c.pow(n.unsigned_abs());
            return Some(E::Const(if n < 0 { p.inv() } else { p }));
        }
        Some(match n {
            0 => Self::one(),
            1 => a,
            _ => E::Pow(Box::new(a), n),
        })
    }

    pub fn apply(f: Func, a: Self) -> Self {
        E::Apply(f, Box::new(a))
    }

    pub fn bump(center: Rational, width: Rational, deriv: u32) -> Self {
        E::Bump { center, width, deriv }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).parse_all()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            E::Const(c) => c.to_c64(),
            E::X => Complex64::new(x, 0.0),
            E::Add(a, b) => a.eval(x) + b.eval(x),
            E::Sub(a, b) => a.eval(x) - b.eval(x),
            E::Mul(a, b) => a.eval(x) * b.eval(x),
            E::Div(a, b) => a.eval(x) / b.eval(x),
            E::Neg(a) => -a.eval(x),
            E::Pow(a, n) => a.eval(x).powi(*n),
            E::Apply(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Tanh => v.tanh(),
                }
            }
            E::Bump { center, width, deriv } => {
                Complex64::new(bump_deriv(x, center.to_f64(), width.to_f64(), *deriv as usize), 0.0)
            }
        }
    }

    pub fn derivative(&self) -> Self {
        match self {
            E::Const(_) => Self::zero(),
            E::X => Self::one(),
            E::Add(a, b) => Self::add(a.derivative(), b.derivative()),
            E::Sub(a, b) => Self::sub(a.derivative(), b.derivative()),
            E::Mul(a, b) => {
                Self::add(Self::mul(a.derivative(), (**b).clone()), Self::mul((**a).clone(), b.derivative()))
            }
            E::Div(a, b) => {
                let first = Self::div(a.derivative(), (**b).clone()).expect("nonzero denominator");
                let num = Self::mul((**a).clone(), b.derivative());
                let den = Self::pow((**b).clone(), 2).expect("nonzero denominator");
                Self::sub(first, Self::div(num, den).expect("nonzero denominator"))
            }
            E::Neg(a) => Self::neg(a.derivative()),
            E::Pow(a, n) => {
                let outer = Self::mul(
                    Self::real(Rational::int(*n as i128)),
                    Self::pow((**a).clone(), n - 1).expect("non-constant base"),
                );
                Self::mul(outer, a.derivative())
            }
            E::Apply(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Self::apply(Func::Cos, inner),
                    Func::Cos => Self::neg(Self::apply(Func::Sin, inner)),
                    Func::Exp => Self::apply(Func::Exp, inner),
                    Func::Tanh => {
                        Self::sub(Self::one(), Self::pow(Self::apply(Func::Tanh, inner), 2).expect("non-constant base"))
                    }
                };
                Self::mul(outer, a.derivative())
            }
            E::Bump { center, width, deriv } => Self::bump(*center, *width, deriv + 1),
        }
    }

    pub fn derivative_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |e, _| e.derivative())
    }

    /// True for a folded constant node.
    pub fn is_constant(&self) -> bool {
        self.as_const().is_some()
    }
}

fn fmt_rational(r: Rational) -> String {
    if r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Const(c) => {
                if c.im.is_zero() {
                    write!(f, "({})", fmt_rational(c.re))
                } else if c.re.is_zero() {
                    write!(f, "({}*i)", fmt_rational(c.im))
                } else {
                    let sign = if c.im < Rational::ZERO { "-" } else { "+" };
                    write!(f, "({}{}{}*i)", fmt_rational(c.re), sign, fmt_rational(c.im.abs()))
                }
            }
            E::X => write!(f, "x"),
            E::Add(a, b) => write!(f, "({a}+{b})"),
            E::Sub(a, b) => write!(f, "({a}-{b})"),
            E::Mul(a, b) => write!(f, "({a}*{b})"),
            E::Div(a, b) => write!(f, "({a}/{b})"),
            E::Neg(a) => write!(f, "(-{a})"),
            E::Pow(a, n) => write!(f, "({a}^{n})"),
            E::Apply(g, a) => write!(f, "{}({a})", g.name()),
            E::Bump { center, width, deriv } => {
                write!(f, "bump({}, {}", fmt_rational(*center), fmt_rational(*width))?;
                if *deriv > 0 {
                    write!(f, ", {deriv}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {position}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Imag(Rational),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(r) => format!("number {}", fmt_rational(*r)),
            Tok::Imag(r) => format!("number {}i", fmt_rational(*r)),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

fn err(position: usize, expected: &[&str], found: String) -> ParseError {
    ParseError { position, expected: expected.iter().map(|s| s.to_string()).collect(), found }
}

/// Decimal with optional exponent, converted exactly.
fn decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    if exp.abs() > 30 {
        return None;
    }
    let m: Rational = mantissa.parse().ok()?;
    let scale = Rational::int(10i128.checked_pow(exp.unsigned_abs())?);
    Some(if exp >= 0 { m * scale } else { m * scale.recip() })
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0, tok: Tok::End, tok_start: 0 }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        while self.peek_char().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(c) = self.peek_char() else {
            self.tok = Tok::End;
            return Ok(());
        };
        let rest = &self.src[self.pos..];
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut n = 0;
            while n < bytes.len() && (bytes[n].is_ascii_digit() || bytes[n] == b'.') {
                n += 1;
            }
            if n < bytes.len() && (bytes[n] == b'e' || bytes[n] == b'E') {
                let mut m = n + 1;
                if m < bytes.len() && (bytes[m] == b'+' || bytes[m] == b'-') {
                    m += 1;
                }
                let digits_start = m;
                while m < bytes.len() && bytes[m].is_ascii_digit() {
                    m += 1;
                }
                // "2exp(x)" is not an exponent
                if m > digits_start {
                    n = m;
                }
            }
            let text = &rest[..n];
            let value = decimal(text).ok_or_else(|| err(self.pos, &["number"], format!("{text:?}")))?;
            self.pos += n;
            let imaginary =
                rest[n..].starts_with('i') && !rest[n + 1..].chars().next().is_some_and(|c| c.is_ascii_alphanumeric());
            if imaginary {
                self.pos += 1;
                self.tok = Tok::Imag(value);
            } else {
                self.tok = Tok::Num(value);
            }
        } else if c.is_ascii_alphabetic() {
            let n = rest.find(|ch: char| !ch.is_ascii_alphanumeric()).unwrap_or(rest.len());
            self.tok = Tok::Ident(rest[..n].to_string());
            self.pos += n;
        } else if "+-*/^(),".contains(c) {
            self.tok = Tok::Sym(c);
            self.pos += c.len_utf8();
        } else {
            return Err(err(self.pos, &["expression"], format!("'{c}'")));
        }
        Ok(())
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        err(self.tok_start, expected, self.tok.describe())
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok != Tok::Sym(c) {
            return Err(self.fail(&[&format!("'{c}'")]));
        }
        self.advance()
    }

    fn parse_all(mut self) -> Result<CoeffExpr, ParseError> {
        self.advance()?;
        if self.tok == Tok::End {
            return Err(self.fail(&["expression"]));
        }
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.fail(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<CoeffExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.advance()?;
                    acc = E::add(acc, self.term()?);
                }
                Tok::Sym('-') => {
                    self.advance()?;
                    acc = E::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<CoeffExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.tok {
                Tok::Sym('*') => {
                    self.advance()?;
                    acc = E::mul(acc, self.factor()?);
                }
                Tok::Sym('/') => {
                    let at = self.tok_start;
                    self.advance()?;
                    let d = self.factor()?;
                    acc = E::div(acc, d).ok_or_else(|| err(at, &["nonzero divisor"], "division by zero".into()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<CoeffExpr, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.advance()?;
            return Ok(E::neg(self.factor()?));
        }
        let base = self.base()?;
        if self.tok != Tok::Sym('^') {
            return Ok(base);
        }
        let at = self.tok_start;
        self.advance()?;
        let negative = self.tok == Tok::Sym('-');
        if negative {
            self.advance()?;
        }
        let n = match &self.tok {
            Tok::Num(r) if r.is_integer() && r.numer().abs() <= 64 => r.numer() as i32,
            _ => return Err(self.fail(&["integer exponent"])),
        };
        self.advance()?;
        let n = if negative { -n } else { n };
        E::pow(base, n).ok_or_else(|| err(at, &["nonzero base"], "negative power of zero".into()))
    }

    fn base(&mut self) -> Result<CoeffExpr, ParseError> {
        let tok = self.tok.clone();
        match tok {
            Tok::Num(r) => {
                self.advance()?;
                Ok(E::real(r))
            }
            Tok::Imag(r) => {
                self.advance()?;
                Ok(E::Const(GaussianRational::imag(r)))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "i" => {
                    self.advance()?;
                    Ok(E::Const(GaussianRational::I))
                }
                "x" => {
                    self.advance()?;
                    Ok(E::X)
                }
                "sin" | "cos" | "exp" | "tanh" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        _ => Func::Tanh,
                    };
                    self.advance()?;
                    self.expect('(')?;
                    let a = self.expr()?;
                    self.expect(')')?;
                    Ok(E::apply(f, a))
                }
                "bump" => self.bump(),
                _ => Err(self.fail(&["number", "'i'", "'x'", "function", "'('"])),
            },
            _ => Err(self.fail(&["number", "'i'", "'x'", "function", "'('"])),
        }
    }

    fn real_const_arg(&mut self) -> Result<Rational, ParseError> {
        let at = self.tok_start;
        let e = self.expr()?;
        match e.as_const() {
            Some(c) if c.im.is_zero() => Ok(c.re),
            _ => Err(err(at, &["real constant"], format!("{e}"))),
        }
    }

    fn bump(&mut self) -> Result<CoeffExpr, ParseError> {
        self.advance()?;
        self.expect('(')?;
        let center = self.real_const_arg()?;
        self.expect(',')?;
        let width_at = self.tok_start;
        let width = self.real_const_arg()?;
        if width <= Rational::ZERO {
            return Err(err(width_at, &["positive width"], fmt_rational(width)));
        }
        let mut deriv = 0;
        if self.tok == Tok::Sym(',') {
            self.advance()?;
            let at = self.tok_start;
            let d = self.real_const_arg()?;
            if !d.is_integer() || d < Rational::ZERO || d.numer() > 16 {
                return Err(err(at, &["derivative order 0..=16"], fmt_rational(d)));
            }
            deriv = d.numer() as u32;
        }
        self.expect(')')?;
        Ok(E::bump(center, width, deriv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> CoeffExpr {
        CoeffExpr::parse(s).unwrap()
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.1"), E::real(Rational::new(1, 10)));
        assert_eq!(p("2.5e-2"), E::real(Rational::new(1, 40)));
        assert_eq!(p("3i"), E::Const(GaussianRational::imag(Rational::int(3))));
        assert_eq!(p("-0.05i"), E::Const(GaussianRational::imag(Rational::new(-1, 20))));
    }

    #[test]
    fn precedence() {
        assert_eq!(p("1+2*x"), E::add(E::one(), E::mul(E::real(Rational::int(2)), E::X)));
        assert_eq!(p("-x^2"), E::neg(E::pow(E::X, 2).unwrap()));
        assert_eq!(p("x^-1"), E::pow(E::X, -1).unwrap());
    }

    #[test]
    fn errors_carry_position_and_expectation() {
        let e = CoeffExpr::parse("1 + * x").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.expected.contains(&"'x'".to_string()));
        assert!(CoeffExpr::parse("sin(x").is_err());
        assert!(CoeffExpr::parse("").is_err());
        assert!(CoeffExpr::parse("bump(x, 1)").is_err());
        assert!(CoeffExpr::parse("x/0").is_err());
        assert!(CoeffExpr::parse("foo(x)").is_err());
    }
}
