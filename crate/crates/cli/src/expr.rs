//! Expression syntax: parser and canonical printer.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary minus, `^`.
//! Numeric literals are non-negative; a leading minus is a [`Expr::Neg`]
//! node. `p/q` with no spaces is a rational literal, `p / q` a division.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use species_idr::rational::{format_rational, Rational};
use species_idr::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerSpec {
    /// `e^X`
    Exp,
    /// `E`
    Combinatorial,
    /// `K·E` for a differential constant `K`.
    Constant(Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryFn {
    D,
    Ev,
    Exp,
    Log,
    Ord,
    Gs,
    Inv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryFn {
    Pow,
    Comp,
    FComp,
    Dist,
}

impl UnaryFn {
    const ALL: [UnaryFn; 7] =
        [UnaryFn::D, UnaryFn::Ev, UnaryFn::Exp, UnaryFn::Log, UnaryFn::Ord, UnaryFn::Gs, UnaryFn::Inv];

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::D => "D",
            UnaryFn::Ev => "Ev",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Ord => "ord",
            UnaryFn::Gs => "gs",
            UnaryFn::Inv => "inv",
        }
    }
}

impl BinaryFn {
    const ALL: [BinaryFn; 4] = [BinaryFn::Pow, BinaryFn::Comp, BinaryFn::FComp, BinaryFn::Dist];

    pub fn name(self) -> &'static str {
        match self {
            BinaryFn::Pow => "pow",
            BinaryFn::Comp => "comp",
            BinaryFn::FComp => "fcomp",
            BinaryFn::Dist => "dist",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    X,
    /// Combinatorial exponential `E = Σ E_n`.
    E,
    Set(usize),
    Cycle(usize),
    L,
    Cyc,
    ExpX,
    ExpLambda(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, usize),
    /// `J(e)` with the ring's own integral, or `J[T](e)`.
    Integral(Option<TowerSpec>, Box<Expr>),
    DivPow(Box<Expr>, usize),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinaryFn, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected input"));
        }
        Ok(e)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(BigInt::from(n)))
    }

    /// Replaces variables by their bindings.
    pub fn substitute(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> Result<Expr> {
        let sub = |e: &Expr| e.substitute(lookup).map(Box::new);
        Ok(match self {
            Expr::Var(name) => lookup(name).ok_or_else(|| Error::UnknownIdentifier(name.clone()))?,
            Expr::Neg(a) => Expr::Neg(sub(a)?),
            Expr::Add(a, b) => Expr::Add(sub(a)?, sub(b)?),
            Expr::Sub(a, b) => Expr::Sub(sub(a)?, sub(b)?),
            Expr::Mul(a, b) => Expr::Mul(sub(a)?, sub(b)?),
            Expr::Div(a, b) => Expr::Div(sub(a)?, sub(b)?),
            Expr::Pow(a, k) => Expr::Pow(sub(a)?, *k),
            Expr::Integral(t, a) => {
                let t = match t {
                    Some(TowerSpec::Constant(k)) => Some(TowerSpec::Constant(sub(k)?)),
                    other => other.clone(),
                };
                Expr::Integral(t, sub(a)?)
            }
            Expr::DivPow(a, n) => Expr::DivPow(sub(a)?, *n),
            Expr::Unary(f, a) => Expr::Unary(*f, sub(a)?),
            Expr::Binary(f, a, b) => Expr::Binary(*f, sub(a)?, sub(b)?),
            leaf => leaf.clone(),
        })
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.level() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn lambda_text(l: &Rational) -> String {
    if *l == -Rational::one() {
        "-".to_string()
    } else {
        format_rational(l)
    }
}

impl fmt::Display for TowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerSpec::Exp => write!(f, "exp"),
            TowerSpec::Combinatorial => write!(f, "E"),
            TowerSpec::Constant(k) => write!(f, "const:{k}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{}", format_rational(q)),
            Expr::X => write!(f, "X"),
            Expr::E => write!(f, "E"),
            Expr::Set(n) => write!(f, "E{n}"),
            Expr::Cycle(n) => write!(f, "C{n}"),
            Expr::L => write!(f, "L"),
            Expr::Cyc => write!(f, "Cyc"),
            Expr::ExpX => write!(f, "eX"),
            Expr::ExpLambda(l) => write!(f, "e({}X)", lambda_text(l)),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_at(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, 2)?;
                write!(f, "*")?;
                write_at(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_at(f, a, 2)?;
                write!(f, " / ")?;
                write_at(f, b, 3)
            }
            Expr::Pow(a, k) => {
                write_at(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Integral(None, a) => write!(f, "J({a})"),
            Expr::Integral(Some(t), a) => write!(f, "J[{t}]({a})"),
            Expr::DivPow(a, n) => write!(f, "divpow({a}, {n})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "{}({a}, {b})", op.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { position: self.pos, message: message.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let len = self.rest().find(|c: char| !c.is_ascii_digit()).unwrap_or(self.rest().len());
        if len == 0 {
            return None;
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Some(s)
    }

    fn index(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        let d = self.digits().ok_or_else(|| self.error("expected a non-negative integer"))?;
        d.parse().map_err(|_| Error::Syntax { position: start, message: "integer too large".into() })
    }

    /// `p` or `p/q` with no whitespace around the slash.
    fn literal(&mut self) -> Result<Option<Rational>> {
        let start = self.pos;
        let Some(p) = self.digits() else { return Ok(None) };
        let p: BigInt = p.parse().expect("digits");
        if self.peek() == Some('/') && self.src[self.pos + 1..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
            let q: BigInt = self.digits().expect("checked").parse().expect("digits");
            if q.is_zero() {
                return Err(Error::Syntax { position: start, message: "zero denominator".into() });
            }
            return Ok(Some(Rational::new(p, q)));
        }
        Ok(Some(Rational::from_integer(p)))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), self.index()?));
        }
        Ok(base)
    }

    fn word(&mut self) -> &'a str {
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        let w = &self.rest()[..len];
        self.pos += len;
        w
    }

    fn args(&mut self, n: usize) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.expect(',')?;
            }
            out.push(self.sum()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn exp_lambda(&mut self) -> Result<Expr> {
        self.expect('(')?;
        let negative = self.eat('-');
        self.skip_ws();
        let mut lambda = self.literal()?.unwrap_or_else(Rational::one);
        self.eat('*');
        self.expect('X')?;
        self.expect(')')?;
        if negative {
            lambda = -lambda;
        }
        Ok(Expr::ExpLambda(lambda))
    }

    fn tower(&mut self) -> Result<TowerSpec> {
        self.skip_ws();
        let start = self.pos;
        let t = match self.word() {
            "exp" => TowerSpec::Exp,
            "E" => TowerSpec::Combinatorial,
            "const" => {
                self.expect(':')?;
                TowerSpec::Constant(Box::new(self.sum()?))
            }
            _ => {
                return Err(Error::Syntax {
                    position: start,
                    message: "expected a tower: exp, E or const:<expr>".into(),
                })
            }
        };
        self.expect(']')?;
        Ok(t)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        if let Some(q) = self.literal()? {
            return Ok(Expr::Num(q));
        }
        if self.eat('(') {
            let e = self.sum()?;
            self.expect(')')?;
            return Ok(e);
        }
        let word = self.word();
        if word.is_empty() {
            return Err(self.error("expected an expression"));
        }
        let indexed = |prefix: char| -> Option<Result<usize>> {
            let rest = word.strip_prefix(prefix)?;
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            Some(match rest.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::Syntax { position: start, message: format!("bad index in {word}") }),
                Ok(n) => Ok(n),
            })
        };
        if let Some(n) = indexed('E') {
            return Ok(Expr::Set(n?));
        }
        if let Some(n) = indexed('C') {
            return Ok(Expr::Cycle(n?));
        }
        let next_is_paren = {
            self.skip_ws();
            self.peek() == Some('(')
        };
        if let Some(op) = UnaryFn::ALL.iter().find(|f| f.name() == word) {
            if next_is_paren {
                let mut a = self.args(1)?;
                return Ok(Expr::Unary(*op, Box::new(a.remove(0))));
            }
        }
        if let Some(op) = BinaryFn::ALL.iter().find(|f| f.name() == word) {
            if next_is_paren {
                let mut a = self.args(2)?;
                let b = a.remove(1);
                return Ok(Expr::Binary(*op, Box::new(a.remove(0)), Box::new(b)));
            }
        }
        Ok(match word {
            "X" => Expr::X,
            "E" => Expr::E,
            "L" => Expr::L,
            "Cyc" => Expr::Cyc,
            "eX" => Expr::ExpX,
            "e" if next_is_paren => self.exp_lambda()?,
            "J" => {
                let tower = if self.eat('[') { Some(self.tower()?) } else { None };
                let mut a = self.args(1)?;
                Expr::Integral(tower, Box::new(a.remove(0)))
            }
            "divpow" if next_is_paren => {
                self.expect('(')?;
                let a = self.sum()?;
                self.expect(',')?;
                let n = self.index()?;
                self.expect(')')?;
                Expr::DivPow(Box::new(a), n)
            }
            w if w.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => {
                if next_is_paren {
                    return Err(Error::UnknownIdentifier(w.to_string()));
                }
                Expr::Var(w.to_string())
            }
            _ => return Err(Error::Syntax { position: start, message: format!("unexpected '{word}'") }),
        })
    }
}

/// Whether `name` may be bound with `let`.
pub fn is_bindable(name: &str) -> bool {
    let reserved = ["X", "E", "L", "Cyc", "eX", "e", "J", "divpow"];
    let indexed = |p: char| {
        name.strip_prefix(p)
            .is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
    };
    name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !reserved.contains(&name)
        && !indexed('E')
        && !indexed('C')
        && !UnaryFn::ALL.iter().any(|f| f.name() == name)
        && !BinaryFn::ALL.iter().any(|f| f.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-X^2"), Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::X), 2))));
        assert_eq!(
            p("-X + X"),
            Expr::Add(Box::new(Expr::Neg(Box::new(Expr::X))), Box::new(Expr::X))
        );
        assert_eq!(p("1/3"), Expr::Num(Rational::new(1.into(), 3.into())));
        assert_eq!(p("1 / 3"), Expr::Div(Box::new(Expr::int(1)), Box::new(Expr::int(3))));
        assert_eq!(p("X - X - X").to_string(), "X - X - X");
        assert_eq!(p("X - (X - X)").to_string(), "X - (X - X)");
        assert_eq!(p("(X*X)^2").to_string(), "(X*X)^2");
    }

    #[test]
    fn forms() {
        assert_eq!(p("J[exp](X^2/2)").to_string(), "J[exp](X^2 / 2)");
        assert_eq!(p("J[const:1 + X^3 - 3*C3](E2)").to_string(), "J[const:1 + X^3 - 3*C3](E2)");
        assert_eq!(p("e(2X)"), Expr::ExpLambda(Rational::from_integer(2.into())));
        assert_eq!(p("e(-X)").to_string(), "e(-X)");
        assert_eq!(p("e(1/2*X)").to_string(), "e(1/2X)");
        assert_eq!(p("divpow(X, 3)"), Expr::DivPow(Box::new(Expr::X), 3));
        assert_eq!(p("Ev(C3)"), Expr::Unary(UnaryFn::Ev, Box::new(Expr::Cycle(3))));
        assert_eq!(p("f + 1"), Expr::Add(Box::new(Expr::Var("f".into())), Box::new(Expr::int(1))));
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("X +"), Err(Error::Syntax { position: 3, .. })));
        assert!(matches!(Expr::parse("foo(X)"), Err(Error::UnknownIdentifier(_))));
        assert!(matches!(Expr::parse("J[zz](X)"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("E0"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("(X"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("X)"), Err(Error::Syntax { position: 1, .. })));
    }

    #[test]
    fn bindable_names() {
        assert!(is_bindable("f"));
        assert!(is_bindable("phi2"));
        assert!(!is_bindable("E3"));
        assert!(!is_bindable("exp"));
        assert!(!is_bindable("2x"));
    }
}
