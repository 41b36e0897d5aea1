//! Evaluation of expressions in a chosen ring.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use species_idr::calculus::{Calculus, Distance, Order};
use species_idr::linear::{lin_from_set_species, LinearSpeciesRing};
use species_idr::localization::{LocContext, LocalizedRing};
use species_idr::rational::{int, Rational};
use species_idr::ring::IdRing;
use species_idr::series::{functorial_compose_series, gs, EGFSeries};
use species_idr::{DifferentialTower, Error, Result, SetSpeciesRing, SpeciesPoly};

use crate::expr::{BinaryFn, Expr, TowerSpec, UnaryFn};

/// A ring the expression language can evaluate in.
pub trait ExprRing: IdRing {
    /// Image of a set-species polynomial.
    fn embed(&self, p: &SpeciesPoly) -> Result<Self::Elem>;

    fn series(&self, a: &Self::Elem) -> Result<EGFSeries>;

    /// The underlying set-species polynomial, where there is one.
    fn as_species(&self, _a: &Self::Elem) -> Option<SpeciesPoly> {
        None
    }

    fn integrate_with(&self, tower: &DifferentialTower, _a: &Self::Elem) -> Result<Self::Elem> {
        let _ = tower;
        Err(Error::UnsupportedContext(format!("J[T] needs the set-species ring, not {}", self.name())))
    }
}

impl ExprRing for SetSpeciesRing {
    fn embed(&self, p: &SpeciesPoly) -> Result<SpeciesPoly> {
        Ok(p.clone())
    }

    fn series(&self, a: &SpeciesPoly) -> Result<EGFSeries> {
        Ok(gs(a))
    }

    fn as_species(&self, a: &SpeciesPoly) -> Option<SpeciesPoly> {
        Some(a.clone())
    }

    fn integrate_with(&self, tower: &DifferentialTower, a: &SpeciesPoly) -> Result<SpeciesPoly> {
        Ok(tower.integrate(a))
    }
}

impl ExprRing for LinearSpeciesRing {
    fn embed(&self, p: &SpeciesPoly) -> Result<Self::Elem> {
        lin_from_set_species(p)
    }

    fn series(&self, a: &Self::Elem) -> Result<EGFSeries> {
        Ok(a.series())
    }
}

impl ExprRing for LocalizedRing {
    fn embed(&self, p: &SpeciesPoly) -> Result<Self::Elem> {
        Ok(self.context().from_poly(p.clone()))
    }

    fn series(&self, a: &Self::Elem) -> Result<EGFSeries> {
        self.context().gs(a)
    }
}

/// The result of evaluating an expression.
#[derive(Clone, Debug)]
pub enum Value<T> {
    Elem(T),
    Series(EGFSeries),
    Order(Order),
    Distance(Distance),
}

impl<T> Value<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Elem(_) => "element",
            Value::Series(_) => "series",
            Value::Order(_) => "order",
            Value::Distance(_) => "distance",
        }
    }
}

/// `Value` paired with its ring for printing.
pub struct Shown<'a, R: IdRing>(pub &'a R, pub &'a Value<R::Elem>);

impl<R: IdRing> fmt::Display for Shown<'_, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.1 {
            Value::Elem(e) => write!(f, "{}", self.0.format(e)),
            Value::Series(s) => write!(f, "{s}"),
            Value::Order(o) => write!(f, "{o}"),
            Value::Distance(d) => write!(f, "{d}"),
        }
    }
}

fn atom_species(e: &Expr, trunc: usize) -> Option<SpeciesPoly> {
    Some(match e {
        Expr::X => SpeciesPoly::x(trunc),
        Expr::E => SpeciesPoly::combinatorial_exp(trunc),
        Expr::Set(n) => SpeciesPoly::set_species(trunc, *n),
        Expr::Cycle(n) => SpeciesPoly::cycle_species(trunc, *n),
        Expr::L => SpeciesPoly::linear_orders(trunc),
        Expr::Cyc => SpeciesPoly::cycles(trunc),
        Expr::ExpX => SpeciesPoly::analytic_exp(trunc, &int(1)),
        Expr::ExpLambda(l) => SpeciesPoly::analytic_exp(trunc, l),
        _ => return None,
    })
}

/// Evaluates `e` in the set-species ring with the analytic tower.
pub fn eval_species(e: &Expr, trunc: usize) -> Result<SpeciesPoly> {
    let ring = SetSpeciesRing::analytic(trunc);
    Evaluator::new(&ring).species(e)
}

/// Builds the tower named by `spec` at bound `trunc`.
pub fn build_tower(spec: &TowerSpec, trunc: usize) -> Result<DifferentialTower> {
    Ok(match spec {
        TowerSpec::Exp => DifferentialTower::analytic(trunc),
        TowerSpec::Combinatorial => DifferentialTower::combinatorial(trunc),
        TowerSpec::Constant(k) => DifferentialTower::from_constant(&eval_species(k, trunc)?)?,
    })
}

/// Builds the localization context for `K`.
pub fn build_context(k: &Expr, trunc: usize) -> Result<Arc<LocContext>> {
    LocContext::new(eval_species(k, trunc)?)
}

pub struct Evaluator<'a, R: ExprRing> {
    ring: &'a R,
}

impl<'a, R: ExprRing> Evaluator<'a, R> {
    pub fn new(ring: &'a R) -> Self {
        Evaluator { ring }
    }

    pub fn eval(&self, e: &Expr) -> Result<Value<R::Elem>> {
        let r = self.ring;
        let calc = Calculus::new(r);
        Ok(Value::Elem(match e {
            Expr::Unary(UnaryFn::Ord, a) => return Ok(Value::Order(calc.ord(&self.elem(a)?))),
            Expr::Unary(UnaryFn::Gs, a) => return Ok(Value::Series(r.series(&self.elem(a)?)?)),
            Expr::Binary(BinaryFn::Dist, a, b) => {
                return Ok(Value::Distance(calc.dist(&self.elem(a)?, &self.elem(b)?)))
            }
            Expr::Binary(BinaryFn::FComp, a, b) => return Ok(Value::Series(self.fcomp(a, b)?)),
            Expr::Num(q) => r.scale(&r.one(), q)?,
            Expr::Var(name) => return Err(Error::UnknownIdentifier(name.clone())),
            Expr::Neg(a) => r.neg(&self.elem(a)?),
            Expr::Add(a, b) => r.add(&self.elem(a)?, &self.elem(b)?),
            Expr::Sub(a, b) => r.sub(&self.elem(a)?, &self.elem(b)?),
            Expr::Mul(a, b) => r.mul(&self.elem(a)?, &self.elem(b)?),
            Expr::Div(a, b) => r.mul(&self.elem(a)?, &r.inverse(&self.elem(b)?)?),
            Expr::Pow(a, k) => r.pow(&self.elem(a)?, *k),
            Expr::Integral(None, a) => r.integrate(&self.elem(a)?),
            Expr::Integral(Some(t), a) => r.integrate_with(&build_tower(t, r.trunc())?, &self.elem(a)?)?,
            Expr::DivPow(a, n) => calc.divided_power(&self.elem(a)?, *n),
            Expr::Unary(op, a) => {
                let x = self.elem(a)?;
                match op {
                    UnaryFn::D => r.derive(&x),
                    UnaryFn::Ev => r.evaluate(&x),
                    UnaryFn::Exp => calc.exp(&x)?,
                    UnaryFn::Log => calc.log(&x)?,
                    UnaryFn::Inv => r.inverse(&x)?,
                    UnaryFn::Ord | UnaryFn::Gs => unreachable!("handled above"),
                }
            }
            Expr::Binary(op, a, b) => {
                let (x, y) = (self.elem(a)?, self.elem(b)?);
                match op {
                    BinaryFn::Pow => calc.pow(&x, &y)?,
                    BinaryFn::Comp => calc.id_compose(&x, &y)?,
                    BinaryFn::Dist | BinaryFn::FComp => unreachable!("handled above"),
                }
            }
            atom => r.embed(&atom_species(atom, r.trunc()).expect("remaining nodes are atoms"))?,
        }))
    }

    /// Evaluates to a ring element or fails.
    pub fn elem(&self, e: &Expr) -> Result<R::Elem> {
        match self.eval(e)? {
            Value::Elem(x) => Ok(x),
            other => Err(Error::Eval(format!("{e} is a {}, not a ring element", other.kind()))),
        }
    }

    fn species(&self, e: &Expr) -> Result<SpeciesPoly> {
        let x = self.elem(e)?;
        self.ring
            .as_species(&x)
            .ok_or_else(|| Error::UnsupportedContext(format!("{e} is not a set-species polynomial")))
    }

    fn fcomp(&self, outer: &Expr, inner: &Expr) -> Result<EGFSeries> {
        // Both sides must be re-evaluated at every bound up to the count limit.
        self.species(outer)?;
        self.species(inner)?;
        let build = |e: &Expr| {
            let e = e.clone();
            move |t: usize| eval_species(&e, t)
        };
        functorial_compose_series(build(outer), build(inner), self.ring.trunc())
    }
}

/// `let` bindings; stored expressions are closed.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    map: BTreeMap<String, Expr>,
}

impl Bindings {
    pub fn resolve(&self, e: &Expr) -> Result<Expr> {
        e.substitute(&|name| self.map.get(name).cloned())
    }

    pub fn bind(&mut self, name: &str, e: &Expr) -> Result<Expr> {
        if !crate::expr::is_bindable(name) {
            return Err(Error::Syntax { position: 0, message: format!("cannot bind '{name}'") });
        }
        let closed = self.resolve(e)?;
        self.map.insert(name.to_string(), closed.clone());
        Ok(closed)
    }
}

/// Parses a scalar weight like `0`, `-1` or `1/2`.
pub fn parse_weight(s: &str) -> Result<Rational> {
    species_idr::rational::parse_rational(s.trim())
        .ok_or_else(|| Error::Syntax { position: 0, message: format!("not a rational: {s}") })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_set(src: &str) -> String {
        let ring = SetSpeciesRing::analytic(8);
        let v = Evaluator::new(&ring).eval(&Expr::parse(src).unwrap()).unwrap();
        Shown(&ring, &v).to_string()
    }

    #[test]
    fn set_species() {
        assert_eq!(eval_set("D(C3) - X^2"), "0");
        assert_eq!(eval_set("Ev(C3)"), "-1/3*X^3 + C3");
        assert_eq!(eval_set("J[exp](X^2/2)"), "1/6*X^3");
        assert_eq!(eval_set("ord(X^3)"), "3");
        assert_eq!(eval_set("dist(X, X + X^4)"), "1/16");
        assert_eq!(eval_set("gs(E)"), eval_set("gs(eX)"));
        assert_eq!(eval_set("log(E)"), "X");
        assert_eq!(eval_set("comp(C3, X)"), "C3");
        assert_eq!(eval_set("2*divpow(X, 2)"), "X^2");
    }

    #[test]
    fn other_rings() {
        let lin = LinearSpeciesRing::new(6);
        let v = Evaluator::new(&lin).eval(&Expr::parse("D(L)").unwrap()).unwrap();
        assert_eq!(Shown(&lin, &v).to_string(), "[1, 2, 6, 24, 120, 720] + O(6)");
        assert!(matches!(
            Evaluator::new(&lin).eval(&Expr::parse("J[E](X)").unwrap()),
            Err(Error::UnsupportedContext(_))
        ));
        let ctx = build_context(&Expr::parse("E").unwrap(), 6).unwrap();
        let loc = LocalizedRing::new(ctx);
        let v = Evaluator::new(&loc).eval(&Expr::parse("E*(1 / E) - 1").unwrap()).unwrap();
        assert_eq!(Shown(&loc, &v).to_string(), "(0)/K^0");
    }

    #[test]
    fn bindings() {
        let mut b = Bindings::default();
        b.bind("f", &Expr::parse("X + 1").unwrap()).unwrap();
        let g = b.bind("g", &Expr::parse("f*f").unwrap()).unwrap();
        assert_eq!(g.to_string(), "(X + 1)*(X + 1)");
        assert!(b.bind("E2", &Expr::X).is_err());
        assert!(matches!(b.resolve(&Expr::parse("h").unwrap()), Err(Error::UnknownIdentifier(_))));
    }
}
