use proptest::prelude::*;
use species_idr::rational::ratio;
use species_idr::Rational;
use species_idr_cli::expr::{BinaryFn, Expr, TowerSpec, UnaryFn};

fn q(p: i64, d: i64) -> Rational {
    ratio(p, d)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..20).prop_map(Expr::int),
        (1i64..9, 2i64..7).prop_map(|(p, d)| Expr::Num(q(p, d))),
        Just(Expr::X),
        Just(Expr::E),
        (1usize..6).prop_map(Expr::Set),
        (1usize..6).prop_map(Expr::Cycle),
        Just(Expr::L),
        Just(Expr::Cyc),
        Just(Expr::ExpX),
        prop_oneof![Just(q(-1, 1)), Just(q(1, 2)), Just(q(2, 1)), Just(q(-3, 2))].prop_map(Expr::ExpLambda),
        Just(Expr::Var("f".to_string())),
    ]
}

fn unary() -> impl Strategy<Value = UnaryFn> {
    prop_oneof![
        Just(UnaryFn::D),
        Just(UnaryFn::Ev),
        Just(UnaryFn::Exp),
        Just(UnaryFn::Log),
        Just(UnaryFn::Ord),
        Just(UnaryFn::Gs),
        Just(UnaryFn::Inv),
    ]
}

fn binary() -> impl Strategy<Value = BinaryFn> {
    prop_oneof![Just(BinaryFn::Pow), Just(BinaryFn::Comp), Just(BinaryFn::FComp), Just(BinaryFn::Dist)]
}

fn tower() -> impl Strategy<Value = Option<TowerSpec>> {
    prop_oneof![
        Just(None),
        Just(Some(TowerSpec::Exp)),
        Just(Some(TowerSpec::Combinatorial)),
        Just(Some(TowerSpec::Constant(Box::new(Expr::int(1))))),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 32, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |a| Expr::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), 0usize..4).prop_map(move |(x, k)| Expr::Pow(b(x), k)),
            (tower(), inner.clone()).prop_map(move |(t, x)| Expr::Integral(t, b(x))),
            (inner.clone(), 0usize..4).prop_map(move |(x, k)| Expr::DivPow(b(x), k)),
            (unary(), inner.clone()).prop_map(move |(op, x)| Expr::Unary(op, b(x))),
            (binary(), inner.clone(), inner).prop_map(move |(op, x, y)| Expr::Binary(op, b(x), b(y))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(e in expr()) {
        let text = e.to_string();
        let back = Expr::parse(&text);
        prop_assert!(back.is_ok(), "{text}: {back:?}");
        prop_assert_eq!(back.unwrap(), e, "{}", text);
    }
}

#[test]
fn printed_species_polynomials_parse() {
    for text in ["1 - 1/3*X^3 + C3", "X*E2*C3", "-X", "-1/3*X^3 + C3", "2*E2 - X^2"] {
        assert_eq!(Expr::parse(text).unwrap().to_string(), text);
    }
}
