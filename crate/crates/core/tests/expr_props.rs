use bvpdegree::expr::{check_homogeneity, Expression, HomogeneityDecl, Parity};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("t".to_string()),
        Just("pi".to_string()),
        (0u32..100).prop_map(|n| format!("{}", n as f64 / 8.0)),
    ]
}

fn expr_text() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (inner.clone(), prop::sample::select(vec!["sin", "cos", "abs", "sign", "exp"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({a}, {b})")),
        ]
    })
}

proptest! {
    #[test]
    fn display_round_trip(text in expr_text()) {
        let e = Expression::parse(&text, &["x", "t"]).unwrap();
        let again = Expression::parse(&e.to_string(), &["x", "t"]).unwrap();
        prop_assert_eq!(e.root(), again.root());
    }

    #[test]
    fn evaluation_is_bitwise_deterministic(text in expr_text(), x in 0.0..1.0f64, t in -5.0..5.0f64) {
        let e = Expression::parse(&text, &["x", "t"]).unwrap();
        let a = e.eval(&[x, t]);
        let b = e.eval(&[x, t]);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one evaluation failed"),
        }
    }

    #[test]
    fn odd_declarations_are_antisymmetric(
        c in prop::collection::vec(-3.0..3.0f64, 3),
        x in 0.0..1.0f64,
        t in -10.0..10.0f64,
    ) {
        let text = format!(
            "{}*t^3 + {}*sign(t)*abs(t)^3*cos(x) + {}*t*abs(t)^2",
            c[0], c[1], c[2]
        );
        let e = Expression::parse(&text, &["x", "t"]).unwrap();
        let decl = HomogeneityDecl { order: 3.0, parity: Parity::Odd, variable: "t".into() };
        let report = check_homogeneity(&e, &decl, 64);
        prop_assert!(report.passed, "{:?}", report);
        let plus = e.eval(&[x, t]).unwrap();
        let minus = e.eval(&[x, -t]).unwrap();
        prop_assert!((plus + minus).abs() <= 1e-12 * plus.abs().max(1.0));
    }
}
