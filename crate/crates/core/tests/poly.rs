use kirchhoff::poly::{det_and_adjugate, det_bareiss, det_cofactor, edge_vars, mat_mul, MultiPoly, PolyMatrix};
use kirchhoff::rational::{frac, int, Rational};
use proptest::prelude::*;

fn vars3() -> Vec<String> {
    edge_vars(3)
}

fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..=5, 1i64..=4), 0..6).prop_map(|terms| {
        MultiPoly::from_terms(&vars3(), terms.into_iter().map(|(e, n, d)| (e, frac(n, d)))).unwrap()
    })
}

fn point_strategy() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..=6, 1i64..=5), 3).prop_map(|v| v.into_iter().map(|(n, d)| frac(n, d)).collect())
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = PolyMatrix> {
    prop::collection::vec(poly_strategy(), n * n).prop_map(move |entries| entries.chunks(n).map(|r| r.to_vec()).collect())
}

#[test]
fn display_examples() {
    let v = edge_vars(2);
    let a1 = MultiPoly::var(&v, 0);
    let a2 = MultiPoly::var(&v, 1);
    assert_eq!(a1.add(&a2).to_string(), "A1 + A2");
    assert_eq!(a1.mul(&a2).scale(&int(3)).sub(&a1).to_string(), "3*A1*A2 + -A1");
    assert_eq!(MultiPoly::zero(&v).to_string(), "0");
    let p: MultiPoly = "A1^2 - 1/2*A1*A2 + 3".parse().unwrap();
    assert_eq!(p.coefficient(&[1, 1]), frac(-1, 2));
}

#[test]
fn determinant_small_cases() {
    let v = edge_vars(2);
    let a = |i| MultiPoly::var(&v, i);
    let m = vec![vec![a(0).add(&a(1)), a(1).neg()], vec![a(1).neg(), a(1)]];
    let expect = a(0).mul(&a(1));
    assert_eq!(det_cofactor(&m).unwrap(), expect);
    assert_eq!(det_bareiss(&m).unwrap(), expect);
    let empty: PolyMatrix = Vec::new();
    assert_eq!(det_bareiss(&empty).unwrap().as_constant(), Some(int(1)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn text_round_trip(p in poly_strategy()) {
        let back = MultiPoly::parse_with_vars(&p.to_string(), &vars3()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn ring_operations_commute_with_evaluation(p in poly_strategy(), q in poly_strategy(), x in point_strategy()) {
        let (pv, qv) = (p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
        prop_assert_eq!(p.add(&q).evaluate(&x).unwrap(), &pv + &qv);
        prop_assert_eq!(p.mul(&q).evaluate(&x).unwrap(), &pv * &qv);
        prop_assert_eq!(p.pow(3).evaluate(&x).unwrap(), &pv * &pv * &pv);
        prop_assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn product_rule_and_substitution(p in poly_strategy(), q in poly_strategy(), c in -4i64..=4) {
        let lhs = p.mul(&q).derivative(1);
        let rhs = p.derivative(1).mul(&q).add(&p.mul(&q.derivative(1)));
        prop_assert_eq!(lhs, rhs);
        let s = p.substitute(0, &int(c));
        prop_assert_eq!(s.degree_in(0), 0);
        prop_assert_eq!(p.compose(0, &MultiPoly::constant(&vars3(), int(c))), s);
    }

    #[test]
    fn exact_division_inverts_multiplication(p in poly_strategy(), q in poly_strategy()) {
        prop_assume!(!q.is_zero());
        prop_assert_eq!(p.mul(&q).div_exact(&q).unwrap(), p);
    }

    #[test]
    fn bareiss_matches_cofactor(m in matrix_strategy(3)) {
        prop_assert_eq!(det_bareiss(&m).unwrap(), det_cofactor(&m).unwrap());
    }

    #[test]
    fn adjugate_identity(m in matrix_strategy(3)) {
        let (det, adj) = det_and_adjugate(&m).unwrap();
        let prod = mat_mul(&m, &adj).unwrap();
        for (i, row) in prod.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if i == j {
                    prop_assert_eq!(entry, &det);
                } else {
                    prop_assert!(entry.is_zero());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn bareiss_matches_cofactor_4x4(m in matrix_strategy(4)) {
        prop_assert_eq!(det_bareiss(&m).unwrap(), det_cofactor(&m).unwrap());
    }
}
