use darboux::algebra::{parse, OperatorExpr};
use darboux::spectra::SymTridiagonal;
use darboux::ModelParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const DIM: usize = 2;

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("q1".to_string()),
        Just("q2".to_string()),
        Just("p1".to_string()),
        Just("p2".to_string()),
        Just("lambda".to_string()),
        Just("omega".to_string()),
        Just("hbar".to_string()),
        Just("D".to_string()),
        Just("D^-1".to_string()),
        Just("i".to_string()),
        (1i32..5).prop_map(|n| n.to_string()),
    ]
}

fn term() -> impl Strategy<Value = String> {
    prop::collection::vec(atom(), 1..4).prop_map(|v| v.join("*"))
}

fn expr() -> impl Strategy<Value = String> {
    (prop::collection::vec(term(), 1..3), prop::collection::vec(any::<bool>(), 2)).prop_map(|(terms, signs)| {
        let mut s = String::new();
        for (k, t) in terms.iter().enumerate() {
            if k > 0 {
                s.push_str(if signs[k % 2] { " + " } else { " - " });
            }
            s.push_str(t);
        }
        s
    })
}

fn op(text: &str) -> OperatorExpr {
    parse(text, DIM).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_is_a_ring_homomorphism(a in expr(), b in expr()) {
        let (x, y) = (op(&a), op(&b));
        prop_assert_eq!(op(&format!("({a})*({b})")), x.mul(&y));
        prop_assert_eq!(op(&format!("({a})+({b})")), x.add(&y));
        prop_assert_eq!(op(&format!("({a})-({a})")), OperatorExpr::zero(DIM));
    }

    #[test]
    fn product_is_associative(a in expr(), b in expr(), c in expr()) {
        let (x, y, z) = (op(&a), op(&b), op(&c));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
    }

    #[test]
    fn jacobi_identity(a in expr(), b in expr(), c in expr()) {
        let (x, y, z) = (op(&a), op(&b), op(&c));
        let sum = x.commutator(&y.commutator(&z))
            .add(&y.commutator(&z.commutator(&x)))
            .add(&z.commutator(&x.commutator(&y)));
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn conjugation_is_an_invertible_homomorphism(a in expr(), b in expr(), k in -3i64..4, m in 1i64..5) {
        let power = BigRational::new(BigInt::from(k), BigInt::from(m));
        let (x, y) = (op(&a), op(&b));
        let c = |o: &OperatorExpr| o.conjugate_by_d_power(&power);
        prop_assert_eq!(c(&x.mul(&y)), c(&x).mul(&c(&y)));
        prop_assert_eq!(c(&x).conjugate_by_d_power(&-power.clone()), x);
    }

    #[test]
    fn formal_adjoint_reverses_products(a in expr(), b in expr()) {
        let (x, y) = (op(&a), op(&b));
        prop_assert_eq!(x.mul(&y).formal_adjoint(), y.formal_adjoint().mul(&x.formal_adjoint()));
        prop_assert_eq!(x.formal_adjoint().formal_adjoint(), x);
    }

    #[test]
    fn flattening_round_trip(lambda in 0.0f64..2.0, r in 0.0f64..50.0) {
        let p = ModelParams::new(3, lambda, 1.0, 1.0).unwrap();
        let q = p.flattening_coordinate(r);
        let back = p.inverse_flattening(q).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r.max(1.0));
        prop_assert!(p.flattening_derivative(r) >= 1.0);
    }

    #[test]
    fn closed_form_levels_rise_below_threshold(dim in 2usize..7, lambda in 0.001f64..1.0, omega in 0.1f64..3.0, n in 0u32..200) {
        let p = ModelParams::new(dim, lambda, omega, 1.0).unwrap();
        let (e0, e1) = (p.closed_form_energy(n), p.closed_form_energy(n + 1));
        prop_assert!(e0 < e1);
        prop_assert!(e1 < p.continuum_threshold().value());
        let w = p.omega_eff(e0).unwrap();
        prop_assert!((e0 - w * (n as f64 + dim as f64 / 2.0)).abs() <= 1e-10 * e0);
    }

    #[test]
    fn sturm_count_brackets_each_eigenvalue(diag in prop::collection::vec(-5.0f64..5.0, 2..40), seed in any::<u64>()) {
        let off: Vec<f64> = (0..diag.len() - 1).map(|k| ((seed >> (k % 60)) & 7) as f64 * 0.3 + 0.1).collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        for k in 0..t.len() {
            let e = t.eigenvalue(k);
            let eps = 1e-9 * e.abs().max(1.0);
            prop_assert!(t.count_below(e - eps) <= k);
            prop_assert!(t.count_below(e + eps) > k);
        }
    }
}
