use conecert::exactfield::*;
use conecert::sos::*;
use proptest::prelude::*;

fn qs() -> impl Strategy<Value = QSqrt2> {
    (-30i64..30, 1i64..10, -5i64..5, 1i64..10).prop_map(|(a, b, c, d)| QSqrt2::new(rat(a, b), rat(c, d)))
}

fn sym(n: usize) -> impl Strategy<Value = ExactSymMatrix> {
    prop::collection::vec(qs(), n * (n + 1) / 2).prop_map(move |u| ExactSymMatrix::from_upper(n, u).unwrap())
}

fn dot(a: &[QSqrt2], b: &[QSqrt2]) -> QSqrt2 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(a: &[QSqrt2], b: &[QSqrt2], s: &QSqrt2, t: &QSqrt2) -> Vec<QSqrt2> {
    a.iter().zip(b).map(|(x, y)| &(s * x) + &(t * y)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trig_expansion_is_linear(g1 in sym(4), g2 in sym(4), s in qs(), t in qs()) {
        let mixed = g1.scaled(&s).checked_add(&g2.scaled(&t)).unwrap();
        prop_assert_eq!(trig_gram_expand(&mixed).c, combine(&trig_gram_expand(&g1).c, &trig_gram_expand(&g2).c, &s, &t));
    }

    #[test]
    fn poly_expansion_is_linear(g1 in sym(6), g2 in sym(6), s in qs(), t in qs()) {
        let basis = MonomialBasis::new(3, 2);
        let mixed = g1.scaled(&s).checked_add(&g2.scaled(&t)).unwrap();
        let lhs = poly_gram_expand(&mixed, &basis).unwrap();
        let rhs = combine(&poly_gram_expand(&g1, &basis).unwrap(), &poly_gram_expand(&g2, &basis).unwrap(), &s, &t);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjoints_match(g in sym(6), y in prop::collection::vec(qs(), 15)) {
        let map = poly_gram_map(&MonomialBasis::new(3, 2));
        let lhs = dot(&map.apply_exact(&g).unwrap(), &y);
        let rhs = frobenius_exact(&g, &map.adjoint_exact(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let tmap = trig_gram_map(3);
        let g4 = g.leading(4);
        let y7 = &y[..7];
        prop_assert_eq!(dot(&tmap.apply_exact(&g4).unwrap(), y7), frobenius_exact(&g4, &tmap.adjoint_exact(y7).unwrap()).unwrap());
    }

    #[test]
    fn trig_square_matches_quadrature(h in prop::collection::vec(-2.0f64..2.0, 4)) {
        let exact: Vec<QSqrt2> = h.iter().map(|v| QSqrt2::from_rat(rat_from_f64(*v).unwrap())).collect();
        let g = ExactSymMatrix::from_fn(4, |i, j| &exact[i] * &exact[j]);
        let c = trig_gram_expand(&g).c;
        let tau = 2.0 * std::f64::consts::PI;
        let sq = |x: f64| h.iter().enumerate().map(|(k, v)| v * (tau * k as f64 * x).cos()).sum::<f64>().powi(2);
        let pts = 400;
        for (k, ck) in c.iter().enumerate() {
            // trapezoid on a periodic trig polynomial of degree < pts is exact up to roundoff
            let mean = (0..pts).map(|i| { let x = i as f64 / pts as f64; sq(x) * (tau * k as f64 * x).cos() }).sum::<f64>() / pts as f64;
            let want = if k == 0 { mean } else { 2.0 * mean };
            prop_assert!((ck.to_f64() - want).abs() < 1e-10, "c{k}: {} vs {want}", ck.to_f64());
        }
    }
}

#[test]
fn sum_of_squares_identity() {
    // (x₁ - x₂)² + (x₂ - x₃)² in the basis (x₁, x₂, x₃)
    let g = ExactSymMatrix::from_rows(
        [[1, -1, 0], [-1, 2, -1], [0, -1, 1]].iter().map(|r| r.iter().map(|v| QSqrt2::from_int(*v)).collect()).collect(),
    )
    .unwrap();
    let basis = MonomialBasis::new(3, 1);
    let target = poly_gram_expand(&g, &basis).unwrap();
    let cert = GramCertificate { basis: BasisSpec::Monomial { n: 3, d: 1 }, gram: g.clone(), target: target.clone() };
    assert!(verify_sos_identity(&cert));

    let mut off = target;
    off[0] = &off[0] + &QSqrt2::frac(1, 1_000_000);
    assert!(!verify_sos_identity(&GramCertificate { target: off, ..cert.clone() }));
    let neg = GramCertificate { gram: g.scaled(&QSqrt2::from_int(-1)), target: poly_gram_expand(&g.scaled(&QSqrt2::from_int(-1)), &basis).unwrap(), ..cert };
    assert!(matches!(check_sos_identity(&neg), SosCheck::NotPsd { .. }));
}

#[test]
fn horn_target_is_quartic() {
    let c = expand_target(&conecert::cones::horn_matrix(), 0);
    assert_eq!(c.len(), binomial(5 + 4 - 1, 4));
    // x₁⁴ has coefficient H₁₁ = 1
    assert_eq!(c[0], QSqrt2::from_int(1));
}
