use conecert::exactfield::*;
use conecert::multop::*;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = QSqrt2> {
    (-20i64..20, 1i64..12, -6i64..6, 1i64..12).prop_map(|(a, b, c, d)| QSqrt2::new(rat(a, b), rat(c, d)))
}

fn coeffs(m: usize) -> impl Strategy<Value = FourierCoeffs> {
    prop::collection::vec(coeff(), m).prop_map(|a| FourierCoeffs::new(a).unwrap())
}

fn nonneg_coeffs(m: usize) -> impl Strategy<Value = FourierCoeffs> {
    prop::collection::vec((0i64..20, 1i64..12), m)
        .prop_map(|v| FourierCoeffs::new(v.into_iter().map(|(a, b)| QSqrt2::frac(a, b)).collect()).unwrap())
}

fn basis(k: usize, x: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        std::f64::consts::SQRT_2 * (2.0 * std::f64::consts::PI * k as f64 * x).cos()
    }
}

fn simpson(g: impl Fn(f64) -> f64, intervals: usize) -> f64 {
    let h = 1.0 / intervals as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..intervals {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #[test]
    fn leading_block_is_the_seed(f in coeffs(6), n in 5usize..11) {
        prop_assert_eq!(compression(&f, n).leading(5), compression(&f, 5));
    }

    #[test]
    fn seed_round_trip(f in coeffs(6)) {
        prop_assert_eq!(coeffs_from_seed(&compression(&f, 5)).unwrap(), f);
    }

    #[test]
    fn matches_quadrature(f in coeffs(4), n in 1usize..9) {
        let a = compression(&f, n);
        for i in 0..n {
            for j in i..n {
                let q = simpson(|x| f.eval(x) * basis(i, x) * basis(j, x), 2000);
                prop_assert!((a.get(i, j).to_f64() - q).abs() < 1e-10, "({i},{j}): {} vs {q}", a.get(i, j).to_f64());
            }
        }
    }

    #[test]
    fn nonneg_coefficients_give_nonneg_matrix(f in nonneg_coeffs(6), n in 1usize..10) {
        let a = compression(&f, n);
        prop_assert!(a.upper().iter().all(|v| sign_of(v) >= 0));
    }

    #[test]
    fn negative_coefficient_shows_up(f in coeffs(6)) {
        // with n = m + 1 the first row carries every a_k on its own
        let a = compression(&f, 7);
        let nn = a.upper().iter().all(|v| sign_of(v) >= 0);
        prop_assert_eq!(nn, f.all_nonneg());
    }
}

#[test]
fn tampered_seed_is_rejected() {
    let f = FourierCoeffs::new((1..=6).map(|k| QSqrt2::frac(1, k + 1)).collect()).unwrap();
    let mut a = compression(&f, 5);
    a.set(2, 4, a.get(2, 4) + &QSqrt2::frac(1, 1000));
    assert!(coeffs_from_seed(&a).is_err());
}

#[test]
fn integral_table() {
    assert_eq!(cos_product_integral(0, 0, 0), rat(1, 1));
    assert_eq!(cos_product_integral(0, 3, 3), rat(1, 2));
    assert_eq!(cos_product_integral(1, 2, 3), rat(1, 4));
    assert_eq!(cos_product_integral(1, 1, 1), rat(0, 1));
}
