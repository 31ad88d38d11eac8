use conecert::cones::*;
use conecert::exactfield::*;
use proptest::prelude::*;

fn entries(len: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, len)
}

fn gram_of(b: &[f64], n: usize, r: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| (0..r).map(|k| b[i * r + k] * b[j * r + k]).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cp_matrices_pass_every_outer_test(b in entries(5 * 3, 0.0, 1.0)) {
        let a = gram_of(&b, 5, 3);
        prop_assert!(is_nn(&a).is_in());
        prop_assert!(is_psd(&a, 1e-9).is_in());
        prop_assert!(is_dnn(&a, 1e-9).is_in());
        prop_assert!(is_spn(&a, &SpnOptions::default()).is_in());
        prop_assert!(!copositivity_sample_check(&a, 200, 1).violation);
    }

    #[test]
    fn psd_plus_nn_is_spn(b in entries(4 * 4, -1.0, 1.0), n in entries(10, 0.0, 0.5)) {
        let p = gram_of(&b, 4, 4);
        let nn = SymMatrix::from_upper(4, n);
        let a = SymMatrix::from_fn(4, |i, j| p.get(i, j) + nn.get(i, j));
        let r = is_spn(&a, &SpnOptions::default());
        prop_assert!(!r.is_out(), "{:?}", r.verdict);
    }

    #[test]
    fn eigen_sums(u in entries(21, -2.0, 2.0)) {
        let a = SymMatrix::from_upper(6, u);
        let ev = eig_sym(&a);
        prop_assert!((ev.iter().sum::<f64>() - a.trace()).abs() < 1e-10);
        let sq: f64 = ev.iter().map(|v| v * v).sum();
        prop_assert!((sq - a.frobenius_norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn witness_verdict_ignores_scaling(s in 1i64..50, t in 1i64..50) {
        let h = horn_matrix();
        let a = ExactSymMatrix::from_fn(5, |i, j| if i == j { QSqrt2::from_int(2) } else { QSqrt2::frac(1, 3) });
        let base = not_in_cone_witness(&a, &h, WitnessMode::Cp).unwrap().verdict;
        let scaled = not_in_cone_witness(&a.scaled(&QSqrt2::frac(s, 7)), &h.scaled(&QSqrt2::frac(t, 3)), WitnessMode::Cp)
            .unwrap()
            .verdict;
        prop_assert_eq!(base, scaled);
    }
}

#[test]
fn horn_matrix_profile() {
    let h = SymMatrix::from(&horn_matrix());
    assert!(is_nn(&h).is_out());
    assert!(is_psd(&h, 1e-9).is_out());
    assert!(!copositivity_sample_check(&h, 20_000, 3).violation);
    assert!(parrilo_membership(&h, 1, 1e-9).unwrap().is_in());
    assert!(!parrilo_membership(&h, 0, 1e-9).unwrap().is_in());
}

#[test]
fn horn_is_not_spn_with_exact_witness() {
    let h = SymMatrix::from(&horn_matrix());
    let r = is_spn(&h, &SpnOptions::default());
    assert!(r.is_out());
    match r.witness {
        Some(Witness::Dual { w, value }) => {
            assert!(value.is_negative());
            assert_eq!(frobenius_exact(&horn_matrix(), &w).unwrap(), value);
            assert!(is_psd_exact(&w).is_psd());
            assert!(w.upper().iter().all(|v| sign_of(v) >= 0));
        }
        other => panic!("expected exact dual witness, got {other:?}"),
    }
}

#[test]
fn negative_diagonal_is_not_spn() {
    let a = SymMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(is_spn(&a, &SpnOptions::default()).is_out());
}
