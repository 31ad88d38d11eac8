use conecert::exactfield::*;
use conecert::rationalize::*;
use conecert::solver::*;
use num_bigint::BigInt;
use proptest::prelude::*;

fn err(x: f64, q: &QSqrt2) -> f64 {
    (x - q.to_f64()).abs()
}

fn grid_error_bound(bound: u64) -> f64 {
    0.5 / bound as f64 + 1e-15
}

proptest! {
    #[test]
    fn best_rational_respects_bound(x in -100.0f64..100.0, bound in 1u64..100_000) {
        let r = best_rational(&rat_from_f64(x).unwrap(), bound, 64);
        prop_assert!(*r.denom() <= BigInt::from(bound));
        prop_assert!((x - rat_to_f64(&r)).abs() <= grid_error_bound(bound));
    }

    #[test]
    fn sqrt2_candidates_never_lose(x in -10.0f64..10.0, bound in 1u64..10_000) {
        let spec = RoundingSpec::new(bound).unwrap();
        let plain = round_scalar(x, &spec);
        prop_assert!(plain.is_rational());
        let with = round_scalar(x, &spec.with_sqrt2(true));
        prop_assert!(err(x, &with) <= err(x, &plain) + 1e-15);
    }

    #[test]
    fn grid_rounding(x in prop::collection::vec(-5.0f64..5.0, 1..20), bound in 1u64..1_000_000) {
        for (v, q) in x.iter().zip(round_to_grid(&x, bound)) {
            prop_assert!(q.is_rational());
            prop_assert_eq!(BigInt::from(bound) % q.rational_part().denom(), BigInt::from(0));
            prop_assert!(err(*v, &q) <= grid_error_bound(bound) + 1e-15 * v.abs());
        }
    }

    /// A strictly feasible exact point is returned unchanged.
    #[test]
    fn projection_fixes_feasible_points(
        nn in prop::collection::vec((1i64..50, 1i64..9), 3),
        diag in prop::collection::vec((3i64..9, 1i64..3), 3),
        off in prop::collection::vec((-1i64..2, 1i64..4), 3),
        coef in prop::collection::vec(-3i64..4, 2 * 9),
    ) {
        let blocks = vec![Block::new(BlockKind::Nonneg, 3), Block::new(BlockKind::Psd, 3)];
        // PSD coordinates are the upper triangle (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)
        let psd = [diag[0], off[0], off[1], diag[1], off[2], diag[2]];
        let x: Vec<QSqrt2> = nn.iter().chain(psd.iter()).map(|&(a, b)| QSqrt2::frac(a, b)).collect();
        let rows: Vec<SparseRow> = coef
            .chunks(9)
            .map(|c| c.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, QSqrt2::from_int(*v))).collect())
            .collect();
        let b: Vec<QSqrt2> = rows.iter().map(|r| r.iter().map(|(j, v)| v * &x[*j]).sum()).collect();
        let p = ExactConicProblem::new(blocks, rows, b).unwrap();
        let out = project_and_certify(&x, &p).unwrap();
        prop_assert_eq!(out.x, x);
    }
}

fn certifies(p: &ExactConicProblem, x: &[f64], bound: u64) -> bool {
    project_and_certify(&round_to_grid(x, bound), p).is_ok()
}

#[test]
fn success_is_monotone_in_the_bound() {
    let seed = build_seed_problem(&rat(1, 20), 10, 5).unwrap();
    let ecop = build_ecop_problem(&conecert::multop::compression(&ref_coeffs(), 5), 1, &rat(1, 10)).unwrap();
    for p in [seed, ecop] {
        let sol = solve_default(&p.to_float()).unwrap();
        assert!(sol.is_feasible());
        let bounds: Vec<u64> = (0..8).map(|k| 10u64.pow(k)).collect();
        let ok: Vec<bool> = bounds.iter().map(|&d| certifies(&p, &sol.x, d)).collect();
        let first = ok.iter().position(|&b| b).expect("some bound certifies");
        assert!(ok[first..].iter().all(|&b| b), "bounds {bounds:?} -> {ok:?}");
        assert!(ok[6], "1e6 must certify: {ok:?}");
    }
}

#[test]
fn projection_rejects_cone_violations() {
    // x₀ + x₁ = 1 with the candidate far outside the orthant: the projection stays outside
    let p = ExactConicProblem::new(
        vec![Block::new(BlockKind::Nonneg, 2)],
        vec![vec![(0, QSqrt2::from_int(1)), (1, QSqrt2::from_int(1))]],
        vec![QSqrt2::from_int(1)],
    )
    .unwrap();
    let e = project_and_certify(&[QSqrt2::from_int(3), QSqrt2::from_int(-1)], &p).unwrap_err();
    assert!(e.to_string().contains("entry"), "{e}");
    let ok = project_and_certify(&[QSqrt2::frac(3, 5), QSqrt2::frac(1, 2)], &p).unwrap();
    assert_eq!(ok.x, vec![QSqrt2::frac(11, 20), QSqrt2::frac(9, 20)]);
}

fn ref_coeffs() -> conecert::multop::FourierCoeffs {
    let a = ["16/27", "1/123", "1/294", "5/21", "4/29", "-2440263/3254580+1777340/3254580*sqrt2"];
    conecert::multop::FourierCoeffs::new(a.iter().map(|s| parse_qs(s).unwrap()).collect()).unwrap()
}
